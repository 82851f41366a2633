#pragma once

// Minimal stderr logger. Level comes from the GRIDSCOPE_LOG environment
// variable (error, info, debug); unset or unknown means error-only.

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gridscope {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel& log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("GRIDSCOPE_LOG");
    if (env == nullptr) return LogLevel::Error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

inline void vlog(LogLevel at, const char* tag, const char* fmt, std::va_list ap) {
  if (static_cast<int>(at) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::vfprintf(stderr, fmt, ap);
  std::fputc('\n', stderr);
}

inline void log_error(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  vlog(LogLevel::Error, "error", fmt, ap);
  va_end(ap);
}

inline void log_info(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  vlog(LogLevel::Info, "info", fmt, ap);
  va_end(ap);
}

inline void log_debug(const char* fmt, ...) {
  std::va_list ap;
  va_start(ap, fmt);
  vlog(LogLevel::Debug, "debug", fmt, ap);
  va_end(ap);
}

}  // namespace gridscope
