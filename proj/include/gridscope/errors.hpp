#pragma once

// Error taxonomy. Everything thrown on purpose derives from Error so the
// CLI can map "our" failures to exit code 2 and let genuine bugs escape.

#include <stdexcept>
#include <string>

namespace gridscope {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A single bad line inside an otherwise usable snapshot file. Not thrown
// during bulk ingest (bad lines are quarantined and counted); thrown only
// by the strict single-ad parser.
struct MalformedAd : Error {
  explicit MalformedAd(const std::string& reason) : Error(reason) {}
};

struct BadFilename : Error {
  explicit BadFilename(const std::string& name)
      : Error("not a snapshot filename: " + name) {}
};

struct DuplicateKeyInFrame : Error {
  explicit DuplicateKeyInFrame(const std::string& key)
      : Error("duplicate pilot key in frame: " + key) {}
};

struct EmptyDirectory : Error {
  explicit EmptyDirectory(const std::string& dir)
      : Error("no snapshot files in " + dir) {}
};

struct NonMonotoneTimestamps : Error {
  explicit NonMonotoneTimestamps(const std::string& what) : Error(what) {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct TooFewSamples : Error {
  explicit TooFewSamples(const std::string& what) : Error(what) {}
};

struct DegenerateSample : Error {
  explicit DegenerateSample(const std::string& what) : Error(what) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& what) : Error(what) {}
};

struct AllFitsFailed : Error {
  explicit AllFitsFailed(const std::string& what) : Error(what) {}
};

struct WeightMismatch : Error {
  explicit WeightMismatch(const std::string& what) : Error(what) {}
};

struct InvalidParams : Error {
  explicit InvalidParams(const std::string& what) : Error(what) {}
};

struct InvalidConfig : Error {
  explicit InvalidConfig(const std::string& what) : Error(what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

struct CsvError : Error {
  explicit CsvError(const std::string& what) : Error(what) {}
};

}  // namespace gridscope
