#pragma once

// The eight runtime distribution families, each with pdf, log-pdf, cdf,
// quantile, and quantile-based sampling. Parameter vector layouts:
//
//   Normal               {mean, stddev}
//   Uniform              {lower, upper}
//   Gamma                {shape, loc, scale}
//   ChiSquared           {df, loc, scale}
//   JohnsonSU            {gamma, delta, loc, scale}    z = gamma + delta*asinh((x-loc)/scale)
//   JohnsonSB            {gamma, delta, loc, scale}    z = gamma + delta*logit((x-loc)/scale)
//   InvertedWeibull      {shape, loc, scale}           cdf = exp(-t^-shape)
//   ExponentiatedWeibull {a, shape, loc, scale}        cdf = (1 - exp(-t^shape))^a
//
// ChiSquared keeps a free df plus loc/scale; it overlaps Gamma by design
// and selection between the two is allowed to go either way.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gridscope/errors.hpp"
#include "gridscope/special.hpp"

namespace gridscope {

enum class Family {
  Normal,
  Uniform,
  Gamma,
  ChiSquared,
  JohnsonSU,
  JohnsonSB,
  InvertedWeibull,
  ExponentiatedWeibull,
};

inline constexpr Family kAllFamilies[] = {
    Family::Normal,         Family::Uniform,   Family::Gamma,
    Family::ChiSquared,     Family::JohnsonSU, Family::JohnsonSB,
    Family::InvertedWeibull, Family::ExponentiatedWeibull};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Normal: return "Normal";
    case Family::Uniform: return "Uniform";
    case Family::Gamma: return "Gamma";
    case Family::ChiSquared: return "ChiSquared";
    case Family::JohnsonSU: return "JohnsonSU";
    case Family::JohnsonSB: return "JohnsonSB";
    case Family::InvertedWeibull: return "InvertedWeibull";
    case Family::ExponentiatedWeibull: return "ExponentiatedWeibull";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  for (Family f : kAllFamilies)
    if (s == family_name(f)) return f;
  throw InvalidParams("unknown family: " + s);
}

inline std::size_t n_params(Family f) {
  switch (f) {
    case Family::Normal:
    case Family::Uniform: return 2;
    case Family::Gamma:
    case Family::ChiSquared:
    case Family::InvertedWeibull: return 3;
    default: return 4;
  }
}

struct Dist {
  Family family = Family::Normal;
  std::vector<double> params;
};

inline void validate_dist(const Dist& d) {
  if (d.params.size() != n_params(d.family))
    throw InvalidParams(std::string(family_name(d.family)) + " expects " +
                        std::to_string(n_params(d.family)) + " parameters, got " +
                        std::to_string(d.params.size()));
  for (double p : d.params)
    if (!std::isfinite(p)) throw InvalidParams("non-finite parameter");
  const auto& p = d.params;
  auto positive = [&](double v, const char* what) {
    if (!(v > 0.0)) throw InvalidParams(std::string(family_name(d.family)) + ": " + what +
                                        " must be positive");
  };
  switch (d.family) {
    case Family::Normal: positive(p[1], "stddev"); break;
    case Family::Uniform:
      if (!(p[1] > p[0])) throw InvalidParams("Uniform: upper must exceed lower");
      break;
    case Family::Gamma:
      positive(p[0], "shape");
      positive(p[2], "scale");
      break;
    case Family::ChiSquared:
      positive(p[0], "df");
      positive(p[2], "scale");
      break;
    case Family::JohnsonSU:
    case Family::JohnsonSB:
      positive(p[1], "delta");
      positive(p[3], "scale");
      break;
    case Family::InvertedWeibull:
      positive(p[0], "shape");
      positive(p[2], "scale");
      break;
    case Family::ExponentiatedWeibull:
      positive(p[0], "a");
      positive(p[1], "shape");
      positive(p[3], "scale");
      break;
  }
}

namespace detail {

// log(1 - exp(-s)) for s > 0 without cancellation.
inline double log1m_exp_neg(double s) {
  return s > 0.5 ? std::log1p(-std::exp(-s)) : std::log(-std::expm1(-s));
}

}  // namespace detail

inline double log_pdf(const Dist& d, double x) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const auto& p = d.params;
  switch (d.family) {
    case Family::Normal: {
      const double z = (x - p[0]) / p[1];
      return norm_log_pdf(z) - std::log(p[1]);
    }
    case Family::Uniform:
      return (x >= p[0] && x <= p[1]) ? -std::log(p[1] - p[0]) : neg_inf;
    case Family::Gamma: {
      const double t = (x - p[1]) / p[2];
      if (t <= 0.0) return neg_inf;
      return (p[0] - 1.0) * std::log(t) - t - std::lgamma(p[0]) - std::log(p[2]);
    }
    case Family::ChiSquared: {
      const double k = 0.5 * p[0];
      const double y = (x - p[1]) / p[2];
      if (y <= 0.0) return neg_inf;
      return (k - 1.0) * std::log(y) - 0.5 * y - k * std::log(2.0) - std::lgamma(k) -
             std::log(p[2]);
    }
    case Family::JohnsonSU: {
      const double u = (x - p[2]) / p[3];
      const double z = p[0] + p[1] * std::asinh(u);
      return std::log(p[1]) - std::log(p[3]) - 0.5 * std::log1p(u * u) + norm_log_pdf(z);
    }
    case Family::JohnsonSB: {
      const double y = (x - p[2]) / p[3];
      if (y <= 0.0 || y >= 1.0) return neg_inf;
      const double z = p[0] + p[1] * (std::log(y) - std::log1p(-y));
      return std::log(p[1]) - std::log(p[3]) - std::log(y) - std::log1p(-y) +
             norm_log_pdf(z);
    }
    case Family::InvertedWeibull: {
      const double t = (x - p[1]) / p[2];
      if (t <= 0.0) return neg_inf;
      const double c = p[0];
      return std::log(c) - std::log(p[2]) - (c + 1.0) * std::log(t) - std::pow(t, -c);
    }
    case Family::ExponentiatedWeibull: {
      const double t = (x - p[2]) / p[3];
      if (t <= 0.0) return neg_inf;
      const double a = p[0];
      const double c = p[1];
      const double tc = std::pow(t, c);
      double tail = 0.0;
      if (a != 1.0) {
        if (tc > 745.0) tail = 0.0;  // exp(-tc) underflows; log term vanishes
        else tail = (a - 1.0) * detail::log1m_exp_neg(tc);
      }
      return std::log(a) + std::log(c) - std::log(p[3]) + (c - 1.0) * std::log(t) - tc +
             tail;
    }
  }
  return neg_inf;
}

inline double pdf(const Dist& d, double x) {
  const double lp = log_pdf(d, x);
  return std::isfinite(lp) ? std::exp(lp) : 0.0;
}

inline double cdf(const Dist& d, double x) {
  const auto& p = d.params;
  switch (d.family) {
    case Family::Normal: return norm_cdf((x - p[0]) / p[1]);
    case Family::Uniform:
      if (x <= p[0]) return 0.0;
      if (x >= p[1]) return 1.0;
      return (x - p[0]) / (p[1] - p[0]);
    case Family::Gamma: {
      const double t = (x - p[1]) / p[2];
      return t <= 0.0 ? 0.0 : gamma_p(p[0], t);
    }
    case Family::ChiSquared: {
      const double y = (x - p[1]) / p[2];
      return y <= 0.0 ? 0.0 : gamma_p(0.5 * p[0], 0.5 * y);
    }
    case Family::JohnsonSU:
      return norm_cdf(p[0] + p[1] * std::asinh((x - p[2]) / p[3]));
    case Family::JohnsonSB: {
      const double y = (x - p[2]) / p[3];
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return norm_cdf(p[0] + p[1] * (std::log(y) - std::log1p(-y)));
    }
    case Family::InvertedWeibull: {
      const double t = (x - p[1]) / p[2];
      return t <= 0.0 ? 0.0 : std::exp(-std::pow(t, -p[0]));
    }
    case Family::ExponentiatedWeibull: {
      const double t = (x - p[2]) / p[3];
      if (t <= 0.0) return 0.0;
      const double tc = std::pow(t, p[1]);
      if (tc > 745.0) return 1.0;
      return std::exp(p[0] * detail::log1m_exp_neg(tc));
    }
  }
  return 0.0;
}

inline double quantile(const Dist& d, double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidParams("quantile needs p in [0,1]");
  const auto& p = d.params;
  switch (d.family) {
    case Family::Normal: return p[0] + p[1] * norm_quantile(prob);
    case Family::Uniform: return p[0] + (p[1] - p[0]) * prob;
    case Family::Gamma: return p[1] + p[2] * gamma_p_inv(p[0], prob);
    case Family::ChiSquared: return p[1] + p[2] * 2.0 * gamma_p_inv(0.5 * p[0], prob);
    case Family::JohnsonSU:
      return p[2] + p[3] * std::sinh((norm_quantile(prob) - p[0]) / p[1]);
    case Family::JohnsonSB: {
      if (prob == 0.0) return p[2];
      if (prob == 1.0) return p[2] + p[3];
      const double t = (norm_quantile(prob) - p[0]) / p[1];
      return p[2] + p[3] / (1.0 + std::exp(-t));
    }
    case Family::InvertedWeibull: {
      if (prob == 0.0) return p[1];
      if (prob == 1.0) return std::numeric_limits<double>::infinity();
      return p[1] + p[2] * std::pow(-std::log(prob), -1.0 / p[0]);
    }
    case Family::ExponentiatedWeibull: {
      if (prob == 0.0) return p[2];
      if (prob == 1.0) return std::numeric_limits<double>::infinity();
      // t = (-log(1 - prob^(1/a)))^(1/shape), computed via expm1 to keep
      // precision as prob -> 1.
      const double inner = -std::expm1(std::log(prob) / p[0]);
      return p[2] + p[3] * std::pow(-std::log(inner), 1.0 / p[1]);
    }
  }
  return 0.0;
}

// Uniform draw in the open interval (0,1); 53-bit resolution.
inline double uniform_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double sample(const Dist& d, std::mt19937_64& rng) {
  return quantile(d, uniform_unit(rng));
}

inline std::vector<double> sample_n(const Dist& d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample(d, rng));
  return out;
}

inline std::string params_to_string(const std::vector<double>& params) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) out += ';';
    std::snprintf(buf, sizeof(buf), "%.9g", params[i]);
    out += buf;
  }
  return out;
}

inline std::vector<double> params_from_string(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(';', pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(std::stod(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace gridscope
