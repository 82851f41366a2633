#pragma once

// MLE fitting over the eight families. Free parameters are optimized by
// Nelder-Mead in a transformed space: log scale for positive parameters,
// and for lower-bounded supports the location is min(sample) minus a
// positive margin, with a quadratic penalty on the log-margin so the
// optimizer cannot chase the location-singularity of shape<1 densities.
// JohnsonSB endpoints get the same treatment around the anchor band
// [min - 0.05*range, max + 0.05*range].
//
// Model selection ranks by KS distance (log-likelihood breaks ties).
// Gamma and ChiSquared overlap exactly; JohnsonSB and ExponentiatedWeibull
// overlap closely on bounded-looking data. Selection never needs to tell
// those pairs apart.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gridscope/classify.hpp"
#include "gridscope/distributions.hpp"
#include "gridscope/errors.hpp"
#include "gridscope/nelder_mead.hpp"

namespace gridscope {

struct FitOptions {
  std::size_t max_iter = 2000;
  double rel_tol = 1e-8;
  int starts = 3;                 // moment-based init plus jittered copies
  std::uint64_t seed = 0xf17a11;  // jitter stream; fixed so fits are reproducible
};

struct DistributionFit {
  Dist dist;
  double log_likelihood = 0.0;
  double ks = 1.0;
  std::size_t n = 0;
  std::size_t iterations = 0;
};

// Two-sided KS distance between the sample ECDF and the model CDF.
inline double ks_statistic(std::vector<double> samples, const Dist& d) {
  if (samples.empty()) throw EmptyInput("ks_statistic needs at least one sample");
  validate_dist(d);
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(d, samples[i]);
    dist = std::max(dist, f - static_cast<double>(i) / n);
    dist = std::max(dist, static_cast<double>(i + 1) / n - f);
  }
  return dist;
}

namespace detail {

struct Moments {
  std::size_t n = 0;
  double mean = 0, sd = 0, min = 0, max = 0, range = 0, median = 0;
};

inline Moments compute_moments(const std::vector<double>& x) {
  Moments m;
  m.n = x.size();
  m.min = x[0];
  m.max = x[0];
  double sum = 0;
  for (double v : x) {
    sum += v;
    m.min = std::min(m.min, v);
    m.max = std::max(m.max, v);
  }
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(m.n));
  m.range = m.max - m.min;
  std::vector<double> copy = x;
  auto mid = copy.begin() + static_cast<std::ptrdiff_t>(copy.size() / 2);
  std::nth_element(copy.begin(), mid, copy.end());
  m.median = *mid;
  return m;
}

struct Transform {
  std::vector<double> u0;
  std::function<std::vector<double>(const std::vector<double>&)> to_params;
  std::function<double(const std::vector<double>&)> penalty;
};

// Mean/sd of the normal z-scores implied by a Johnson transform guess;
// used to initialize gamma/delta from the data.
inline std::pair<double, double> z_moments(const std::vector<double>& z) {
  double sum = 0;
  for (double v : z) sum += v;
  const double mean = sum / static_cast<double>(z.size());
  double ss = 0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(z.size()));
  return {mean, std::max(sd, 1e-3)};
}

inline Transform make_transform(Family family, const std::vector<double>& x,
                                const Moments& m) {
  Transform tf;
  const double var = std::max(m.sd * m.sd, 1e-12);
  switch (family) {
    case Family::Gamma: {
      const double margin = std::max(m.range, 1.0) * 0.01;
      tf.to_params = [min = m.min, margin](const std::vector<double>& u) {
        return std::vector<double>{std::exp(u[0]), min - margin * std::exp(u[1]),
                                   std::exp(u[2])};
      };
      tf.penalty = [](const std::vector<double>& u) { return 0.5 * u[1] * u[1]; };
      const double mu = m.mean - (m.min - margin);
      const double shape0 = std::clamp(mu * mu / var, 0.05, 1e4);
      tf.u0 = {std::log(shape0), 0.0, std::log(std::max(var / mu, 1e-9))};
      break;
    }
    case Family::ChiSquared: {
      const double margin = std::max(m.range, 1.0) * 0.01;
      tf.to_params = [min = m.min, margin](const std::vector<double>& u) {
        return std::vector<double>{std::exp(u[0]), min - margin * std::exp(u[1]),
                                   std::exp(u[2])};
      };
      tf.penalty = [](const std::vector<double>& u) { return 0.5 * u[1] * u[1]; };
      const double mu = m.mean - (m.min - margin);
      const double scale0 = std::max(var / (2.0 * mu), 1e-9);
      const double df0 = std::clamp(mu / scale0, 0.05, 1e4);
      tf.u0 = {std::log(df0), 0.0, std::log(scale0)};
      break;
    }
    case Family::JohnsonSU: {
      tf.to_params = [](const std::vector<double>& u) {
        return std::vector<double>{u[0], std::exp(u[1]), u[2], std::exp(u[3])};
      };
      tf.penalty = [](const std::vector<double>&) { return 0.0; };
      const double xi0 = m.median;
      const double lambda0 = std::max(m.sd, 1e-9);
      std::vector<double> z;
      z.reserve(x.size());
      for (double v : x) z.push_back(std::asinh((v - xi0) / lambda0));
      const auto [zm, zs] = z_moments(z);
      const double delta0 = std::clamp(1.0 / zs, 1e-3, 1e3);
      tf.u0 = {-zm * delta0, std::log(delta0), xi0, std::log(lambda0)};
      break;
    }
    case Family::JohnsonSB: {
      const double margin = std::max(m.range, 1.0) * 0.05;
      tf.to_params = [min = m.min, max = m.max, margin](const std::vector<double>& u) {
        const double lo = min - margin * std::exp(u[2]);
        const double hi = max + margin * std::exp(u[3]);
        return std::vector<double>{u[0], std::exp(u[1]), lo, hi - lo};
      };
      tf.penalty = [](const std::vector<double>& u) {
        return 0.5 * (u[2] * u[2] + u[3] * u[3]);
      };
      const double lo0 = m.min - margin;
      const double span0 = (m.max + margin) - lo0;
      std::vector<double> z;
      z.reserve(x.size());
      for (double v : x) {
        const double y = std::clamp((v - lo0) / span0, 1e-9, 1.0 - 1e-9);
        z.push_back(std::log(y) - std::log1p(-y));
      }
      const auto [zm, zs] = z_moments(z);
      const double delta0 = std::clamp(1.0 / zs, 1e-3, 1e3);
      tf.u0 = {-zm * delta0, std::log(delta0), 0.0, 0.0};
      break;
    }
    case Family::InvertedWeibull: {
      const double margin = std::max(m.range, 1.0) * 0.01;
      tf.to_params = [min = m.min, margin](const std::vector<double>& u) {
        return std::vector<double>{std::exp(u[0]), min - margin * std::exp(u[1]),
                                   std::exp(u[2])};
      };
      tf.penalty = [](const std::vector<double>& u) { return 0.5 * u[1] * u[1]; };
      const double c0 = 2.0;
      const double scale0 =
          std::max((m.median - (m.min - margin)) * std::pow(std::log(2.0), 1.0 / c0), 1e-9);
      tf.u0 = {std::log(c0), 0.0, std::log(scale0)};
      break;
    }
    case Family::ExponentiatedWeibull: {
      const double margin = std::max(m.range, 1.0) * 0.01;
      tf.to_params = [min = m.min, margin](const std::vector<double>& u) {
        return std::vector<double>{std::exp(u[0]), std::exp(u[1]),
                                   min - margin * std::exp(u[2]), std::exp(u[3])};
      };
      tf.penalty = [](const std::vector<double>& u) { return 0.5 * u[2] * u[2]; };
      const double mu = m.mean - (m.min - margin);
      const double cv = std::clamp(m.sd / std::max(mu, 1e-9), 0.05, 5.0);
      const double c0 = std::clamp(std::pow(cv, -1.086), 0.2, 20.0);
      tf.u0 = {0.0, std::log(c0), 0.0, std::log(std::max(mu, 1e-9))};
      break;
    }
    default:
      throw InvalidParams("no transform for closed-form family");
  }
  return tf;
}

inline double sum_log_pdf(const Dist& d, const std::vector<double>& x) {
  double ll = 0.0;
  for (double v : x) {
    const double lp = log_pdf(d, v);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    ll += lp;
  }
  return ll;
}

}  // namespace detail

inline DistributionFit fit_mle(const std::vector<double>& samples, Family family,
                               const FitOptions& opt = {}) {
  if (samples.size() < 30)
    throw TooFewSamples("need at least 30 samples, got " + std::to_string(samples.size()));
  const detail::Moments m = detail::compute_moments(samples);
  if (m.range == 0.0) throw DegenerateSample("all sample values equal");

  DistributionFit fit;
  fit.n = samples.size();

  if (family == Family::Normal) {
    fit.dist = {Family::Normal, {m.mean, std::max(m.sd, 1e-12)}};
    fit.log_likelihood = detail::sum_log_pdf(fit.dist, samples);
    fit.ks = ks_statistic(samples, fit.dist);
    return fit;
  }
  if (family == Family::Uniform) {
    fit.dist = {Family::Uniform, {m.min, m.max}};
    fit.log_likelihood =
        -static_cast<double>(fit.n) * std::log(m.range);
    fit.ks = ks_statistic(samples, fit.dist);
    return fit;
  }

  detail::Transform tf = detail::make_transform(family, samples, m);
  auto objective = [&](const std::vector<double>& u) -> double {
    Dist d{family, tf.to_params(u)};
    try {
      validate_dist(d);
    } catch (const InvalidParams&) {
      return 1e300;
    }
    const double ll = detail::sum_log_pdf(d, samples);
    if (!std::isfinite(ll)) return 1e300;
    return tf.penalty(u) - ll;
  };

  std::mt19937_64 jitter_rng(opt.seed ^ (static_cast<std::uint64_t>(family) * 0x9e3779b9));
  NelderMeadOptions nm;
  nm.max_iter = opt.max_iter;
  nm.rel_ftol = opt.rel_tol;

  NelderMeadResult best;
  best.fx = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (int s = 0; s < std::max(opt.starts, 1); ++s) {
    std::vector<double> u = tf.u0;
    if (s > 0)
      for (double& v : u) v += 0.35 * norm_quantile(uniform_unit(jitter_rng));
    NelderMeadResult r = nelder_mead(objective, u, nm);
    any_converged = any_converged || r.converged;
    if (r.fx < best.fx) best = std::move(r);
  }
  if (!any_converged)
    throw NoConvergence(std::string(family_name(family)) + ": iteration cap " +
                        std::to_string(opt.max_iter) + " hit on every start");

  fit.dist = {family, tf.to_params(best.x)};
  validate_dist(fit.dist);
  fit.log_likelihood = detail::sum_log_pdf(fit.dist, samples);
  fit.ks = ks_statistic(samples, fit.dist);
  fit.iterations = best.iterations;
  return fit;
}

// Fits every candidate family and ranks: KS ascending, log-likelihood
// descending on near-ties. Families that fail to fit are skipped (sample
// problems abort outright since they would hit every family the same way).
inline std::vector<DistributionFit> select_best(const std::vector<double>& samples,
                                                const std::vector<Family>& families,
                                                const FitOptions& opt = {}) {
  std::vector<DistributionFit> fits;
  std::string failures;
  for (Family f : families) {
    try {
      fits.push_back(fit_mle(samples, f, opt));
    } catch (const TooFewSamples&) {
      throw;
    } catch (const DegenerateSample&) {
      throw;
    } catch (const Error& e) {
      failures += std::string(failures.empty() ? "" : "; ") + family_name(f) + ": " +
                  e.what();
    }
  }
  if (fits.empty()) throw AllFitsFailed("no family produced a fit (" + failures + ")");
  std::sort(fits.begin(), fits.end(), [](const DistributionFit& a, const DistributionFit& b) {
    if (std::fabs(a.ks - b.ks) > 1e-12) return a.ks < b.ks;
    return a.log_likelihood > b.log_likelihood;
  });
  return fits;
}

struct MixtureComponent {
  double weight = 0;
  Dist dist;
};

struct MixtureModel {
  std::vector<MixtureComponent> components;

  double pdf(double x) const {
    double v = 0;
    for (const auto& c : components) v += c.weight * gridscope::pdf(c.dist, x);
    return v;
  }
  double cdf(double x) const {
    double v = 0;
    for (const auto& c : components) v += c.weight * gridscope::cdf(c.dist, x);
    return v;
  }
};

inline MixtureModel overall_mixture(const std::vector<DistributionFit>& per_class_fits,
                                    const std::vector<double>& class_weights) {
  if (per_class_fits.size() != class_weights.size())
    throw WeightMismatch("got " + std::to_string(per_class_fits.size()) + " fits and " +
                         std::to_string(class_weights.size()) + " weights");
  if (per_class_fits.empty()) throw WeightMismatch("empty mixture");
  double sum = 0;
  for (double w : class_weights) {
    if (w < 0) throw WeightMismatch("negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw WeightMismatch("weights sum to " + std::to_string(sum));
  MixtureModel mix;
  for (std::size_t i = 0; i < per_class_fits.size(); ++i)
    mix.components.push_back({class_weights[i], per_class_fits[i].dist});
  return mix;
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb, double whole,
                                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 40) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

}  // namespace detail

// Numeric mass of a single family pdf; the quantile bounds leave < 2*eps
// of true mass outside the integration window.
inline double integrate_pdf(const Dist& d, double eps = 1e-7, double tol = 1e-6) {
  const double a = quantile(d, eps);
  const double b = quantile(d, 1.0 - eps);
  return detail::adaptive_simpson([&d](double x) { return pdf(d, x); }, a, b, tol);
}

inline double integrate_mixture_pdf(const MixtureModel& mix, double eps = 1e-7,
                                    double tol = 1e-6) {
  double a = std::numeric_limits<double>::infinity();
  double b = -std::numeric_limits<double>::infinity();
  for (const auto& c : mix.components) {
    a = std::min(a, quantile(c.dist, eps));
    b = std::max(b, quantile(c.dist, 1.0 - eps));
  }
  return detail::adaptive_simpson([&mix](double x) { return mix.pdf(x); }, a, b, tol);
}

// Runtime samples for one (cluster, label) slice of the events table.
// Zero runtimes are clamped to one second (log transforms downstream);
// empty cluster string means all clusters.
inline std::vector<double> runtime_samples(const std::vector<TerminationEvent>& events,
                                           Label label, const std::string& cluster = "") {
  std::vector<double> out;
  for (const auto& ev : events) {
    if (ev.label != label) continue;
    if (!cluster.empty() && ev.resource_name != cluster) continue;
    out.push_back(ev.instance_runtime < 1 ? 1.0 : static_cast<double>(ev.instance_runtime));
  }
  return out;
}

}  // namespace gridscope
