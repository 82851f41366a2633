#pragma once

// Plain Nelder-Mead simplex minimizer. The fit pipeline optimizes over
// transformed (unconstrained) parameters, so no bound handling here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace gridscope {

struct NelderMeadOptions {
  std::size_t max_iter = 2000;
  double rel_ftol = 1e-8;
  double init_step = 0.25;  // absolute offset per coordinate for the first simplex
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                                    const std::vector<double>& x0,
                                    const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> pts(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += opt.init_step;
  std::vector<double> fv(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) fv[i] = fn(pts[i]);

  std::vector<std::size_t> order(dim + 1);
  NelderMeadResult result;

  for (result.iterations = 0; result.iterations < opt.max_iter; ++result.iterations) {
    for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&fv](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[dim], second = order[dim - 1];

    const double spread = 2.0 * std::fabs(fv[worst] - fv[best]) /
                          (std::fabs(fv[worst]) + std::fabs(fv[best]) + 1e-300);
    if (spread < opt.rel_ftol) {
      result.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += pts[i][k];
    }
    for (std::size_t k = 0; k < dim; ++k) centroid[k] /= static_cast<double>(dim);

    auto blend = [&centroid, dim](const std::vector<double>& p, double coef) {
      std::vector<double> out(dim);
      for (std::size_t k = 0; k < dim; ++k) out[k] = centroid[k] + coef * (p[k] - centroid[k]);
      return out;
    };

    std::vector<double> refl = blend(pts[worst], -alpha);
    const double f_refl = fn(refl);

    if (f_refl < fv[best]) {
      std::vector<double> exp_pt = blend(pts[worst], -gamma);
      const double f_exp = fn(exp_pt);
      if (f_exp < f_refl) {
        pts[worst] = std::move(exp_pt);
        fv[worst] = f_exp;
      } else {
        pts[worst] = std::move(refl);
        fv[worst] = f_refl;
      }
    } else if (f_refl < fv[second]) {
      pts[worst] = std::move(refl);
      fv[worst] = f_refl;
    } else {
      const bool outside = f_refl < fv[worst];
      std::vector<double> contr = blend(outside ? refl : pts[worst], rho);
      const double f_contr = fn(contr);
      if (f_contr < std::min(f_refl, fv[worst])) {
        pts[worst] = std::move(contr);
        fv[worst] = f_contr;
      } else {
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < dim; ++k)
            pts[i][k] = pts[best][k] + sigma * (pts[i][k] - pts[best][k]);
          fv[i] = fn(pts[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= dim; ++i)
    if (fv[i] < fv[best]) best = i;
  result.x = pts[best];
  result.fx = fv[best];
  return result;
}

}  // namespace gridscope
