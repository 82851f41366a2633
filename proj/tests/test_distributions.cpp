#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gridscope/distributions.hpp"
#include "gridscope/special.hpp"

using namespace gridscope;

namespace {

// Reference parameterizations on the seconds scale the pipeline uses.
const Dist kReference[] = {
    {Family::Normal, {5.0, 2.0}},
    {Family::Uniform, {0.0, 10.0}},
    {Family::Gamma, {2.3, 100.0, 1800.0}},
    {Family::ChiSquared, {3.5, 50.0, 900.0}},
    {Family::JohnsonSU, {0.8, 1.4, 7200.0, 3600.0}},
    {Family::JohnsonSB, {1.0, 1.5, 0.0, 36000.0}},
    {Family::InvertedWeibull, {1.8, 0.0, 3000.0}},
    {Family::ExponentiatedWeibull, {1.7, 0.9, 0.0, 5400.0}},
};

}  // namespace

TEST_CASE("normal quantile inverts the normal cdf", "[dist]") {
  for (double p : {1e-12, 1e-6, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.97575, 1.0 - 1e-6}) {
    const double z = norm_quantile(p);
    CHECK(norm_cdf(z) == Catch::Approx(p).epsilon(1e-11).margin(1e-13));
  }
  CHECK(norm_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(norm_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-10));
}

TEST_CASE("incomplete gamma against closed forms", "[dist]") {
  // P(1, x) = 1 - exp(-x)
  for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0})
    CHECK(gamma_p(1.0, x) == Catch::Approx(-std::expm1(-x)).epsilon(1e-12));
  // P(1/2, x) = erf(sqrt(x))
  for (double x : {0.01, 0.25, 1.0, 4.0, 9.0})
    CHECK(gamma_p(0.5, x) == Catch::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  CHECK(gamma_p(3.0, 0.0) == 0.0);

  for (double a : {0.3, 1.0, 2.5, 7.0, 50.0})
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-6}) {
      const double x = gamma_p_inv(a, p);
      CAPTURE(a, p, x);
      CHECK(gamma_p(a, x) == Catch::Approx(p).epsilon(1e-9).margin(1e-12));
    }
}

TEST_CASE("textbook anchor values", "[dist]") {
  CHECK(cdf({Family::Normal, {0, 1}}, 0.0) == Catch::Approx(0.5));
  CHECK(pdf({Family::Uniform, {2, 6}}, 3.0) == Catch::Approx(0.25));
  CHECK(pdf({Family::Uniform, {2, 6}}, 1.0) == 0.0);
  CHECK(pdf({Family::Uniform, {2, 6}}, 7.0) == 0.0);
  // Symmetric Johnson SB: the logit transform is odd about y = 1/2.
  CHECK(cdf({Family::JohnsonSB, {0, 1, 0, 1}}, 0.5) == Catch::Approx(0.5));
  // Exponential special cases: Gamma(1) and ExponentiatedWeibull(1,1).
  CHECK(cdf({Family::Gamma, {1.0, 0.0, 2.0}}, 2.0) == Catch::Approx(-std::expm1(-1.0)));
  CHECK(cdf({Family::ExponentiatedWeibull, {1.0, 1.0, 0.0, 2.0}}, 2.0) ==
        Catch::Approx(-std::expm1(-1.0)));
  // Chi-squared with two degrees of freedom is Exponential(2).
  CHECK(cdf({Family::ChiSquared, {2.0, 0.0, 1.0}}, 4.0) == Catch::Approx(-std::expm1(-2.0)));
  // Frechet median.
  const Dist iw{Family::InvertedWeibull, {2.0, 0.0, 1.0}};
  CHECK(cdf(iw, std::pow(std::log(2.0), -0.5)) == Catch::Approx(0.5));
}

TEST_CASE("pdf is nonnegative and cdf is a proper cdf", "[dist]") {
  for (const Dist& d : kReference) {
    CAPTURE(family_name(d.family));
    const double lo = quantile(d, 0.001);
    const double hi = quantile(d, 0.999);
    double prev_cdf = -1.0;
    for (int i = -5; i <= 105; ++i) {
      const double x = lo + (hi - lo) * i / 100.0;
      const double f = pdf(d, x);
      const double F = cdf(d, x);
      CAPTURE(x);
      CHECK(f >= 0.0);
      CHECK(F >= 0.0);
      CHECK(F <= 1.0);
      CHECK(F >= prev_cdf);
      prev_cdf = F;
    }
    CHECK(cdf(d, -1e300) == 0.0);
    CHECK(cdf(d, 1e300) == Catch::Approx(1.0));
  }
}

TEST_CASE("cdf derivative matches pdf", "[dist]") {
  for (const Dist& d : kReference) {
    CAPTURE(family_name(d.family));
    const double span = quantile(d, 0.95) - quantile(d, 0.05);
    const double h = span * 1e-4;
    for (int i = 1; i <= 19; ++i) {
      const double p = i / 20.0;
      const double x = quantile(d, p);
      const double fd = (cdf(d, x + h) - cdf(d, x - h)) / (2.0 * h);
      const double f = pdf(d, x);
      CAPTURE(p, x, f, fd);
      CHECK(fd == Catch::Approx(f).epsilon(1e-5));
    }
  }
}

TEST_CASE("quantile and cdf are inverse maps", "[dist]") {
  for (const Dist& d : kReference) {
    CAPTURE(family_name(d.family));
    for (int i = 1; i <= 39; ++i) {
      const double p = i / 40.0;
      const double x = quantile(d, p);
      CAPTURE(p, x);
      CHECK(cdf(d, x) == Catch::Approx(p).epsilon(1e-9).margin(1e-9));
      const double x2 = quantile(d, cdf(d, x));
      CHECK(x2 == Catch::Approx(x).epsilon(1e-6));
    }
  }
}

TEST_CASE("samples drawn through the quantile match the model", "[dist]") {
  // With n = 5000 a binomial fraction at a fixed quantile has sd <= 0.0071,
  // so 0.03 is a > 4 sigma acceptance band per check.
  constexpr std::size_t n = 5000;
  for (const Dist& d : kReference) {
    CAPTURE(family_name(d.family));
    auto samples = sample_n(d, n, 12345);
    REQUIRE(samples.size() == n);
    for (double p : {0.1, 0.25, 0.5, 0.75, 0.9}) {
      const double cut = quantile(d, p);
      std::size_t below = 0;
      for (double s : samples)
        if (s <= cut) ++below;
      const double frac = static_cast<double>(below) / n;
      CAPTURE(p, cut);
      CHECK(frac == Catch::Approx(p).margin(0.03));
    }
  }
}

TEST_CASE("sampling is deterministic for a fixed seed", "[dist]") {
  const Dist d{Family::Gamma, {2.3, 100.0, 1800.0}};
  auto a = sample_n(d, 64, 99);
  auto b = sample_n(d, 64, 99);
  CHECK(a == b);
  auto c = sample_n(d, 64, 100);
  CHECK(a != c);
}

TEST_CASE("invalid parameters are rejected", "[dist]") {
  CHECK_THROWS_AS(validate_dist({Family::Normal, {0.0, 0.0}}), InvalidParams);
  CHECK_THROWS_AS(validate_dist({Family::Normal, {0.0}}), InvalidParams);
  CHECK_THROWS_AS(validate_dist({Family::Uniform, {3.0, 3.0}}), InvalidParams);
  CHECK_THROWS_AS(validate_dist({Family::Gamma, {-1.0, 0.0, 1.0}}), InvalidParams);
  CHECK_THROWS_AS(validate_dist({Family::JohnsonSB, {0.0, 1.0, 0.0, -2.0}}), InvalidParams);
  CHECK_THROWS_AS(validate_dist({Family::ExponentiatedWeibull, {0.0, 1.0, 0.0, 1.0}}),
                  InvalidParams);
  CHECK_NOTHROW(validate_dist({Family::Gamma, {2.0, -5.0, 3.0}}));
}

TEST_CASE("family and param string round trips", "[dist]") {
  for (Family f : kAllFamilies) CHECK(family_from_name(family_name(f)) == f);
  CHECK_THROWS_AS(family_from_name("Cauchy"), InvalidParams);
  const std::vector<double> params = {1.5, -2.25e-3, 36000.0};
  CHECK(params_from_string(params_to_string(params)) == params);
}
