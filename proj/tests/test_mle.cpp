#include <doctest.h>

#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "levytail/errors.hpp"
#include "levytail/mle.hpp"

using namespace levytail;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

LevyTriplet cp_exp(double lambda) {
  LevyTriplet t;
  t.jumps = {JumpFamily(Exponential{1.0}), lambda};
  return t;
}

}  // namespace

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("compound Poisson sampler moments") {
  const double lambda = 2.0;
  const std::vector<double> x = sample_id_distribution(cp_exp(lambda), 40000, 99);
  CHECK(x == sample_id_distribution(cp_exp(lambda), 40000, 99));
  // mean lambda, variance 2 lambda
  CHECK(std::abs(mean(x) - lambda) < 5.0 * std::sqrt(2.0 * lambda / x.size()));
  CHECK(variance(x) == doctest::Approx(2.0 * lambda).epsilon(0.05));
  const auto zeros = std::count(x.begin(), x.end(), 0.0);
  CHECK(static_cast<double>(zeros) / x.size() == doctest::Approx(std::exp(-lambda)).epsilon(0.05));
}

TEST_CASE("Gaussian and drift sampler") {
  LevyTriplet t;
  t.gaussian = 2.0;
  t.drift = -1.0;
  const std::vector<double> x = sample_id_distribution(t, 40000, 3);
  CHECK(mean(x) == doctest::Approx(-1.0).epsilon(0.03));
  CHECK(variance(x) == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("infinite activity needs a cutoff") {
  LevyTriplet t;
  t.jumps = {JumpFamily(Semistable{1.5, 2.0, 0.05, 0.5, 0.0}), kInf};
  try {
    sample_id_distribution(t, 10, 1);
    FAIL("expected CutoffRequired");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CutoffRequired);
  }
  CHECK(sample_id_distribution(t, 100, 1, 0.01).size() == 100);
}

TEST_CASE("likelihood density against the Bessel closed form") {
  const double lambda = 1.3;
  const LikelihoodDensity f(cp_exp(lambda), GridParams{0.0, 80.0, 0.005});
  CHECK(f.atom() == doctest::Approx(std::exp(-lambda)));
  for (double x : {0.3, 1.0, 4.0, 15.0, 40.0}) {
    const double exact =
        std::exp(-lambda - x) * std::sqrt(lambda / x) * gsl_sf_bessel_I1(2.0 * std::sqrt(lambda * x));
    CHECK(f.continuous(x) == doctest::Approx(exact).epsilon(1e-4));
  }
  CHECK(f.log_density(0.0) == doctest::Approx(-lambda));
  std::size_t floored = 0;
  CHECK(f.log_density(-5.0, &floored) == kLogFloor);
  CHECK(floored == 1);
}

TEST_CASE("Gaussian likelihood") {
  LevyTriplet t;
  t.gaussian = 1.0;
  const LikelihoodDensity f(t, GridParams{-20.0, 20.0, 0.01});
  CHECK(f.atom() == 0.0);
  CHECK(f.log_density(1.0) == doctest::Approx(-0.5 - 0.5 * std::log(2 * M_PI)));
}

TEST_CASE("maximum likelihood for the compound Poisson intensity") {
  const ParametricFamily fam = cp_exponential_intensity(1.0);
  const double theta0 = 1.5;
  const std::vector<double> x = sample_id_distribution(fam.at({theta0}), 3000, 17);
  const FitResult r = fit_mle(x, fam, {{0.2, 4.0}});
  CHECK(r.converged);
  CHECK(r.theta_hat.front() == doctest::Approx(theta0).epsilon(0.1));
  CHECK(r.loglik >= log_likelihood({theta0}, x, fam) - 1e-9);
  CHECK_THROWS_AS(fit_mle({}, fam, {{0.2, 4.0}}), Error);
}

TEST_CASE("consistency hypotheses reject light tails") {
  try {
    check_consistency_hypotheses(cp_exponential_intensity(1.0), {1.0});
    FAIL("expected HypothesisCheckFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisCheckFailed);
  }
  const auto checks = check_consistency_hypotheses(cp_weibull_scale(), {1.0});
  CHECK(checks.is_object());
}

TEST_CASE("experiment output does not depend on the worker count") {
  ParametricFamily fam = cp_weibull_scale();
  fam.grid = {0.0, 300.0, 0.02};
  setenv("LEVYTAIL_THREADS", "1", 1);
  const ExperimentReport a = consistency_experiment(fam, {1.0}, {100, 200}, 3, 5, {{0.3, 3.0}});
  setenv("LEVYTAIL_THREADS", "3", 1);
  const ExperimentReport b = consistency_experiment(fam, {1.0}, {100, 200}, 3, 5, {{0.3, 3.0}});
  unsetenv("LEVYTAIL_THREADS");
  CHECK(a.rows.size() == 6);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json() == b.to_json());
  CHECK(a.summary.size() == 2);
}
