#include <doctest.h>

#include <gsl/gsl_sf_bessel.h>

#include <cmath>

#include "levytail/convolution.hpp"
#include "levytail/errors.hpp"
#include "levytail/levy_model.hpp"

using namespace levytail;

namespace {

double direct(const GridFunction& f, const GridFunction& g, std::int64_t k) {
  double s = 0.0;
  for (std::int64_t i = f.first_index(); i <= f.last_index(); ++i) s += f.at_index(i) * g.at_index(k - i);
  return s * f.dx();
}

// Continuous part of the compound Poisson law with Exp(1) jumps at rate lambda.
double cp_exponential(double lambda, double x) {
  return std::exp(-lambda - x) * std::sqrt(lambda / x) * gsl_sf_bessel_I1(2.0 * std::sqrt(lambda * x));
}

}  // namespace

TEST_CASE("FFT convolution matches direct lattice sums") {
  const GridFunction a = discretize(JumpFamily(Weibull{0.7, 1.0}), GridParams{0.0, 30.0, 0.05});
  const GridFunction b = discretize(JumpFamily(Normal{2.0, 1.0}), GridParams{-10.0, 15.0, 0.05});
  const GeneralizedDensity c = convolve(GeneralizedDensity(0.0, a), GeneralizedDensity(0.0, b));
  for (std::int64_t k : {-150, -20, 0, 40, 333, 700}) {
    const auto i = static_cast<std::size_t>(k - c.cont.first_index());
    CHECK(std::abs(c.cont[i] - direct(a, b, k)) < 1e-13);
    CHECK(convolution_at(a, b, k) == doctest::Approx(direct(a, b, k)).epsilon(1e-12));
  }
}

TEST_CASE("convolution multiplies total mass and atoms") {
  const GridFunction a = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 50.0, 0.01});
  const GeneralizedDensity f(0.3, a), g(0.6, a);
  const GeneralizedDensity h = convolve(f, g);
  CHECK(h.atom == doctest::Approx(0.18));
  CHECK(h.total_mass() + h.q() * h.cont.leakage() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exponential self-convolution approaches the gamma density") {
  const double dx = 0.005;
  const GridFunction e = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 40.0, dx});
  const GeneralizedDensity two = nfold(GeneralizedDensity(0.0, e), 2);
  for (double x : {0.5, 1.0, 3.0, 10.0}) {
    const auto i = *two.cont.nearest_index(x);
    CHECK(two.cont[i] == doctest::Approx(x * std::exp(-x)).epsilon(1e-4));
  }
}

TEST_CASE("compound Poisson series against the Bessel closed form") {
  const double dx = 0.002;
  const GridFunction g = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 60.0, dx});
  for (double lambda : {0.3, 1.0, 2.5}) {
    const GeneralizedDensity f = compound_poisson_density(lambda, g);
    CHECK(f.atom == doctest::Approx(std::exp(-lambda)).epsilon(1e-14));
    for (double x : {0.5, 2.0, 7.0, 20.0}) {
      const auto i = *f.cont.nearest_index(x);
      CHECK(f.continuous_value(i) == doctest::Approx(cp_exponential(lambda, x)).epsilon(1e-4));
    }
  }
}

TEST_CASE("Poisson truncation bounds") {
  const SeriesTruncation t = poisson_truncation(1.0, 1e-12);
  CHECK(t.tail_bound <= 1e-12);
  const SeriesTruncation t1 = poisson_truncation(1.0, 1e-12, t.n_max - 1 > 0 ? t.n_max : 1);
  CHECK(t1.n_max == t.n_max);
  CHECK(poisson_truncation(5.0).n_max > poisson_truncation(0.5).n_max);
  CHECK_THROWS_AS(poisson_truncation(100.0, 1e-12, 20), Error);
}

TEST_CASE("inverse series recovers the jump density") {
  const GridFunction g = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 60.0, 0.01});
  for (double lambda : {0.2, 0.6, 0.69}) {
    const RecoveryResult r = recover_jump_density(compound_poisson_density(lambda, g).cont, lambda);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(r.density[i] - g[i]));
    CHECK(e < 1e-9);
  }
  try {
    recover_jump_density(g, std::log(2.0));
    FAIL("expected SeriesDiverges");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeriesDiverges);
  }
}

TEST_CASE("Kesten profile stays bounded on a Pareto density") {
  const GridFunction p = discretize(JumpFamily(Pareto{2.0, 1.0}), GridParams{0.0, 500.0, 0.02});
  const auto prof = kesten_bound_profile(p, 0.1, 6);
  REQUIRE(prof.size() == 6);
  CHECK(prof[0].sup_ratio == doctest::Approx(1.0 / 1.1));
  for (const auto& k : prof) CHECK(k.sup_ratio < 10.0);
  // f^{*n}/f -> n for subexponential f
  CHECK(prof[1].sup_ratio * 1.1 * 1.1 > 1.5);
}

TEST_CASE("tail window covers the last fifth in log scale") {
  const GridFunction p = discretize(JumpFamily(Pareto{2.0, 1.0}), GridParams{0.0, 1000.0, 0.1});
  const auto [lo, hi] = tail_window(p);
  CHECK(hi == p.size() - 1);
  CHECK(p.x(lo) == doctest::Approx(std::pow(1000.0, 0.8)).epsilon(1e-3));
  const GridFunction z = GridFunction::zeros(GridParams{0.0, 10.0, 0.1});
  CHECK_THROWS_AS(tail_window(z), Error);
}
