#include <doctest.h>

#include <cmath>
#include <functional>

#include "levytail/errors.hpp"
#include "levytail/grid.hpp"
#include "levytail/levy_model.hpp"

using namespace levytail;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("grid lattice indices") {
  const GridParams g{-0.3, 1.0, 0.1};
  CHECK(g.first_index() == -3);
  CHECK(g.last_index() == 10);
  CHECK(g.size() == 14);
  CHECK(code_of([] { GridParams{0.0, 1.004, 0.01}.validate(); }) == ErrorCode::InvalidGrid);
  CHECK(code_of([] { GridParams{1.0, 0.0, 0.1}.validate(); }) == ErrorCode::InvalidGrid);
  CHECK(code_of([] { GridParams{0.0, 1.0, -0.1}.validate(); }) == ErrorCode::InvalidGrid);
}

TEST_CASE("cell masses of the exponential are CDF differences") {
  const double dx = 0.05;
  const GridFunction g = discretize(JumpFamily(Exponential{2.0}), GridParams{0.0, 20.0, dx});
  for (std::size_t i : {1u, 7u, 100u, 399u}) {
    const double a = g.x(i) - dx / 2, b = g.x(i) + dx / 2;
    CHECK(g[i] * dx == doctest::Approx(std::exp(-2 * a) - std::exp(-2 * b)).epsilon(1e-12));
  }
  // the cell at 0 only carries [0, dx/2]
  CHECK(g[0] * dx == doctest::Approx(-std::expm1(-dx)).epsilon(1e-12));
  CHECK(g.mass() + g.leakage() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(g.leakage() == doctest::Approx(std::exp(-2 * 20.025)).epsilon(1e-6));
}

TEST_CASE("quadrature-based cell masses integrate to one") {
  const GridParams gp{-30.0, 200.0, 0.01};
  for (const JumpFamily& f : {JumpFamily(Weibull{0.5, 1.0}), JumpFamily(LogNormal{0.0, 1.0}),
                              JumpFamily(Normal{1.0, 2.0}), JumpFamily(Uniform{-1.0, 3.0})}) {
    const GridFunction g = discretize(f, gp);
    CHECK(g.mass() + g.leakage() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("survival, quantile and mass agree") {
  const JumpFamily p(Pareto{1.5, 1.0});
  CHECK(family_survival(p, 4.0) == doctest::Approx(std::pow(4.0, -1.5)));
  CHECK(family_mass_between(p, 2.0, 4.0) == doctest::Approx(std::pow(2.0, -1.5) - std::pow(4.0, -1.5)));
  const auto q = family_quantile(p, 0.75);
  REQUIRE(q);
  CHECK(family_survival(p, *q) == doctest::Approx(0.25));
  const JumpFamily w(Weibull{0.5, 2.0});
  CHECK(family_survival(w, 8.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("Levy integrability against closed forms") {
  // int_0^1 x^2 e^{-x} dx + int_1^inf e^{-x} dx = 2 - 4/e
  CHECK(levy_integrability_check({JumpFamily(Exponential{1.0}), 1.0}) ==
        doctest::Approx(2.0 - 4.0 / std::exp(1.0)).epsilon(1e-9));
  CHECK(levy_integrability_check({JumpFamily(Pareto{2.0, 1.0}), 1.0}) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(levy_integrability_check({JumpFamily(Exponential{1.0}), 3.0}) ==
        doctest::Approx(3.0 * (2.0 - 4.0 / std::exp(1.0))).epsilon(1e-9));
  const double raw = levy_integrability_check({JumpFamily(Semistable{1.5, 2.0, 0.05, 0.5, 0.0}), kInf});
  CHECK(std::isfinite(raw));
  CHECK(raw > 0.0);
}

TEST_CASE("divergent Levy measure is rejected") {
  const GridFunction t(1.0, 1, {1.0, 1.0}, TailModel::power_law(0.5));
  CHECK(code_of([&] { levy_integrability_check({JumpFamily(Tabulated{t}), 1.0}); }) ==
        ErrorCode::DivergentLevyMeasure);
}

TEST_CASE("invalid parameters") {
  CHECK(code_of([] { validate(JumpFamily(Pareto{-1.0, 1.0})); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { validate(JumpFamily(Weibull{0.5, 0.0})); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { validate(JumpFamily(Uniform{2.0, 1.0})); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { validate(JumpDensitySpec{JumpFamily(Exponential{1.0}), -1.0}); }) == ErrorCode::InvalidParams);
}

TEST_CASE("semistable density is log-periodic in x^{-gamma-1} scale") {
  const Semistable s;
  for (double x : {1.2, 1.7, 1.52, 2.9}) {
    const double r = family_density(s, s.b * x) / family_density(s, x);
    CHECK(r == doctest::Approx(std::pow(s.b, -s.gamma - 1.0)).epsilon(1e-10));
  }
  // the dip at x0 is the deepest point of a period
  CHECK(semistable_alpha(s, s.x0) < semistable_alpha(s, s.x0 + 3 * s.delta));
  CHECK(semistable_alpha(s, s.x0 + 0.4) == doctest::Approx(1.0));
}

TEST_CASE("normalize_g1 restricts to (1, inf)") {
  const G1 r = normalize_g1({JumpFamily(Pareto{2.0, 1.0}), 1.0}, GridParams{0.0, 400.0, 0.01});
  CHECK(r.tail_mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.g1.mass() + r.g1.leakage() == doctest::Approx(1.0).epsilon(1e-9));
  const G1 e = normalize_g1({JumpFamily(Exponential{1.0}), 2.0}, GridParams{0.0, 60.0, 0.01});
  CHECK(e.tail_mass == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-9));
  CHECK(e.g1(0.5) == 0.0);
  CHECK(e.g1(3.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-3));
}

TEST_CASE("two-sided mixture reflects the left component") {
  const JumpFamily m(TwoSidedMixture{std::make_shared<const JumpFamily>(Exponential{1.0}),
                                     std::make_shared<const JumpFamily>(Pareto{1.5, 1.0}), 0.25});
  CHECK(family_density(m, -2.0) == doctest::Approx(0.25 * std::exp(-2.0)));
  CHECK(family_density(m, 2.0) == doctest::Approx(0.75 * 1.5 * std::pow(2.0, -2.5)));
  CHECK(family_mass_between(m, -kInf, 0.0) == doctest::Approx(0.25));
}
