#include <doctest.h>

#include <cmath>

#include "levytail/convolution.hpp"
#include "levytail/counterexample.hpp"
#include "levytail/diagnostics.hpp"
#include "levytail/errors.hpp"
#include "levytail/levy_model.hpp"

using namespace levytail;

namespace {

const GridFunction& pareto() {
  static const GridFunction g = discretize(JumpFamily(Pareto{1.5, 1.0}), GridParams{0.0, 1000.0, 0.01});
  return g;
}

const GridFunction& exponential() {
  static const GridFunction g = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 200.0, 0.01});
  return g;
}

}  // namespace

TEST_CASE("long tail") {
  const Diagnosis p = long_tail_check(pareto());
  CHECK(p.verdict.outcome == Outcome::pass);
  CHECK(p.verdict.target == 1.0);
  CHECK(p.curves.size() == 3);
  const Diagnosis e = long_tail_check(exponential(), {1.0});
  CHECK(e.verdict.outcome == Outcome::fail);
  // f(x+1)/f(x) = e^{-1} exactly for the exponential cell averages
  CHECK(e.verdict.limit_estimate == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("subexponential ratio") {
  const Diagnosis p = subexp_check(GeneralizedDensity(0.0, pareto()));
  CHECK(p.verdict.outcome == Outcome::pass);
  CHECK(p.verdict.limit_estimate == doctest::Approx(2.0).epsilon(0.05));
  const Diagnosis e = subexp_check(GeneralizedDensity(0.0, exponential()));
  CHECK(e.verdict.outcome == Outcome::fail);
  // (f*f)(x)/f(x) = x for the exponential
  CHECK(e.verdict.limit_estimate > 50.0);
}

TEST_CASE("subexponential check handles an atom") {
  // a p delta_0 + q f: (f*f)(x) ratio becomes 2a + q(f*f)/f -> 2a + 2q = 2
  const Diagnosis d = subexp_check(GeneralizedDensity(0.4, pareto()));
  CHECK(d.verdict.limit_estimate == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("positive-part subexponentiality") {
  const GridFunction mix =
      discretize(JumpFamily(TwoSidedMixture{std::make_shared<const JumpFamily>(Exponential{1.0}),
                                            std::make_shared<const JumpFamily>(Pareto{1.5, 1.0}), 0.5}),
                 GridParams{-50.0, 1000.0, 0.01});
  CHECK(subexp_plus_check(GeneralizedDensity(0.0, mix)).verdict.outcome == Outcome::pass);
  const GridFunction left = discretize(JumpFamily(Uniform{-5.0, -1.0}), GridParams{-10.0, 10.0, 0.01});
  try {
    subexp_plus_check(GeneralizedDensity(0.0, left));
    FAIL("expected ZeroPositiveMass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPositiveMass);
  }
}

TEST_CASE("ani and ald") {
  CHECK(ani_check(pareto()).verdict.outcome == Outcome::pass);
  CHECK(ald_check(pareto()).verdict.outcome == Outcome::pass);
  const SemistableParams p = desk_preset();
  const GridFunction gplus = discretize(build_positive_levy(p).family, GridParams{0.0, p.x0 * 1024.0, 0.01});
  CHECK(ani_check(gplus).verdict.outcome == Outcome::fail);
}

TEST_CASE("convolution roots and tail equivalence") {
  for (int n : {2, 3}) {
    const Diagnosis d = convolution_root_ratio(GeneralizedDensity(0.0, pareto()), n);
    CHECK(d.verdict.limit_estimate == doctest::Approx(n).epsilon(0.05));
  }
  CHECK(convolution_root_ratio(GeneralizedDensity(0.0, pareto()), 1).verdict.outcome == Outcome::pass);
  CHECK_THROWS_AS(convolution_root_ratio(GeneralizedDensity(0.0, pareto()), 9), Error);
  const double lambda = 1.0;
  const GeneralizedDensity f = compound_poisson_density(lambda, pareto());
  const Diagnosis t = tail_equivalence(f.cont, pareto(), lambda / -std::expm1(-lambda));
  CHECK(t.verdict.outcome == Outcome::pass);
}

TEST_CASE("Steutel ratio") {
  CHECK(steutel_ratio(0.5, pareto(), 0.5).verdict.limit_estimate == doctest::Approx(0.5).epsilon(0.1));
  CHECK(steutel_ratio(0.5, pareto(), 1.0).verdict.limit_estimate == doctest::Approx(1.0).epsilon(1e-9));
  try {
    steutel_ratio(0.7, pareto(), 0.5);
    FAIL("expected HypothesisViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HypothesisViolated);
  }
}

TEST_CASE("local interval masses") {
  const GridFunction p2 = discretize(JumpFamily(Pareto{2.0, 1.0}), GridParams{0.0, 1000.0, 0.01});
  const LocalMassCurves l = local_interval_mass(p2, 1.0);
  CHECK(l.mass_over_density.limit_estimate == doctest::Approx(1.0).epsilon(0.01));
  CHECK(l.long_tail.limit_estimate == doctest::Approx(1.0).epsilon(0.01));
  const LocalMassCurves e = local_interval_mass(exponential(), 1.0);
  CHECK(e.mass_over_density.limit_estimate == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("insensitivity scale grows for power tails") {
  const RatioCurve c = insensitivity_scale(discretize(JumpFamily(Pareto{2.0, 1.0}), GridParams{0.0, 1000.0, 0.01}));
  REQUIRE(c.ratios.size() > 2);
  CHECK(c.ratios.back() > c.ratios.front());
}

TEST_CASE("window underflow and serialization") {
  const GridFunction short_grid = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 0.5, 0.01});
  CHECK_THROWS_AS(long_tail_check(short_grid), Error);
  const auto j = to_json(long_tail_check(pareto(), {1.0}));
  for (const char* k : {"property", "outcome", "limit_estimate", "target", "rel_error", "window", "curve"})
    CHECK(j.contains(k));
  CHECK(j["outcome"] == "pass");
}
