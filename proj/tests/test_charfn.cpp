#include <doctest.h>

#include <cmath>
#include <complex>

#include "levytail/charfn.hpp"
#include "levytail/convolution.hpp"
#include "levytail/errors.hpp"
#include "levytail/levy_model.hpp"

using namespace levytail;

TEST_CASE("Levy-Khintchine exponent of compound Poisson exponential jumps") {
  // With truncation at |x| <= 1 the exponent is 1/(1-iz) - 1 - i z int_0^1 x e^{-x} dx.
  LevyTriplet t;
  t.jumps = {JumpFamily(Exponential{1.0}), 1.0};
  t.drift = 1.0 - 2.0 / std::exp(1.0);
  for (double z : {-1.0, 0.01, 1.0, 30.0, 500.0}) {
    const Complex psi = levy_khintchine_exponent(t, z);
    const Complex exact = 1.0 / Complex(1.0, -z) - 1.0;
    CHECK(std::abs(psi - exact) < 1e-10);
  }
}

TEST_CASE("Gaussian part and drift") {
  LevyTriplet t;
  t.gaussian = 2.0;
  t.drift = 0.5;
  const Complex psi = levy_khintchine_exponent(t, 3.0);
  CHECK(psi.real() == doctest::Approx(-18.0));
  CHECK(psi.imag() == doctest::Approx(1.5));
  CHECK(levy_khintchine_exponent(t, 0.0) == Complex(0.0, 0.0));
}

TEST_CASE("exponent conjugate symmetry and Pareto exponent sign") {
  LevyTriplet t;
  t.jumps = {JumpFamily(Pareto{1.5, 1.0}), 1.0};
  for (double z : {0.1, 1.0, 100.0}) {
    const Complex a = levy_khintchine_exponent(t, z), b = levy_khintchine_exponent(t, -z);
    CHECK(std::abs(a - std::conj(b)) < 1e-12);
    CHECK(a.real() <= 0.0);
  }
}

TEST_CASE("DFT of a lattice measure equals the direct sum") {
  const GridFunction g = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 30.0, 0.05});
  const GeneralizedDensity f(0.2, g);
  const CfSamples cf = dft_cf(f);
  CHECK(cf.periodic);
  for (std::size_t j : {cf.origin(), cf.origin() + 3, cf.origin() + 97, cf.origin() - 11}) {
    const double z = cf.z(j);
    Complex s = 0.2;
    for (std::size_t i = 0; i < g.size(); ++i) s += 0.8 * g[i] * g.dx() * std::exp(Complex(0.0, z * g.x(i)));
    CHECK(std::abs(cf.values[j] - s) < 1e-12);
  }
  CHECK(std::abs(cf.values[cf.origin()] - 1.0) < 1e-9);
}

TEST_CASE("Gaussian and gamma inversion") {
  const InversionResult n =
      invert_cf_to_density([](double z) { return Complex(std::exp(-0.5 * z * z), 0.0); }, GridParams{-8.0, 8.0, 0.01});
  for (std::size_t i = 0; i < n.density.size(); i += 37) {
    const double x = n.density.x(i);
    CHECK(std::abs(n.density[i] - std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI)) < 1e-12);
  }
  CHECK(n.edge_modulus < kEdgeTol);
  const InversionResult g = invert_cf_to_density(
      [](double z) {
        const Complex d(1.0, -z);
        return 1.0 / (d * d);
      },
      GridParams{0.0, 40.0, 0.01});
  const double dx = 0.01;
  CHECK(g.mass == doctest::Approx(1.0 - dx * dx / 12.0).epsilon(1e-6));
  CHECK(g.density(2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("fractional powers form a semigroup") {
  const GridFunction g = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 60.0, 0.01});
  const double lambda = 0.5;
  const GeneralizedDensity f = compound_poisson_density(lambda, g);
  const InversionResult half =
      invert_cf_to_density(cf_power(dft_cf(f), 0.5), f.cont.params(), std::exp(-lambda / 2));
  const GeneralizedDensity fh = compound_poisson_density(lambda / 2, g);
  for (std::size_t i = 0; i < fh.cont.size(); i += 101)
    CHECK(std::abs(half.density[i] - fh.continuous_value(i)) < 1e-12);
  const CfSamples one = cf_power(dft_cf(f), 1.0);
  const CfSamples base = dft_cf(f);
  for (std::size_t j = 0; j < one.size(); j += 999) CHECK(std::abs(one.values[j] - base.values[j]) < 1e-13);
}

TEST_CASE("phase unwrapping is continuous") {
  LevyTriplet t;
  t.drift = 3.0;
  t.gaussian = 0.01;
  const CfSamples s = sample_cf([&](double z) { return std::exp(levy_khintchine_exponent(t, z)); }, 0.01, 2000);
  const std::vector<double> ph = unwrap_phase(s);
  for (std::size_t i = 0; i < ph.size(); i += 250) CHECK(ph[i] == doctest::Approx(3.0 * s.z(i)).scale(1e-9));
}

TEST_CASE("exponential tilt of an exponential density") {
  const GridFunction e1 = discretize(JumpFamily(Exponential{1.0}), GridParams{-1.0, 40.0, 0.01});
  const GridFunction e2 = discretize(JumpFamily(Exponential{0.5}), GridParams{-1.0, 40.0, 0.01});
  const GridFunction t = exponential_tilt(e1.with_tail(TailModel::exponential(1.0)), 0.5);
  for (std::size_t i = 0; i < t.size(); i += 97)
    CHECK(t[i] == doctest::Approx(e2[i]).epsilon(1e-9).scale(1e-15));
  CHECK_THROWS_AS(exponential_tilt(e1.with_tail(TailModel::exponential(1.0)), 1.5), Error);
}
