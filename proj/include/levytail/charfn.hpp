#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "levytail/grid.hpp"
#include "levytail/levy_model.hpp"

namespace levytail {

using Complex = std::complex<double>;
using CfFunction = std::function<Complex(double)>;

// Characteristic function sampled on z_k = k*dz, k = k_first .. k_first+n-1.
// periodic marks the exact transform of a lattice measure, which repeats with
// period 2*pi/dx in z; the samples then cover one full period.
struct CfSamples {
  double dz = 0.0;
  std::int64_t k_first = 0;
  std::vector<Complex> values;
  std::vector<double> phase_unwrapped;
  bool periodic = false;

  std::size_t size() const { return values.size(); }
  double z(std::size_t i) const { return static_cast<double>(k_first + static_cast<std::int64_t>(i)) * dz; }
  // Index of z = 0.
  std::size_t origin() const { return static_cast<std::size_t>(-k_first); }
};

// Levy-Khintchine exponent psi(z) with mu^(z) = exp(psi(z)).
Complex levy_khintchine_exponent(const LevyTriplet& triplet, double z);
// Same integral over (0, inf) only, with a = b = 0.
Complex spectrally_positive_exponent(const LevyTriplet& triplet, double z);

// Samples on the symmetric grid k = -K..K.
CfSamples levy_khintchine_cf(const LevyTriplet& triplet, double dz, std::int64_t K);
CfSamples spectrally_positive_cf(const LevyTriplet& triplet, double dz, std::int64_t K);
CfSamples sample_cf(const CfFunction& cf, double dz, std::int64_t K);

// Exact transform of the lattice measure atom*delta_0 + q*cont, zero-padded
// to padding times its extent (rounded up to a power of two).
CfSamples dft_cf(const GeneralizedDensity& f, int padding = 8);

// Continuous phase anchored at 0 at z = 0. Throws ZeroCrossing when
// |values| < 1e-14 and PhaseStepTooLarge when consecutive samples differ in
// argument by pi/2 or more.
std::vector<double> unwrap_phase(const CfSamples& cf);

// mu^(z)^alpha via the unwrapped phase.
CfSamples cf_power(const CfSamples& cf, double alpha);

struct InversionResult {
  GridFunction density;
  double clamped_mass = 0.0;
  // max |mu^(z) - atom| over the outermost samples.
  double edge_modulus = 0.0;
  // Mass of the unclamped inversion on the grid.
  double mass = 0.0;
};

constexpr double kEdgeTol = 1e-12;

// Density of the absolutely continuous part, (2 pi)^{-1} int e^{-izx}
// (mu^(z) - atom) dz, on the grid. For sampled continuous transforms the
// output holds node values; for periodic lattice transforms it holds the
// exact cell averages. 2*pi/(dz*dx) must be an integer at least as large as
// the number of grid nodes.
InversionResult invert_cf_to_density(const CfSamples& cf, const GridParams& grid, double atom = 0.0,
                                     double edge_tol = kEdgeTol);
// Evaluates cf on a frequency window that doubles from 64 samples until the
// edge modulus drops below edge_tol. dz is chosen so that the period
// 2*pi/dz is the grid width rounded up to a power-of-two multiple of dx.
InversionResult invert_cf_to_density(const CfFunction& cf, const GridParams& grid, double atom = 0.0,
                                     double edge_tol = kEdgeTol, std::int64_t max_samples = std::int64_t{1} << 26);

// e^{gamma x} f(x) / C on the same grid. Cell averages are corrected with a
// log-linear profile inside each cell; a support edge is detected as the first
// positive cell after a zero cell. TiltDiverges for gamma > 0 on power-law
// tails with leakage, or gamma >= rate on exponential tails.
GridFunction exponential_tilt(const GridFunction& f, double gamma);

}  // namespace levytail
