#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "levytail/grid.hpp"

namespace levytail {

struct ConvolveOptions {
  // Lattice index range [first, last] of the output; mass falling outside
  // is added to the leakage.
  std::optional<std::pair<std::int64_t, std::int64_t>> window;
  // Total mass of negative FFT round-off that may be clamped to zero.
  double clamp_limit = 1e-9;
};

GeneralizedDensity convolve(const GeneralizedDensity& f, const GeneralizedDensity& g,
                            const ConvolveOptions& options = {});

// f^{*n} by repeated squaring. One-sided inputs (cont supported on x >= 0)
// keep the input lattice range; otherwise the full range n*[first, last].
GeneralizedDensity nfold(const GeneralizedDensity& f, int n, const ConvolveOptions& options = {});

// Lattice convolution (f * g)(x_k) evaluated by direct summation; accurate in
// relative terms far into the tail where FFT round-off dominates.
double convolution_at(const GridFunction& f, const GridFunction& g, std::int64_t k);

struct SeriesTruncation {
  int n_max = 1;
  double tail_bound = 0.0;
};

constexpr int kSeriesCap = 200;
constexpr double kSeriesTol = 1e-12;

// Smallest N whose discarded Poisson weight sum_{n>N} lambda^n/n!, relative to
// e^lambda - 1, is below tol.
SeriesTruncation poisson_truncation(double lambda, double tol = kSeriesTol, int cap = kSeriesCap);
// Smallest N with sum_{n>N} r^n/(n lambda) below tol, r = e^lambda - 1.
SeriesTruncation log_series_truncation(double lambda, double tol = kSeriesTol, int cap = kSeriesCap);

// e^{-lambda} delta_0 + (1 - e^{-lambda}) f with
// f = (e^lambda - 1)^{-1} sum_{n=1}^{N} lambda^n/n! g^{*n}.
GeneralizedDensity compound_poisson_density(double lambda, const GridFunction& g, const SeriesTruncation& trunc,
                                            double tol = kSeriesTol);
GeneralizedDensity compound_poisson_density(double lambda, const GridFunction& g);

struct RecoveryResult {
  GridFunction density;
  // Series sum before negative values were clamped to zero.
  std::vector<double> signed_values;
  double clamped_mass = 0.0;
  int terms = 0;
  // The series was summed in closed form (log of the transform) because the
  // term count needed exceeded the cap.
  bool closed_form = false;
};

// Inverts the compound Poisson map: g = -(1/lambda) sum n^{-1} (1 - e^lambda)^n f1^{*n}.
RecoveryResult recover_jump_density(const GridFunction& f1, double lambda, double tol = kSeriesTol);

struct KestenPoint {
  int n;
  double sup_ratio;
  std::size_t excluded;
};

// Tail window used for sup ratios: the last 20% (in log x) of
// [max(1, first positive node), x_max].
std::pair<std::size_t, std::size_t> tail_window(const GridFunction& f, double fraction = 0.2);

std::vector<KestenPoint> kesten_bound_profile(const GridFunction& f, double eps, int n_max);
// f^{*n}(x) / ((1+eps)^n f(x)) along the tail window.
std::vector<std::pair<double, double>> kesten_ratio_curve(const GridFunction& f, double eps, int n);

}  // namespace levytail
