#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace levytail {

// Extent of a uniform grid. Nodes sit on the lattice dx*Z; x_min and x_max
// must be multiples of dx up to round-off (InvalidGrid otherwise).
struct GridParams {
  double x_min = 0.0;
  double x_max = 0.0;
  double dx = 0.0;

  std::int64_t first_index() const;
  std::int64_t last_index() const;
  std::size_t size() const;
  void validate() const;
};

enum class TailKind { none, power_law, exponential };

// How a grid function is continued to the right of its last node.
// power_law: f(x) ~ x^{-parameter}; exponential: f(x) ~ exp(-parameter x).
struct TailModel {
  TailKind kind = TailKind::none;
  double parameter = 0.0;

  static TailModel none() { return {}; }
  static TailModel power_law(double exponent) { return {TailKind::power_law, exponent}; }
  static TailModel exponential(double rate) { return {TailKind::exponential, rate}; }
};

const char* to_string(TailKind kind) noexcept;

// Non-negative function on the lattice x_i = (first_index + i) * dx.
//
// values[i] is the average of the underlying density over the node-centred
// cell [x_i - dx/2, x_i + dx/2], so values[i]*dx is the exact cell mass and
// discrete convolution of two grid functions is the convolution of the
// corresponding lattice measures. leakage is the mass known to lie outside
// the grid (for probability densities).
class GridFunction {
 public:
  GridFunction(double dx, std::int64_t first_index, std::vector<double> values,
               TailModel tail = {}, double leakage = 0.0);
  GridFunction(const GridParams& grid, std::vector<double> values, TailModel tail = {},
               double leakage = 0.0);

  static GridFunction zeros(const GridParams& grid);

  double dx() const { return dx_; }
  std::int64_t first_index() const { return first_index_; }
  std::int64_t last_index() const { return first_index_ + static_cast<std::int64_t>(values_.size()) - 1; }
  std::size_t size() const { return values_.size(); }
  double x(std::size_t i) const { return static_cast<double>(first_index_ + static_cast<std::int64_t>(i)) * dx_; }
  double x_min() const { return x(0); }
  double x_max() const { return x(values_.size() - 1); }
  GridParams params() const { return {x_min(), x_max(), dx_}; }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  // Value at lattice index k (global), zero outside the stored range.
  double at_index(std::int64_t k) const;

  const TailModel& tail() const { return tail_; }
  double leakage() const { return leakage_; }

  // Sum of cell masses.
  double mass() const;
  double trapezoid_mass() const;
  double simpson_mass() const;
  // cumulative()[i] = mass of cells 0..i, i.e. the CDF at x_i + dx/2.
  std::vector<double> cumulative() const;

  // Linear interpolation between nodes; declared tail beyond the last node;
  // zero left of the first cell.
  double operator()(double x) const;
  // Index of the node nearest to x, if x lies within the grid cells.
  std::optional<std::size_t> nearest_index(double x) const;

  GridFunction with_tail(TailModel tail) const;
  GridFunction with_leakage(double leakage) const;
  GridFunction scaled(double factor) const;
  // Restriction (or zero extension) to the lattice range [first, last].
  GridFunction restricted(std::int64_t first, std::int64_t last) const;

 private:
  double dx_;
  std::int64_t first_index_;
  std::vector<double> values_;
  TailModel tail_;
  double leakage_;
};

// Atom of weight p at the origin plus (1-p) times a proper density.
struct GeneralizedDensity {
  double atom = 0.0;
  GridFunction cont;

  GeneralizedDensity(double atom, GridFunction cont);

  double q() const { return 1.0 - atom; }
  // atom + q * (grid mass of cont)
  double total_mass() const;
  // Continuous part of the generalized density at node i: q * cont[i].
  double continuous_value(std::size_t i) const { return q() * cont[i]; }
};

bool same_spacing(double dx_a, double dx_b);

}  // namespace levytail
