#include "levytail/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "levytail/errors.hpp"

namespace levytail {

namespace {

std::int64_t snap(double x, double dx) {
  const double k = x / dx;
  const double r = std::nearbyint(k);
  if (std::abs(k - r) > 1e-6 * std::max(1.0, std::abs(k))) {
    std::ostringstream os;
    os << "grid endpoint " << x << " is not a multiple of dx=" << dx;
    fail(ErrorCode::InvalidGrid, os.str());
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace

const char* to_string(TailKind kind) noexcept {
  switch (kind) {
    case TailKind::none: return "none";
    case TailKind::power_law: return "power_law";
    case TailKind::exponential: return "exponential";
  }
  return "none";
}

void GridParams::validate() const {
  if (!(dx > 0.0) || !std::isfinite(dx)) fail(ErrorCode::InvalidGrid, "dx must be positive");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max >= x_min))
    fail(ErrorCode::InvalidGrid, "grid requires finite x_min <= x_max");
  snap(x_min, dx);
  snap(x_max, dx);
}

std::int64_t GridParams::first_index() const {
  validate();
  return snap(x_min, dx);
}

std::int64_t GridParams::last_index() const {
  validate();
  return snap(x_max, dx);
}

std::size_t GridParams::size() const {
  return static_cast<std::size_t>(last_index() - first_index() + 1);
}

GridFunction::GridFunction(double dx, std::int64_t first_index, std::vector<double> values,
                           TailModel tail, double leakage)
    : dx_(dx), first_index_(first_index), values_(std::move(values)), tail_(tail), leakage_(leakage) {
  if (!(dx_ > 0.0) || !std::isfinite(dx_)) fail(ErrorCode::InvalidGrid, "dx must be positive");
  if (values_.empty()) fail(ErrorCode::InvalidGrid, "grid function needs at least one value");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorCode::InvalidInput, "grid function values must be finite and non-negative");
  }
  if (!(leakage_ >= 0.0)) leakage_ = 0.0;
}

GridFunction::GridFunction(const GridParams& grid, std::vector<double> values, TailModel tail,
                           double leakage)
    : GridFunction(grid.dx, grid.first_index(), std::move(values), tail, leakage) {
  if (values_.size() != grid.size()) fail(ErrorCode::InvalidGrid, "value count does not match grid");
}

GridFunction GridFunction::zeros(const GridParams& grid) {
  return GridFunction(grid, std::vector<double>(grid.size(), 0.0));
}

double GridFunction::at_index(std::int64_t k) const {
  const std::int64_t i = k - first_index_;
  if (i < 0 || i >= static_cast<std::int64_t>(values_.size())) return 0.0;
  return values_[static_cast<std::size_t>(i)];
}

double GridFunction::mass() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) * dx_;
}

double GridFunction::trapezoid_mass() const {
  if (values_.size() < 2) return 0.0;
  double s = std::accumulate(values_.begin(), values_.end(), 0.0);
  s -= 0.5 * (values_.front() + values_.back());
  return s * dx_;
}

double GridFunction::simpson_mass() const {
  const std::size_t n = values_.size();
  if (n < 3) return trapezoid_mass();
  // Simpson on an even number of intervals, 3/8 rule on a trailing triple.
  std::size_t intervals = n - 1;
  std::size_t simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
    s += values_[i] + 4.0 * values_[i + 1] + values_[i + 2];
  s *= dx_ / 3.0;
  if (simpson_end != intervals) {
    const std::size_t i = simpson_end;
    s += 3.0 * dx_ / 8.0 * (values_[i] + 3.0 * values_[i + 1] + 3.0 * values_[i + 2] + values_[i + 3]);
  }
  return s;
}

std::vector<double> GridFunction::cumulative() const {
  std::vector<double> out(values_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += values_[i] * dx_;
    out[i] = acc;
  }
  return out;
}

double GridFunction::operator()(double x) const {
  const double t = x / dx_ - static_cast<double>(first_index_);
  const double last = static_cast<double>(values_.size() - 1);
  if (t < -0.5) return 0.0;
  if (t <= 0.0) return values_.front();
  if (t >= last) {
    const double x_last = x_max();
    const double v = values_.back();
    if (t - last <= 0.5 && tail_.kind == TailKind::none) return v;
    switch (tail_.kind) {
      case TailKind::none: return 0.0;
      case TailKind::power_law:
        if (x_last <= 0.0) return 0.0;
        return v * std::pow(x / x_last, -tail_.parameter);
      case TailKind::exponential: return v * std::exp(-tail_.parameter * (x - x_last));
    }
    return 0.0;
  }
  const auto i = static_cast<std::size_t>(t);
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

std::optional<std::size_t> GridFunction::nearest_index(double x) const {
  const double t = std::nearbyint(x / dx_) - static_cast<double>(first_index_);
  if (t < 0.0 || t > static_cast<double>(values_.size() - 1)) return std::nullopt;
  return static_cast<std::size_t>(t);
}

GridFunction GridFunction::with_tail(TailModel tail) const {
  GridFunction out = *this;
  out.tail_ = tail;
  return out;
}

GridFunction GridFunction::with_leakage(double leakage) const {
  GridFunction out = *this;
  out.leakage_ = std::max(0.0, leakage);
  return out;
}

GridFunction GridFunction::scaled(double factor) const {
  if (!(factor >= 0.0)) fail(ErrorCode::InvalidInput, "scale factor must be non-negative");
  GridFunction out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

GridFunction GridFunction::restricted(std::int64_t first, std::int64_t last) const {
  if (last < first) fail(ErrorCode::InvalidGrid, "empty restriction");
  std::vector<double> v(static_cast<std::size_t>(last - first + 1), 0.0);
  double kept = 0.0;
  for (std::int64_t k = first; k <= last; ++k) {
    const double val = at_index(k);
    v[static_cast<std::size_t>(k - first)] = val;
    kept += val;
  }
  const double dropped = std::max(0.0, mass() - kept * dx_);
  return GridFunction(dx_, first, std::move(v), tail_, leakage_ + dropped);
}

GeneralizedDensity::GeneralizedDensity(double atom_, GridFunction cont_)
    : atom(atom_), cont(std::move(cont_)) {
  if (!(atom >= 0.0 && atom <= 1.0)) fail(ErrorCode::InvalidInput, "atom weight must lie in [0,1]");
}

double GeneralizedDensity::total_mass() const { return atom + q() * cont.mass(); }

bool same_spacing(double dx_a, double dx_b) {
  return std::abs(dx_a - dx_b) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(dx_a, dx_b);
}

}  // namespace levytail
