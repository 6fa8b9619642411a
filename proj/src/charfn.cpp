#include "levytail/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "levytail/errors.hpp"
#include "quadrature.hpp"

namespace levytail {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr detail::QuadratureTolerance kCfTol{1e-15, 1e-12};

// One side of the jump integral: nu restricted to (0, inf), optionally the
// reflection of the negative half.
struct Side {
  const JumpDensitySpec& spec;
  bool reflect;

  double nu(double y) const { return levy_density(spec, reflect ? -y : y); }

  std::vector<double> breaks(double a, double b) const {
    if (!reflect) return family_breakpoints(spec.family, a, b);
    std::vector<double> out;
    for (double x : family_breakpoints(spec.family, -b, -a)) out.push_back(-x);
    std::sort(out.begin(), out.end());
    return out;
  }

  double mass_between(double a, double b) const {
    const double m = reflect ? family_mass_between(spec.family, -b, -a) : family_mass_between(spec.family, a, b);
    return spec.infinite_activity() ? m : spec.total_mass * m;
  }

  double integral(const detail::Integrand& h, double a, double b) const {
    return detail::integrate(h, a, b, breaks(a, b), kCfTol);
  }

  // int_a^b nu(y) cos(z y) dy or sin(z y).
  double oscillatory(double a, double b, double z, bool sine) const {
    auto br = breaks(a, b);
    if (z * (b - a) < 40.0) {
      auto h = [&](double y) { return nu(y) * (sine ? std::sin(z * y) : std::cos(z * y)); };
      return detail::integrate(h, a, b, br, kCfTol);
    }
    br.insert(br.begin(), a);
    br.push_back(b);
    double s = 0.0;
    auto f = [&](double y) { return nu(y); };
    for (std::size_t i = 0; i + 1 < br.size(); ++i)
      s += detail::integrate_oscillatory(f, br[i], br[i + 1], z, sine, kCfTol);
    return s;
  }
};

// int_0^inf (e^{izy} - 1 - izy 1{y <= 1}) nu(y) dy for z > 0.
Complex side_integral(const Side& side, double z) {
  const double eta = std::min(1.0, 0.1 / z);
  double re = 0.0, im = 0.0;

  // (0, eta]: Taylor form sum_{k=2}^{10} (iz y)^k / k!, integrated over dyadic
  // pieces towards zero.
  {
    auto taylor = [z](double y, bool imag) {
      const double t = z * y;
      double term = 1.0, s = 0.0;
      for (int k = 1; k <= 10; ++k) {
        term *= t / k;
        if (k < 2) continue;
        // i^k: k % 4 == 0 -> 1, 1 -> i, 2 -> -1, 3 -> -i
        const int m = k % 4;
        if (!imag && (m == 0 || m == 2)) s += (m == 0 ? term : -term);
        if (imag && (m == 1 || m == 3)) s += (m == 1 ? term : -term);
      }
      return s;
    };
    double hi = eta;
    int small = 0;
    for (int j = 0; j < 400; ++j) {
      const double lo = 0.5 * hi;
      const double pr = side.integral([&](double y) { return taylor(y, false) * side.nu(y); }, lo, hi);
      const double pi = side.integral([&](double y) { return taylor(y, true) * side.nu(y); }, lo, hi);
      re += pr;
      im += pi;
      const double mag = std::abs(pr) + std::abs(pi);
      const double tot = std::abs(re) + std::abs(im);
      if (tot > 0.0 && mag <= 1e-17 * tot) {
        if (++small >= 3) break;
      } else {
        small = 0;
      }
      if (tot == 0.0 && !side.spec.infinite_activity() && !(side.mass_between(0.0, lo) > 0.0)) break;
      hi = lo;
    }
  }

  // (eta, 1]
  if (eta < 1.0) {
    if (z * (1.0 - eta) < 40.0) {
      re += side.integral([&](double y) {
        const double s = std::sin(0.5 * z * y);
        return -2.0 * s * s * side.nu(y);
      }, eta, 1.0);
      im += side.integral([&](double y) { return (std::sin(z * y) - z * y) * side.nu(y); }, eta, 1.0);
    } else {
      re += side.oscillatory(eta, 1.0, z, false) - side.mass_between(eta, 1.0);
      im += side.oscillatory(eta, 1.0, z, true) - z * side.integral([&](double y) { return y * side.nu(y); }, eta, 1.0);
    }
  }

  // (1, inf): finite stretch up to the last isolated break point, then QAWF.
  {
    const double tail_mass = side.mass_between(1.0, kInf);
    if (tail_mass > 0.0) {
      double b = 1.0;
      auto br = side.breaks(1.0, 1e6);
      if (!br.empty() && br.size() < 64) b = br.back();
      double c = 0.0, s = 0.0;
      if (b > 1.0) {
        c += side.oscillatory(1.0, b, z, false);
        s += side.oscillatory(1.0, b, z, true);
      }
      auto f = [&](double y) { return side.nu(y); };
      c += detail::integrate_fourier_tail(f, b, z, false, kCfTol);
      s += detail::integrate_fourier_tail(f, b, z, true, kCfTol);
      re += c - tail_mass;
      im += s;
    }
  }
  return {re, im};
}

Complex jump_exponent(const JumpDensitySpec& spec, double z, bool positive_only) {
  if (z == 0.0 || spec.family.get_if<NoJumps>() || spec.total_mass == 0.0) return {0.0, 0.0};
  const double w = std::abs(z);
  Complex total = side_integral(Side{spec, false}, w);
  if (!positive_only) total += std::conj(side_integral(Side{spec, true}, w));
  return z < 0.0 ? std::conj(total) : total;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

// Folds samples c_k = (phi(z_k) - atom) e^{-i z_k x_first} into M bins and
// transforms them to node values on the grid.
class Folder {
 public:
  Folder(std::int64_t m, std::int64_t first) : m_(m), first_(first), bins_(static_cast<std::size_t>(m)) {}

  void add(std::int64_t k, Complex value) {
    const std::int64_t ph = positive_mod(positive_mod(k, m_) * positive_mod(first_, m_), m_);
    const double angle = -kTwoPi * static_cast<double>(ph) / static_cast<double>(m_);
    bins_[static_cast<std::size_t>(positive_mod(k, m_))] += value * Complex(std::cos(angle), std::sin(angle));
  }

  std::vector<double> finish(double dz, std::size_t n) {
    detail::complex_dft(bins_, -1);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = bins_[j].real() * dz / kTwoPi;
    return out;
  }

 private:
  std::int64_t m_;
  std::int64_t first_;
  std::vector<Complex> bins_;
};

std::int64_t period_bins(double dz, double dx) {
  const double m = kTwoPi / (dz * dx);
  const double r = std::nearbyint(m);
  if (!(r >= 1.0) || std::abs(m - r) > 1e-6 * r) {
    std::ostringstream os;
    os << "frequency step " << dz << " and grid step " << dx << " do not share a common period";
    fail(ErrorCode::IncompatibleGrids, os.str());
  }
  return static_cast<std::int64_t>(r);
}

InversionResult finish_inversion(std::vector<double> values, const GridParams& grid, double edge) {
  const double dx = grid.dx;
  double mass = 0.0, clamped = 0.0;
  for (double& v : values) {
    mass += v * dx;
    if (v < 0.0 || !std::isfinite(v)) {
      if (std::isfinite(v)) clamped += -v * dx;
      v = 0.0;
    }
  }
  InversionResult r{GridFunction(grid, std::move(values)), clamped, edge, mass};
  return r;
}

void check_edge(double edge, double tol) {
  if (edge > tol) {
    std::ostringstream os;
    os << "characteristic function modulus " << edge << " at the frequency window edge exceeds " << tol;
    fail(ErrorCode::NotAbsolutelyIntegrable, os.str());
  }
}

}  // namespace

Complex levy_khintchine_exponent(const LevyTriplet& triplet, double z) {
  const double b = triplet.gaussian;
  return Complex(-0.5 * b * b * z * z, triplet.drift * z) + jump_exponent(triplet.jumps, z, false);
}

Complex spectrally_positive_exponent(const LevyTriplet& triplet, double z) {
  return jump_exponent(triplet.jumps, z, true);
}

CfSamples sample_cf(const CfFunction& cf, double dz, std::int64_t K) {
  if (!(dz > 0.0) || K < 1) fail(ErrorCode::InvalidInput, "frequency grid needs dz > 0 and K >= 1");
  CfSamples out;
  out.dz = dz;
  out.k_first = -K;
  out.values.resize(static_cast<std::size_t>(2 * K + 1));
  for (std::int64_t k = 0; k <= K; ++k) {
    const Complex v = k == 0 ? cf(0.0) : cf(static_cast<double>(k) * dz);
    out.values[static_cast<std::size_t>(K + k)] = v;
  }
  for (std::int64_t k = 1; k <= K; ++k) {
    out.values[static_cast<std::size_t>(K - k)] = cf(-static_cast<double>(k) * dz);
  }
  out.phase_unwrapped = unwrap_phase(out);
  return out;
}

CfSamples levy_khintchine_cf(const LevyTriplet& triplet, double dz, std::int64_t K) {
  triplet.validate();
  levy_integrability_check(triplet.jumps);
  return sample_cf([&](double z) { return std::exp(levy_khintchine_exponent(triplet, z)); }, dz, K);
}

CfSamples spectrally_positive_cf(const LevyTriplet& triplet, double dz, std::int64_t K) {
  triplet.validate();
  levy_integrability_check(triplet.jumps);
  return sample_cf([&](double z) { return std::exp(spectrally_positive_exponent(triplet, z)); }, dz, K);
}

CfSamples dft_cf(const GeneralizedDensity& f, int padding) {
  if (padding < 1) fail(ErrorCode::InvalidInput, "padding must be at least 1");
  const double dx = f.cont.dx();
  const std::int64_t lo = std::min<std::int64_t>(0, f.cont.first_index());
  const std::int64_t hi = std::max<std::int64_t>(0, f.cont.last_index());
  const std::size_t m = detail::next_pow2(static_cast<std::size_t>(padding) * static_cast<std::size_t>(hi - lo + 1));
  std::vector<double> masses(m, 0.0);
  for (std::int64_t k = f.cont.first_index(); k <= f.cont.last_index(); ++k)
    masses[static_cast<std::size_t>(k - lo)] = f.q() * f.cont.at_index(k) * dx;
  masses[static_cast<std::size_t>(-lo)] += f.atom;
  detail::RealFft fft(m);
  const auto spec = fft.forward(masses);

  const auto half = static_cast<std::int64_t>(m / 2);
  CfSamples out;
  out.dz = kTwoPi / (static_cast<double>(m) * dx);
  out.k_first = -half;
  out.periodic = true;
  out.values.resize(m);
  const auto mm = static_cast<std::int64_t>(m);
  for (std::int64_t k = 0; k <= half; ++k) {
    const std::int64_t ph = positive_mod(k * positive_mod(lo, mm), mm);
    const double angle = kTwoPi * static_cast<double>(ph) / static_cast<double>(m);
    const Complex v = Complex(std::cos(angle), std::sin(angle)) * std::conj(spec[static_cast<std::size_t>(k)]);
    if (k < half) out.values[static_cast<std::size_t>(half + k)] = v;
    if (k > 0) out.values[static_cast<std::size_t>(half - k)] = std::conj(v);
  }
  out.phase_unwrapped = unwrap_phase(out);
  return out;
}

std::vector<double> unwrap_phase(const CfSamples& cf) {
  const std::size_t n = cf.size();
  if (n == 0) return {};
  if (cf.k_first > 0 || cf.origin() >= n) fail(ErrorCode::InvalidInput, "frequency grid must contain z = 0");
  for (const auto& v : cf.values) {
    if (!(std::abs(v) >= 1e-14)) fail(ErrorCode::ZeroCrossing, "characteristic function vanishes on the grid");
  }
  std::vector<double> phase(n, 0.0);
  const std::size_t o = cf.origin();
  phase[o] = std::arg(cf.values[o]);
  auto step = [&](std::size_t from, std::size_t to) {
    const double d = std::arg(cf.values[to] / cf.values[from]);
    if (std::abs(d) >= 0.5 * std::numbers::pi) {
      std::ostringstream os;
      os << "phase step " << d << " at z=" << cf.z(to) << " is too large; refine the frequency grid";
      fail(ErrorCode::PhaseStepTooLarge, os.str());
    }
    phase[to] = phase[from] + d;
  };
  for (std::size_t i = o + 1; i < n; ++i) step(i - 1, i);
  for (std::size_t i = o; i-- > 0;) step(i + 1, i);
  return phase;
}

CfSamples cf_power(const CfSamples& cf, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorCode::InvalidInput, "alpha must be positive");
  const auto phase = cf.phase_unwrapped.size() == cf.size() ? cf.phase_unwrapped : unwrap_phase(cf);
  for (const auto& v : cf.values) {
    if (!(std::abs(v) >= 1e-14)) fail(ErrorCode::ZeroCrossing, "characteristic function vanishes on the grid");
  }
  CfSamples out = cf;
  for (std::size_t i = 0; i < cf.size(); ++i) {
    out.values[i] = std::exp(Complex(alpha * std::log(std::abs(cf.values[i])), alpha * phase[i]));
    out.phase_unwrapped[i] = alpha * phase[i];
  }
  return out;
}

InversionResult invert_cf_to_density(const CfSamples& cf, const GridParams& grid, double atom, double edge_tol) {
  grid.validate();
  if (cf.size() == 0) fail(ErrorCode::InvalidInput, "no characteristic function samples");
  const std::int64_t m = period_bins(cf.dz, grid.dx);
  if (static_cast<std::size_t>(m) < grid.size())
    fail(ErrorCode::IncompatibleGrids, "grid is wider than the period of the frequency sampling");
  double edge = 0.0;
  if (!cf.periodic) {
    edge = std::max(std::abs(cf.values.front() - atom), std::abs(cf.values.back() - atom));
    check_edge(edge, edge_tol);
  }
  Folder folder(m, grid.first_index());
  for (std::size_t i = 0; i < cf.size(); ++i) folder.add(cf.k_first + static_cast<std::int64_t>(i), cf.values[i] - atom);
  return finish_inversion(folder.finish(cf.dz, grid.size()), grid, edge);
}

InversionResult invert_cf_to_density(const CfFunction& cf, const GridParams& grid, double atom, double edge_tol,
                                     std::int64_t max_samples) {
  grid.validate();
  const auto m = static_cast<std::int64_t>(detail::next_pow2(2 * grid.size()));
  const double dz = kTwoPi / (static_cast<double>(m) * grid.dx);
  std::int64_t K = 64;
  double edge = 0.0;
  while (true) {
    edge = std::max(std::abs(cf(static_cast<double>(K) * dz) - atom), std::abs(cf(-static_cast<double>(K) * dz) - atom));
    if (edge <= edge_tol) break;
    if (2 * K + 1 > max_samples) check_edge(edge, edge_tol);
    K *= 2;
  }
  Folder folder(m, grid.first_index());
  for (std::int64_t k = -K; k <= K; ++k) folder.add(k, cf(static_cast<double>(k) * dz) - atom);
  return finish_inversion(folder.finish(dz, grid.size()), grid, edge);
}

GridFunction exponential_tilt(const GridFunction& f, double gamma) {
  if (!std::isfinite(gamma)) fail(ErrorCode::InvalidInput, "tilt parameter must be finite");
  if (gamma == 0.0) return f;
  const auto& tail = f.tail();
  const double leak = f.leakage();
  if (gamma > 0.0 && tail.kind == TailKind::power_law && leak > 0.0)
    fail(ErrorCode::TiltDiverges, "exponential tilt of a power-law tail diverges");
  if (gamma > 0.0 && tail.kind == TailKind::exponential && !(tail.parameter > gamma))
    fail(ErrorCode::TiltDiverges, "tilt parameter reaches the exponential tail rate");

  const std::size_t n = f.size();
  const double h = f.dx();
  auto S = [](double t) { return std::abs(t) < 1e-8 ? 1.0 + t * t / 24.0 : std::sinh(0.5 * t) / (0.5 * t); };
  auto E = [](double t) { return std::abs(t) < 1e-12 ? 1.0 + 0.5 * t : std::expm1(t) / t; };
  auto slope = [&](std::size_t a, std::size_t b) {
    // -(log v_b - log v_a) / ((b - a) h)
    return -(std::log(f[b]) - std::log(f[a])) / (static_cast<double>(b - a) * h);
  };
  auto pos = [&](std::size_t i) { return i < n && f[i] > 0.0; };

  // Log of the tilted values relative to a reference to avoid overflow.
  std::vector<double> logv(n, -kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (!pos(i)) continue;
    const bool left_edge = i == 0 || !pos(i - 1);
    const bool right_edge = !pos(i + 1);
    double factor = 1.0;
    if (left_edge && i > 0 && pos(i + 1) && pos(i + 2)) {
      // support edge inside the cell: right half-cell with log-linear profile
      const double s = slope(i + 1, i + 2);
      factor = E((gamma - s) * 0.5 * h) / E(-s * 0.5 * h);
    } else if (!left_edge && !right_edge) {
      // neighbours that are themselves support edges only hold partial cells
      const bool lo_ok = i >= 2 && pos(i - 2);
      const bool hi_ok = pos(i + 2);
      const double s = lo_ok == hi_ok ? slope(i - 1, i + 1) : (lo_ok ? slope(i - 1, i) : slope(i, i + 1));
      factor = S((gamma - s) * h) / S(s * h);
    } else if (left_edge && pos(i + 1)) {
      const double s = slope(i, i + 1);
      factor = S((gamma - s) * h) / S(s * h);
    } else if (right_edge && i > 0 && pos(i - 1)) {
      const double s = slope(i - 1, i);
      factor = S((gamma - s) * h) / S(s * h);
    }
    logv[i] = std::log(f[i]) + gamma * f.x(i) + std::log(factor);
  }
  double ref = -kInf;
  for (double v : logv) ref = std::max(ref, v);
  if (!std::isfinite(ref)) fail(ErrorCode::InvalidInput, "cannot tilt a zero function");

  const double x_edge = f.x_max() + 0.5 * h;
  double log_tail = -kInf;
  TailModel out_tail = tail;
  if (leak > 0.0) {
    if (tail.kind == TailKind::exponential) {
      const double r = tail.parameter;
      log_tail = std::log(leak) + std::log(r) + gamma * x_edge - std::log(r - gamma);
      out_tail = TailModel::exponential(r - gamma);
    } else {
      // Mass assumed concentrated just beyond the grid; an upper bound for gamma < 0.
      log_tail = std::log(leak) + gamma * x_edge;
      if (tail.kind == TailKind::power_law) out_tail = TailModel::exponential(-gamma);
    }
  } else if (tail.kind == TailKind::exponential) {
    out_tail = TailModel::exponential(tail.parameter - gamma);
  }

  double total = 0.0;
  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(logv[i])) values[i] = std::exp(logv[i] - ref);
    total += values[i] * h;
  }
  const double tail_rel = std::isfinite(log_tail) ? std::exp(log_tail - ref) : 0.0;
  total += tail_rel;
  for (double& v : values) v /= total;
  return GridFunction(h, f.first_index(), std::move(values), out_tail, tail_rel / total);
}

}  // namespace levytail
