#include "levytail/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "fft.hpp"
#include "levytail/errors.hpp"

namespace levytail {

namespace {

void require_same_spacing(const GridFunction& f, const GridFunction& g) {
  if (!same_spacing(f.dx(), g.dx())) {
    std::ostringstream os;
    os << "grid spacings differ: " << f.dx() << " vs " << g.dx();
    fail(ErrorCode::IncompatibleGrids, os.str());
  }
}

TailModel heavier(const TailModel& a, const TailModel& b) {
  if (a.kind == TailKind::power_law && b.kind == TailKind::power_law)
    return a.parameter <= b.parameter ? a : b;
  if (a.kind == TailKind::power_law) return a;
  if (b.kind == TailKind::power_law) return b;
  if (a.kind == TailKind::exponential && b.kind == TailKind::exponential)
    return a.parameter <= b.parameter ? a : b;
  if (a.kind == TailKind::exponential) return a;
  return b;
}

void check_clamp(double clamped, double limit) {
  if (clamped > limit) {
    std::ostringstream os;
    os << "negative round-off mass " << clamped << " exceeds clamp limit " << limit;
    fail(ErrorCode::ClampExceeded, os.str());
  }
}

// Repeated convolution against a fixed kernel g, with input and output both
// on the lattice range [lo, hi]. For kernels supported on x >= 0 and lo >= 0
// this is exact on the window: mass pushed beyond hi never returns.
class WindowedConvolver {
 public:
  WindowedConvolver(const GridFunction& g, std::int64_t lo, std::int64_t hi)
      : lo_(lo),
        len_(static_cast<std::size_t>(hi - lo + 1)),
        g_first_(g.first_index()),
        dx_(g.dx()),
        fft_(detail::next_pow2(len_ + g.size() - 1)) {
    kernel_ = fft_.forward(g.values());
  }

  // Returns (h * g) on the window; negative round-off is clamped and its
  // mass accumulated.
  std::vector<double> apply(std::span<const double> h) {
    auto spec = fft_.forward(h);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kernel_[i];
    auto r = fft_.inverse(spec);
    const double scale = dx_ / static_cast<double>(fft_.size());
    std::vector<double> out(len_, 0.0);
    // lattice k <-> r index k - lo - g_first
    for (std::size_t i = 0; i < len_; ++i) {
      const std::int64_t j = static_cast<std::int64_t>(i) - g_first_;
      if (j < 0 || j >= static_cast<std::int64_t>(r.size())) continue;
      double v = r[static_cast<std::size_t>(j)] * scale;
      if (v < 0.0) {
        clamped_ += -v * dx_;
        v = 0.0;
      }
      out[i] = v;
    }
    return out;
  }

  double clamped() const { return clamped_; }
  std::int64_t lo() const { return lo_; }

 private:
  std::int64_t lo_;
  std::size_t len_;
  std::int64_t g_first_;
  double dx_;
  detail::RealFft fft_;
  std::vector<std::complex<double>> kernel_;
  double clamped_ = 0.0;
};

double mass_of(const std::vector<double>& v, double dx) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * dx;
}

}  // namespace

GeneralizedDensity convolve(const GeneralizedDensity& f, const GeneralizedDensity& g, const ConvolveOptions& options) {
  require_same_spacing(f.cont, g.cont);
  const double dx = f.cont.dx();
  const double pf = f.atom, qf = f.q(), pg = g.atom, qg = g.q();
  const std::int64_t ff = f.cont.first_index(), fl = f.cont.last_index();
  const std::int64_t gf = g.cont.first_index(), gl = g.cont.last_index();

  std::int64_t lo = std::min({ff + gf, ff, gf});
  std::int64_t hi = std::max({fl + gl, fl, gl});
  if (options.window) {
    lo = options.window->first;
    hi = options.window->second;
    if (hi < lo) fail(ErrorCode::InvalidGrid, "empty convolution window");
  }

  std::vector<double> c;
  double clamped = 0.0;
  if (qf > 0.0 && qg > 0.0) {
    c = detail::linear_convolve(f.cont.values(), g.cont.values());
    for (double& v : c) {
      v *= dx;
      if (v < 0.0) {
        clamped += -v * dx * qf * qg;
        v = 0.0;
      }
    }
  }
  check_clamp(clamped, options.clamp_limit);

  const double q_out = qf + qg - qf * qg;
  std::vector<double> h(static_cast<std::size_t>(hi - lo + 1), 0.0);
  if (q_out > 0.0) {
    for (std::int64_t k = lo; k <= hi; ++k) {
      double v = pf * qg * g.cont.at_index(k) + qf * pg * f.cont.at_index(k);
      const std::int64_t j = k - ff - gf;
      if (!c.empty() && j >= 0 && j < static_cast<std::int64_t>(c.size())) v += qf * qg * c[static_cast<std::size_t>(j)];
      h[static_cast<std::size_t>(k - lo)] = v / q_out;
    }
  }
  const double leak = q_out > 0.0 ? std::max(0.0, 1.0 - mass_of(h, dx)) : 0.0;
  GridFunction cont(dx, lo, std::move(h), heavier(f.cont.tail(), g.cont.tail()), leak);
  return GeneralizedDensity(pf * pg, std::move(cont));
}

GeneralizedDensity nfold(const GeneralizedDensity& f, int n, const ConvolveOptions& options) {
  if (n < 1) fail(ErrorCode::InvalidInput, "nfold needs n >= 1");
  if (n == 1) return f;
  ConvolveOptions opt = options;
  if (!opt.window && f.cont.first_index() >= 0)
    opt.window = std::make_pair(f.cont.first_index(), f.cont.last_index());
  std::optional<GeneralizedDensity> result;
  GeneralizedDensity base = f;
  while (n > 0) {
    if (n & 1) result = result ? convolve(*result, base, opt) : base;
    n >>= 1;
    if (n > 0) base = convolve(base, base, opt);
  }
  return *result;
}

double convolution_at(const GridFunction& f, const GridFunction& g, std::int64_t k) {
  require_same_spacing(f, g);
  const std::int64_t n = k - f.first_index() - g.first_index();
  const std::int64_t max_n = static_cast<std::int64_t>(f.size() + g.size()) - 2;
  if (n < 0 || n > max_n) return 0.0;
  return detail::direct_convolution_at(f.values(), g.values(), static_cast<std::size_t>(n)) * f.dx();
}

SeriesTruncation poisson_truncation(double lambda, double tol, int cap) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidInput, "lambda must be positive");
  // w_n = lambda^n / n! / (e^lambda - 1)
  double w = lambda / std::expm1(lambda);
  for (int n = 1; n <= cap; ++n) {
    const double next = w * lambda / (n + 1);
    const double ratio = lambda / (n + 2);
    if (ratio < 1.0) {
      const double bound = next / (1.0 - ratio);
      if (bound < tol) return {n, bound};
    }
    w = next;
  }
  std::ostringstream os;
  os << "Poisson series for lambda=" << lambda << " needs more than " << cap << " terms";
  fail(ErrorCode::TruncationInsufficient, os.str());
}

SeriesTruncation log_series_truncation(double lambda, double tol, int cap) {
  const double r = std::expm1(lambda);
  if (!(r < 1.0)) fail(ErrorCode::SeriesDiverges, "log series diverges for lambda >= log 2");
  // sum_{n>N} r^n / (n lambda) <= r^{N+1} / ((N+1) lambda (1 - r))
  double rn = r;
  const int limit = std::max(cap, 1) * 1000;
  for (int n = 1; n <= limit; ++n) {
    rn *= r;
    const double bound = rn / ((n + 1) * lambda * (1.0 - r));
    if (bound < tol) return {n, bound};
  }
  return {limit + 1, rn / lambda};
}

GeneralizedDensity compound_poisson_density(double lambda, const GridFunction& g, const SeriesTruncation& trunc,
                                            double tol) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidInput, "lambda must be positive");
  if (trunc.n_max < 1) fail(ErrorCode::InvalidInput, "series needs at least one term");
  if (!(trunc.tail_bound < tol)) {
    std::ostringstream os;
    os << "series tail bound " << trunc.tail_bound << " is not below " << tol;
    fail(ErrorCode::TruncationInsufficient, os.str());
  }
  const double dx = g.dx();
  const std::int64_t lo = g.first_index(), hi = g.last_index();
  std::vector<double> term(g.values().begin(), g.values().end());
  double w = lambda / std::expm1(lambda);
  std::vector<double> acc(term.size());
  for (std::size_t i = 0; i < term.size(); ++i) acc[i] = w * term[i];
  double clamped = 0.0;
  if (trunc.n_max > 1) {
    WindowedConvolver conv(g, lo, hi);
    for (int n = 2; n <= trunc.n_max; ++n) {
      w *= lambda / n;
      const double before = conv.clamped();
      term = conv.apply(term);
      clamped += w * (conv.clamped() - before);
      for (std::size_t i = 0; i < term.size(); ++i) acc[i] += w * term[i];
    }
  }
  check_clamp(clamped, 1e-9);
  const double leak = std::max(0.0, 1.0 - mass_of(acc, dx));
  GridFunction cont(dx, lo, std::move(acc), g.tail(), leak);
  return GeneralizedDensity(std::exp(-lambda), std::move(cont));
}

GeneralizedDensity compound_poisson_density(double lambda, const GridFunction& g) {
  return compound_poisson_density(lambda, g, poisson_truncation(lambda));
}

RecoveryResult recover_jump_density(const GridFunction& f1, double lambda, double tol) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::InvalidInput, "lambda must be positive");
  if (lambda >= std::log(2.0)) {
    std::ostringstream os;
    os << "inverse series needs lambda < log 2, got " << lambda;
    fail(ErrorCode::SeriesDiverges, os.str());
  }
  const double r = std::expm1(lambda);
  const double dx = f1.dx();
  const std::int64_t lo = f1.first_index(), hi = f1.last_index();
  const auto trunc = log_series_truncation(lambda, tol);

  RecoveryResult out{GridFunction(dx, lo, std::vector<double>(f1.size(), 0.0)), {}, 0.0, 0, false};
  std::vector<double> acc(f1.size(), 0.0);

  if (trunc.n_max <= kSeriesCap) {
    std::vector<double> term(f1.values().begin(), f1.values().end());
    double c = r / lambda;  // (-1)^{n+1} r^n / (n lambda)
    for (std::size_t i = 0; i < term.size(); ++i) acc[i] = c * term[i];
    WindowedConvolver conv(f1, lo, hi);
    double rn = r;
    for (int n = 2; n <= trunc.n_max; ++n) {
      rn *= r;
      c = ((n % 2 == 0) ? -1.0 : 1.0) * rn / (n * lambda);
      term = conv.apply(term);
      for (std::size_t i = 0; i < term.size(); ++i) acc[i] += c * term[i];
    }
    out.terms = trunc.n_max;
  } else {
    if (lo < 0)
      fail(ErrorCode::TruncationInsufficient, "closed-form inverse needs a density supported on x >= 0");
    // Sum the series as (1/lambda) log(1 + r f1^) on an exponentially damped,
    // zero-padded lattice so that periodic wrap-around is negligible.
    const std::size_t span_len = static_cast<std::size_t>(hi + 1);
    const std::size_t n = detail::next_pow2(4 * span_len);
    const double s = 11.5 / static_cast<double>(span_len);
    detail::RealFft fft(n);
    std::vector<double> a(n, 0.0);
    for (std::int64_t k = lo; k <= hi; ++k)
      a[static_cast<std::size_t>(k)] = f1.at_index(k) * dx * std::exp(-s * static_cast<double>(k));
    auto spec = fft.forward(a);
    for (auto& v : spec) v = std::log(1.0 + r * v) / lambda;
    auto back = fft.inverse(spec);
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double m = back[static_cast<std::size_t>(k)] / static_cast<double>(n);
      acc[static_cast<std::size_t>(k - lo)] = m * std::exp(s * static_cast<double>(k)) / dx;
    }
    out.closed_form = true;
  }

  out.signed_values = acc;
  double clamped = 0.0;
  for (double& v : acc) {
    if (v < 0.0) {
      clamped += -v * dx;
      v = 0.0;
    }
  }
  out.clamped_mass = clamped;
  out.density = GridFunction(dx, lo, std::move(acc), f1.tail(), 0.0);
  return out;
}

std::pair<std::size_t, std::size_t> tail_window(const GridFunction& f, double fraction) {
  std::size_t first_pos = f.size();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.x(i) > 0.0 && f[i] > 0.0) {
      first_pos = i;
      break;
    }
  }
  if (first_pos == f.size()) fail(ErrorCode::WindowUnderflow, "density vanishes on x > 0");
  const double x_start = std::max(1.0, f.x(first_pos));
  const double x_end = f.x_max();
  if (!(x_end > x_start)) fail(ErrorCode::WindowUnderflow, "grid does not extend beyond the window start");
  const double log_lo = std::log(x_start) + (1.0 - fraction) * (std::log(x_end) - std::log(x_start));
  const double x_lo = std::exp(log_lo);
  std::size_t i_lo = f.size() - 1;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.x(i) >= x_lo) {
      i_lo = i;
      break;
    }
  }
  return {i_lo, f.size() - 1};
}

namespace {

constexpr double kUnderflowFloor = 1e-300;

// f^{*n} on f's own lattice range.
std::vector<std::vector<double>> powers(const GridFunction& f, int n_max) {
  std::vector<std::vector<double>> out;
  out.emplace_back(f.values().begin(), f.values().end());
  if (n_max > 1) {
    WindowedConvolver conv(f, f.first_index(), f.last_index());
    for (int n = 2; n <= n_max; ++n) out.push_back(conv.apply(out.back()));
  }
  return out;
}

}  // namespace

std::vector<KestenPoint> kesten_bound_profile(const GridFunction& f, double eps, int n_max) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::InvalidInput, "eps must lie in (0, 1)");
  if (n_max < 1 || n_max > 12) fail(ErrorCode::InvalidInput, "n_max must lie in [1, 12]");
  const auto [i_lo, i_hi] = tail_window(f);
  const auto pw = powers(f, n_max);
  std::vector<KestenPoint> out;
  for (int n = 1; n <= n_max; ++n) {
    const double scale = std::pow(1.0 + eps, n);
    double sup = 0.0;
    std::size_t excluded = 0;
    for (std::size_t i = i_lo; i <= i_hi; ++i) {
      if (!(f[i] > kUnderflowFloor)) {
        ++excluded;
        continue;
      }
      sup = std::max(sup, pw[static_cast<std::size_t>(n - 1)][i] / (scale * f[i]));
    }
    out.push_back({n, excluded == i_hi - i_lo + 1 ? std::nan("") : sup, excluded});
  }
  return out;
}

std::vector<std::pair<double, double>> kesten_ratio_curve(const GridFunction& f, double eps, int n) {
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::InvalidInput, "eps must lie in (0, 1)");
  if (n < 1 || n > 12) fail(ErrorCode::InvalidInput, "n must lie in [1, 12]");
  const auto [i_lo, i_hi] = tail_window(f);
  const auto pw = powers(f, n);
  const double scale = std::pow(1.0 + eps, n);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = i_lo; i <= i_hi; ++i) {
    if (!(f[i] > kUnderflowFloor)) continue;
    out.emplace_back(f.x(i), pw.back()[i] / (scale * f[i]));
  }
  return out;
}

}  // namespace levytail
