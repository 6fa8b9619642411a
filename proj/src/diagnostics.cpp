#include "levytail/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "levytail/charfn.hpp"
#include "levytail/convolution.hpp"
#include "levytail/errors.hpp"

namespace levytail {

namespace {

constexpr double kFloor = 1e-300;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

bool positive(double v) { return v > kFloor && std::isfinite(v); }

std::optional<std::size_t> last_positive(const GridFunction& f) {
  for (std::size_t i = f.size(); i-- > 0;)
    if (positive(f[i])) return i;
  return std::nullopt;
}

std::optional<std::size_t> first_positive_after_origin(const GridFunction& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.x(i) > 0.0 && positive(f[i])) return i;
  return std::nullopt;
}

[[noreturn]] void underflow(const char* what) {
  fail(ErrorCode::WindowUnderflow, std::string(what) + ": no positive values on the read-out window");
}

// Log-spaced read-out nodes in [i_lo, i_hi], snapped to the grid.
std::vector<std::size_t> readout(const GridFunction& f, std::size_t i_lo, std::size_t i_hi, const DiagnosticsConfig& cfg) {
  std::vector<std::size_t> out;
  if (i_hi < i_lo) return out;
  const double x_hi = f.x(i_hi);
  if (!(x_hi > 0.0)) return out;
  const double x_lo = std::max({f.x(i_lo), x_hi * std::pow(10.0, -cfg.decades), f.dx()});
  if (!(x_lo < x_hi)) {
    out.push_back(i_hi);
    return out;
  }
  const double span = std::log10(x_hi / x_lo);
  const int n = std::max(2, static_cast<int>(std::ceil(cfg.points_per_decade * span)) + 1);
  for (int j = 0; j < n; ++j) {
    const double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(j) / (n - 1));
    auto k = static_cast<std::int64_t>(std::llround(x / f.dx())) - f.first_index();
    k = std::clamp<std::int64_t>(k, static_cast<std::int64_t>(i_lo), static_cast<std::int64_t>(i_hi));
    const auto idx = static_cast<std::size_t>(k);
    if (out.empty() || idx > out.back()) out.push_back(idx);
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

RatioCurve analyse(std::string label, std::vector<double> xs, std::vector<double> rs, double target) {
  RatioCurve c;
  c.label = std::move(label);
  c.x_points = std::move(xs);
  c.ratios = std::move(rs);
  if (c.x_points.empty()) {
    c.divergent = true;
    c.limit_estimate = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  const double x_hi = c.x_points.back();
  const double decade_lo = x_hi / 10.0;
  const double third_lo = x_hi * std::pow(10.0, -1.0 / 3.0);
  std::vector<double> last_third, lx, ly;
  bool exact = true;
  const double scale = std::max(1.0, std::abs(target));
  for (std::size_t i = 0; i < c.x_points.size(); ++i) {
    const double x = c.x_points[i], r = c.ratios[i];
    if (x < decade_lo) continue;
    if (!std::isfinite(r)) c.divergent = true;
    if (x >= third_lo) last_third.push_back(r);
    const double d = std::abs(r - target);
    if (!(d <= 1e-9 * scale)) exact = false;
    lx.push_back(std::log(x));
    ly.push_back(std::log(std::max(d, kFloor)));
  }
  if (last_third.empty()) last_third.push_back(c.ratios.back());
  c.limit_estimate = median(last_third);
  c.exact = exact && !c.divergent;
  c.trend_slope = c.exact ? 0.0 : ls_slope(lx, ly);
  if (!std::isfinite(c.limit_estimate)) c.divergent = true;
  return c;
}

Outcome classify(const RatioCurve& c, double target, double threshold, double& rel) {
  rel = std::abs(c.limit_estimate - target) / std::max(std::abs(target), 1e-300);
  if (c.divergent || !std::isfinite(rel)) {
    rel = kInfinity;
    return Outcome::fail;
  }
  if (rel < threshold && (c.exact || c.trend_slope < 0.0)) return Outcome::pass;
  if (rel >= threshold && c.trend_slope >= -0.05 && !c.exact) return Outcome::fail;
  return Outcome::inconclusive;
}

Diagnosis finalize(Property p, double target, std::vector<RatioCurve> curves, const DiagnosticsConfig& cfg) {
  Diagnosis d;
  d.verdict.property = p;
  d.verdict.target = target;
  bool any_fail = false, all_pass = true;
  double worst = -1.0;
  for (const auto& c : curves) {
    double rel = 0.0;
    const Outcome o = classify(c, target, cfg.threshold, rel);
    any_fail = any_fail || o == Outcome::fail;
    all_pass = all_pass && o == Outcome::pass;
    if (rel > worst) {
      worst = rel;
      d.verdict.limit_estimate = c.limit_estimate;
      d.verdict.rel_error = rel;
      const double hi = c.x_points.empty() ? 0.0 : c.x_points.back();
      const double lo = c.x_points.empty() ? 0.0 : std::max(c.x_points.front(), hi / 10.0);
      d.verdict.window = {lo, hi};
    }
  }
  d.verdict.outcome = any_fail ? Outcome::fail : (all_pass && !curves.empty() ? Outcome::pass : Outcome::inconclusive);
  d.curves = std::move(curves);
  return d;
}

// Highest usable node for a ratio of continuous parts: f positive, and for
// two-sided inputs far enough from x_max that f * f is complete.
std::size_t conv_window_end(const GridFunction& c, const char* what) {
  auto hi = last_positive(c);
  if (!hi) underflow(what);
  std::int64_t k_hi = c.first_index() + static_cast<std::int64_t>(*hi);
  if (c.first_index() < 0) k_hi = std::min(k_hi, c.last_index() + c.first_index());
  if (k_hi <= 0) underflow(what);
  return static_cast<std::size_t>(k_hi - c.first_index());
}

std::size_t window_start(const GridFunction& f, const char* what) {
  auto lo = first_positive_after_origin(f);
  if (!lo) underflow(what);
  return *lo;
}

}  // namespace

const char* to_string(Property p) noexcept {
  switch (p) {
    case Property::long_tailed: return "long_tailed";
    case Property::subexp: return "subexp";
    case Property::subexp_plus: return "subexp_plus";
    case Property::ani: return "ani";
    case Property::ald: return "ald";
    case Property::tail_equiv: return "tail_equiv";
    case Property::conv_root: return "conv_root";
    case Property::steutel: return "steutel";
  }
  return "unknown";
}

const char* to_string(Outcome o) noexcept {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Diagnosis long_tail_check(const GridFunction& f, const std::vector<double>& y_set, const DiagnosticsConfig& cfg) {
  if (y_set.empty()) fail(ErrorCode::InvalidInput, "long_tail_check needs at least one shift");
  const std::size_t lo = window_start(f, "long_tail_check");
  const std::size_t top = *last_positive(f);
  std::vector<RatioCurve> curves;
  for (double y : y_set) {
    if (!(y >= 0.0) || !std::isfinite(y)) fail(ErrorCode::InvalidInput, "shifts must be non-negative");
    const auto m = static_cast<std::size_t>(std::llround(y / f.dx()));
    if (top < lo + m) underflow("long_tail_check");
    std::vector<double> xs, rs;
    for (std::size_t i : readout(f, lo, top - m, cfg)) {
      if (!positive(f[i])) continue;
      xs.push_back(f.x(i));
      rs.push_back(f[i + m] / f[i]);
    }
    if (xs.empty()) underflow("long_tail_check");
    std::ostringstream label;
    label << "f(x+" << y << ")/f(x)";
    curves.push_back(analyse(label.str(), std::move(xs), std::move(rs), 1.0));
  }
  return finalize(Property::long_tailed, 1.0, std::move(curves), cfg);
}

Diagnosis subexp_check(const GeneralizedDensity& f, const DiagnosticsConfig& cfg) {
  const GridFunction& c = f.cont;
  const double a = f.atom, q = f.q();
  if (!(q > 0.0)) fail(ErrorCode::InvalidInput, "subexp_check needs a continuous part");
  const std::size_t lo = window_start(c, "subexp_check");
  const std::size_t hi = conv_window_end(c, "subexp_check");
  std::vector<double> xs, rs;
  for (std::size_t i : readout(c, lo, hi, cfg)) {
    if (!positive(c[i])) continue;
    const std::int64_t k = c.first_index() + static_cast<std::int64_t>(i);
    const double two = 2.0 * a * q * c[i] + q * q * convolution_at(c, c, k);
    xs.push_back(c.x(i));
    rs.push_back(two / (q * c[i]));
  }
  if (xs.empty()) underflow("subexp_check");
  std::vector<RatioCurve> curves;
  curves.push_back(analyse("f*2(x)/f(x)", std::move(xs), std::move(rs), 2.0));
  return finalize(Property::subexp, 2.0, std::move(curves), cfg);
}

Diagnosis subexp_plus_check(const GeneralizedDensity& f, const DiagnosticsConfig& cfg) {
  const GridFunction& c = f.cont;
  const std::int64_t first = std::max<std::int64_t>(1, c.first_index());
  double mass = 0.0;
  if (first <= c.last_index()) {
    for (std::int64_t k = first; k <= c.last_index(); ++k) mass += c.at_index(k) * c.dx();
  }
  mass += c.leakage();
  if (!(f.q() * mass > 0.0)) fail(ErrorCode::ZeroPositiveMass, "no mass on (0, inf)");
  if (first > c.last_index() || !(mass - c.leakage() > 0.0))
    fail(ErrorCode::ZeroPositiveMass, "no mass on (0, inf) inside the grid");
  const GridFunction plus = c.restricted(first, c.last_index()).scaled(1.0 / mass);
  Diagnosis d = subexp_check(GeneralizedDensity(0.0, plus), cfg);
  d.verdict.property = Property::subexp_plus;
  return d;
}

Diagnosis ani_check(const GridFunction& f, const DiagnosticsConfig& cfg) {
  const std::size_t lo = window_start(f, "ani_check");
  const std::size_t hi = *last_positive(f);
  const std::size_t n = hi - lo + 1;
  std::vector<double> sup(n), inf(n);
  bool zero_then_positive = false;
  for (std::size_t j = n; j-- > 0;) sup[j] = std::max(f[lo + j], j + 1 < n ? sup[j + 1] : 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!positive(f[lo + j])) zero_then_positive = true;
    inf[j] = std::min(f[lo + j], j > 0 ? inf[j - 1] : kInfinity);
  }
  auto ratio = [](double num, double den) { return positive(den) ? num / den : kInfinity; };

  std::vector<double> xs, rs_sup, rs_inf;
  for (std::size_t i : readout(f, lo, hi, cfg)) {
    xs.push_back(f.x(i));
    rs_sup.push_back(ratio(sup[i - lo], f[i]));
    rs_inf.push_back(positive(f[i]) ? inf[i - lo] / f[i] : 0.0);
  }
  std::vector<RatioCurve> curves;
  curves.push_back(analyse("sup_{t>=x} f(t)/f(x)", xs, std::move(rs_sup), 1.0));
  curves.push_back(analyse("inf_{x0<=t<=x} f(t)/f(x)", std::move(xs), std::move(rs_inf), 1.0));
  Diagnosis d = finalize(Property::ani, 1.0, std::move(curves), cfg);

  // Excursions between read-out points: every node of the last decade.
  double excursion = 0.0;
  const double x_decade = f.x(hi) / 10.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (f.x(i) < x_decade) continue;
    const double s = ratio(sup[i - lo], f[i]);
    const double m = positive(f[i]) ? inf[i - lo] / f[i] : 0.0;
    excursion = std::max({excursion, std::abs(s - 1.0), std::abs(m - 1.0)});
  }
  if (zero_then_positive || !(excursion <= 0.5)) d.verdict.outcome = Outcome::fail;
  return d;
}

Diagnosis ald_check(const GridFunction& f, const DiagnosticsConfig& cfg) {
  const std::size_t lo = window_start(f, "ald_check");
  const std::size_t top = *last_positive(f);
  if (top <= lo) underflow("ald_check");
  const std::size_t hi = top - 1;
  // K at every node of [lo, hi]
  std::vector<double> K(hi - lo + 1);
  double next_sup = f[top];
  for (std::size_t i = hi + 1; i-- > lo;) {
    K[i - lo] = positive(f[i]) ? next_sup / f[i] : (next_sup > 0.0 ? kInfinity : 0.0);
    next_sup = std::max(next_sup, f[i]);
  }
  const auto nodes = readout(f, lo, hi, cfg);
  std::vector<double> xs, ks;
  for (std::size_t i : nodes) {
    xs.push_back(f.x(i));
    ks.push_back(K[i - lo]);
  }
  RatioCurve curve = analyse("sup_{y>0} f(x+y)/f(x)", xs, ks, 1.0);

  // Block maxima over eight log-spaced bins spanning the read-out range.
  const double x_lo = xs.front(), x_hi = xs.back();
  constexpr int kBins = 8;
  std::vector<double> block(kBins, 0.0);
  bool unbounded = false;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double x = f.x(i);
    if (x < x_lo || x > x_hi) continue;
    if (std::isinf(K[i - lo])) unbounded = true;
    int b = x_hi > x_lo ? static_cast<int>(kBins * std::log(x / x_lo) / std::log(x_hi / x_lo)) : 0;
    b = std::clamp(b, 0, kBins - 1);
    block[static_cast<std::size_t>(b)] = std::max(block[static_cast<std::size_t>(b)], K[i - lo]);
  }
  std::vector<double> bx, by;
  for (int b = 0; b < kBins; ++b) {
    if (!(block[static_cast<std::size_t>(b)] > 0.0) || std::isinf(block[static_cast<std::size_t>(b)])) continue;
    const double centre = x_lo * std::pow(x_hi / x_lo, (b + 0.5) / kBins);
    bx.push_back(std::log(centre));
    by.push_back(std::log(block[static_cast<std::size_t>(b)]));
  }
  const double slope = ls_slope(bx, by);
  curve.trend_slope = slope;
  double k_max = 0.0;
  for (double v : block) k_max = std::max(k_max, v);
  curve.limit_estimate = k_max;
  curve.divergent = unbounded;

  Diagnosis d;
  d.verdict.property = Property::ald;
  d.verdict.target = 1.0;
  d.verdict.limit_estimate = k_max;
  d.verdict.rel_error = unbounded ? kInfinity : std::abs(k_max - 1.0);
  d.verdict.window = {x_lo, x_hi};
  if (unbounded || slope > 0.05)
    d.verdict.outcome = Outcome::fail;
  else if (slope <= 0.02)
    d.verdict.outcome = Outcome::pass;
  else
    d.verdict.outcome = Outcome::inconclusive;
  d.curves.push_back(std::move(curve));
  return d;
}

Diagnosis tail_equivalence(const GridFunction& f, const GridFunction& g, double target, const DiagnosticsConfig& cfg) {
  if (!same_spacing(f.dx(), g.dx())) fail(ErrorCode::IncompatibleGrids, "tail_equivalence needs a common grid step");
  if (!(target > 0.0) || !std::isfinite(target)) fail(ErrorCode::InvalidInput, "target must be positive");
  const std::int64_t k_hi = std::min(f.last_index(), g.last_index());
  std::optional<std::size_t> hi;
  for (std::int64_t k = k_hi; k > 0; --k) {
    if (positive(f.at_index(k)) && positive(g.at_index(k))) {
      hi = static_cast<std::size_t>(k - f.first_index());
      break;
    }
  }
  if (!hi) underflow("tail_equivalence");
  const std::size_t lo = window_start(f, "tail_equivalence");
  std::vector<double> xs, rs;
  for (std::size_t i : readout(f, lo, *hi, cfg)) {
    const std::int64_t k = f.first_index() + static_cast<std::int64_t>(i);
    const double gv = g.at_index(k);
    if (!positive(f[i]) || !positive(gv)) continue;
    xs.push_back(f.x(i));
    rs.push_back(f[i] / gv);
  }
  if (xs.empty()) underflow("tail_equivalence");
  std::vector<RatioCurve> curves;
  curves.push_back(analyse("f(x)/g(x)", std::move(xs), std::move(rs), target));
  return finalize(Property::tail_equiv, target, std::move(curves), cfg);
}

Diagnosis convolution_root_ratio(const GeneralizedDensity& f, int n, const DiagnosticsConfig& cfg) {
  if (n < 1 || n > 8) fail(ErrorCode::InvalidInput, "n must lie in [1, 8]");
  const GridFunction& c = f.cont;
  const std::size_t lo = window_start(c, "convolution_root_ratio");
  const std::size_t hi = conv_window_end(c, "convolution_root_ratio");
  std::optional<GeneralizedDensity> fn;
  if (n > 1) fn = nfold(f, n);
  std::vector<double> xs, rs;
  for (std::size_t i : readout(c, lo, hi, cfg)) {
    if (!positive(c[i])) continue;
    const double base = f.q() * c[i];
    const std::int64_t k = c.first_index() + static_cast<std::int64_t>(i);
    xs.push_back(c.x(i));
    rs.push_back(fn ? fn->q() * fn->cont.at_index(k) / base : 1.0);
  }
  if (xs.empty()) underflow("convolution_root_ratio");
  std::ostringstream label;
  label << "f*" << n << "(x)/f(x)";
  std::vector<RatioCurve> curves;
  curves.push_back(analyse(label.str(), std::move(xs), std::move(rs), n));
  return finalize(Property::conv_root, n, std::move(curves), cfg);
}

Diagnosis steutel_ratio(double lambda, const GridFunction& g, double alpha, const DiagnosticsConfig& cfg) {
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidInput, "lambda must be positive");
  if (!(lambda < std::log(2.0))) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is not below log 2";
    fail(ErrorCode::HypothesisViolated, os.str());
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorCode::InvalidInput, "alpha must be positive");
  const GeneralizedDensity ft = compound_poisson_density(lambda, g);
  const GridFunction& c = ft.cont;
  std::optional<InversionResult> inv;
  if (alpha != 1.0) inv = invert_cf_to_density(cf_power(dft_cf(ft), alpha), c.params(), std::exp(-lambda * alpha));
  const std::size_t lo = window_start(c, "steutel_ratio");
  const std::size_t hi = *last_positive(c);
  std::vector<double> xs, rs;
  for (std::size_t i : readout(c, lo, hi, cfg)) {
    if (!positive(c[i])) continue;
    xs.push_back(c.x(i));
    rs.push_back(inv ? inv->density[i] / (ft.q() * c[i]) : 1.0);
  }
  if (xs.empty()) underflow("steutel_ratio");
  std::vector<RatioCurve> curves;
  curves.push_back(analyse("f*alpha(x)/f(x)", std::move(xs), std::move(rs), alpha));
  return finalize(Property::steutel, alpha, std::move(curves), cfg);
}

LocalMassCurves local_interval_mass(const GridFunction& f, double c, const DiagnosticsConfig& cfg) {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::InvalidInput, "interval length must be positive");
  const double dx = f.dx();
  const auto m = static_cast<std::size_t>(std::max<long long>(1, std::llround(c / dx)));
  const auto shift = static_cast<std::size_t>(std::max<long long>(1, std::llround(1.0 / dx)));

  // Mass of (x_i, x_i + m dx] from suffix sums, half cells at both ends.
  auto interval = [m, dx](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + v[i];
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + m < n; ++i)
      out[i] = (suffix[i + 1] - suffix[i + m] + 0.5 * (v[i] + v[i + m])) * dx;
    return out;
  };
  const std::vector<double> fv(f.values().begin(), f.values().end());
  const auto F = interval(fv);
  const GeneralizedDensity gd(0.0, f);
  ConvolveOptions opt;
  opt.window = std::make_pair(f.first_index(), f.last_index());
  const auto sq = convolve(gd, gd, opt);
  std::vector<double> hv(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) hv[i] = sq.q() * sq.cont.at_index(f.first_index() + static_cast<std::int64_t>(i));
  const auto F2 = interval(hv);

  const std::size_t lo = window_start(f, "local_interval_mass");
  const std::size_t top = *last_positive(f);
  if (top < lo + m + shift) underflow("local_interval_mass");
  std::vector<double> xs, r1, r2, r3;
  for (std::size_t i : readout(f, lo, top - m - shift, cfg)) {
    if (!positive(f[i]) || !positive(F[i])) continue;
    xs.push_back(f.x(i));
    r1.push_back(F[i] / f[i]);
    r2.push_back(F[i + shift] / F[i]);
    r3.push_back(F2[i] / F[i]);
  }
  if (xs.empty()) underflow("local_interval_mass");
  LocalMassCurves out;
  out.mass_over_density = analyse("F(x+D)/f(x)", xs, std::move(r1), c);
  out.long_tail = analyse("F(x+1+D)/F(x+D)", xs, std::move(r2), 1.0);
  out.subexp = analyse("F*2(x+D)/F(x+D)", std::move(xs), std::move(r3), 2.0);
  return out;
}

RatioCurve insensitivity_scale(const GridFunction& f, double tol, const DiagnosticsConfig& cfg) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidInput, "tolerance must be positive");
  const std::size_t lo = window_start(f, "insensitivity_scale");
  const std::size_t hi = *last_positive(f);
  std::vector<double> xs, hs;
  for (std::size_t i : readout(f, lo, hi, cfg)) {
    const double v = f[i];
    std::size_t j = 1;
    while (j <= i && i + j < f.size() && std::abs(f[i + j] - v) < tol * v && std::abs(f[i - j] - v) < tol * v) ++j;
    // the scan reached the grid edge: h is censored, not measured
    if (j > i || i + j >= f.size()) continue;
    xs.push_back(f.x(i));
    hs.push_back(static_cast<double>(j - 1) * f.dx());
  }
  RatioCurve c;
  c.label = "h(x)";
  c.x_points = xs;
  c.ratios = hs;
  std::vector<double> tail;
  std::vector<double> lx, ly;
  const double x_hi = xs.empty() ? 0.0 : xs.back();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < x_hi / 10.0) continue;
    tail.push_back(hs[i]);
    if (hs[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(hs[i]));
    }
  }
  c.limit_estimate = median(tail);
  c.trend_slope = ls_slope(lx, ly);
  return c;
}

nlohmann::json to_json(const RatioCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < c.x_points.size(); ++i) pts.push_back({c.x_points[i], c.ratios[i]});
  return {{"label", c.label},
          {"limit_estimate", c.limit_estimate},
          {"trend_slope", c.trend_slope},
          {"divergent", c.divergent},
          {"points", pts}};
}

nlohmann::json to_json(const Diagnosis& d) {
  const auto& v = d.verdict;
  nlohmann::json j = {{"property", to_string(v.property)},
                      {"outcome", to_string(v.outcome)},
                      {"limit_estimate", v.limit_estimate},
                      {"target", v.target},
                      {"rel_error", v.rel_error},
                      {"window", {v.window.first, v.window.second}}};
  nlohmann::json curve = nlohmann::json::array();
  if (!d.curves.empty()) {
    const auto& c = d.curves.front();
    for (std::size_t i = 0; i < c.x_points.size(); ++i) curve.push_back({c.x_points[i], c.ratios[i]});
  }
  j["curve"] = curve;
  if (d.curves.size() > 1) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& c : d.curves) all.push_back(to_json(c));
    j["curves"] = all;
  }
  return j;
}

}  // namespace levytail
