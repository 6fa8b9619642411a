#include "levytail/levy_model.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levytail/errors.hpp"
#include "quadrature.hpp"

namespace levytail {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidParams, what);
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// Fixed 8-point Gauss-Legendre rule.
const gsl_integration_glfixed_table* gl_table() {
  static gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(8);
  return t;
}

template <class F>
double gauss_legendre(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto* t = gl_table();
  double s = 0.0;
  for (std::size_t i = 0; i < t->n; ++i) {
    double xi = 0.0, wi = 0.0;
    gsl_integration_glfixed_point(a, b, i, &xi, &wi, t);
    s += wi * f(xi);
  }
  return s;
}

// ---- semistable ----

double ramp_width(const Semistable& s) {
  return std::min(0.5 * s.delta, std::min(s.x0 - 1.0, s.b - s.x0) - 2.0 * s.delta);
}

// x = b^k * u with u in [1, b).
std::pair<int, double> period_of(const Semistable& s, double x) {
  int k = static_cast<int>(std::floor(std::log(x) / std::log(s.b)));
  double u = x / std::pow(s.b, k);
  if (u < 1.0) {
    --k;
    u = x / std::pow(s.b, k);
  } else if (u >= s.b) {
    ++k;
    u = x / std::pow(s.b, k);
  }
  return {k, u};
}

double alpha_of_u(const Semistable& s, double u) {
  const double d = std::abs(u - s.x0);
  const double inner = 2.0 * s.delta;
  if (d == 0.0) return 0.0;
  if (d < inner) return -1.0 / std::log(d);
  const double edge = -1.0 / std::log(inner);
  const double w = ramp_width(s);
  if (d < inner + w) return edge + (1.0 - edge) * (d - inner) / w;
  return 1.0;
}

double raw_semistable(const Semistable& s, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return 0.0;
  return std::pow(x, -s.gamma - 1.0) * semistable_alpha(s, x);
}

std::vector<double> base_breaks(const Semistable& s) {
  const double w = ramp_width(s);
  const double i = 2.0 * s.delta;
  return {s.x0 - i - w, s.x0 - i, s.x0, s.x0 + i, s.x0 + i + w};
}

// int_{u1}^{u2} t^{-gamma-1} alpha(t) dt for 1 <= u1 <= u2 <= b.
double base_integral(const Semistable& s, double u1, double u2) {
  if (!(u2 > u1)) return 0.0;
  auto f = [&s](double t) { return std::pow(t, -s.gamma - 1.0) * alpha_of_u(s, t); };
  auto br = base_breaks(s);
  return detail::integrate(f, u1, u2, br, {0.0, 1e-12});
}

double base_period_integral(const Semistable& s) {
  static thread_local Semistable cached{};
  static thread_local double value = -1.0;
  if (value < 0.0 || cached.x0 != s.x0 || cached.b != s.b || cached.delta != s.delta ||
      cached.gamma != s.gamma) {
    cached = s;
    value = base_integral(s, 1.0, s.b);
  }
  return value;
}

// int_a^inf raw density, a > 0.
double raw_tail(const Semistable& s, double a) {
  const auto [k, u] = period_of(s, a);
  const double scale = std::pow(s.b, -static_cast<double>(k) * s.gamma);
  const double rest = base_period_integral(s) / (1.0 - std::pow(s.b, -s.gamma));
  return scale * (base_integral(s, u, s.b) + std::pow(s.b, -s.gamma) * rest);
}

// int_a^b raw density, 0 < a < b.
double raw_between(const Semistable& s, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) return raw_tail(s, a);
  const auto [ka, ua] = period_of(s, a);
  const auto [kb, ub] = period_of(s, b);
  if (kb - ka > 2) return raw_tail(s, a) - raw_tail(s, b);
  double total = 0.0;
  for (int k = ka; k <= kb; ++k) {
    const double lo = (k == ka) ? ua : 1.0;
    const double hi = (k == kb) ? ub : s.b;
    total += std::pow(s.b, -static_cast<double>(k) * s.gamma) * base_integral(s, lo, hi);
  }
  return total;
}

double semistable_scale(const Semistable& s) { return s.x_lower > 0.0 ? semistable_norm(s) : 1.0; }

double semistable_mass(const Semistable& s, double a, double b) {
  a = std::max(a, s.x_lower);
  if (!(b > a)) return 0.0;
  if (a <= 0.0) return kInf;
  return semistable_scale(s) * raw_between(s, a, b);
}

// ---- piecewise constant ----

double block_total(const PiecewiseConstant& p) {
  double t = 0.0;
  for (const auto& blk : p.blocks) t += blk.height * (blk.upper - blk.lower);
  return t;
}

double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

// ---- tabulated ----

// Exact integral of the interpolant of GridFunction::operator() over (a, b].
double tabulated_integral(const GridFunction& t, double a, double b) {
  if (!(b > a)) return 0.0;
  const double dx = t.dx();
  const double left = t.x_min() - 0.5 * dx;
  const double right = t.x_max();
  double total = 0.0;
  // flat piece [x_min - dx/2, x_min]
  total += t[0] * overlap(a, b, left, t.x_min());
  // linear pieces
  const double lo = std::max(a, t.x_min());
  const double hi = std::min(b, right);
  if (hi > lo) {
    auto idx = [&](double x) {
      return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((x - t.x_min()) / dx)), 0,
                                      static_cast<std::int64_t>(t.size()) - 2);
    };
    if (t.size() == 1) {
      total += 0.0;
    } else {
      for (std::int64_t i = idx(lo); i <= idx(hi); ++i) {
        const double x0 = t.x(static_cast<std::size_t>(i));
        const double x1 = x0 + dx;
        const double p = std::max(lo, x0);
        const double q = std::min(hi, x1);
        if (q <= p) continue;
        total += 0.5 * (q - p) * (t(p) + t(q));
      }
    }
  }
  // beyond the last node
  const double v = t[t.size() - 1];
  const double ta = std::max(a, right);
  if (b > ta && v > 0.0) {
    const auto& tail = t.tail();
    switch (tail.kind) {
      case TailKind::none: total += v * overlap(ta, b, right, right + 0.5 * dx); break;
      case TailKind::exponential: {
        const double r = tail.parameter;
        const double ea = std::exp(-r * (ta - right));
        const double eb = std::isinf(b) ? 0.0 : std::exp(-r * (b - right));
        total += v * (ea - eb) / r;
        break;
      }
      case TailKind::power_law: {
        const double p = tail.parameter;
        if (right <= 0.0) break;
        if (p <= 1.0 && std::isinf(b)) return kInf;
        auto prim = [&](double x) {
          if (std::isinf(x)) return 0.0;
          return std::abs(p - 1.0) < 1e-14 ? right * std::log(x / right)
                                            : right / (1.0 - p) * std::pow(x / right, 1.0 - p);
        };
        total += v * (prim(b) - prim(ta));
        break;
      }
    }
  }
  return total;
}

// ---- density ----

double density_impl(const JumpFamily& family, double x) {
  return std::visit(
      Overloaded{
          [](const NoJumps&) { return 0.0; },
          [x](const Exponential& e) { return x >= 0.0 ? e.rate * std::exp(-e.rate * x) : 0.0; },
          [x](const Pareto& p) {
            return x >= p.x_floor ? p.alpha * std::pow(p.x_floor, p.alpha) * std::pow(x, -p.alpha - 1.0) : 0.0;
          },
          [x](const Weibull& w) {
            if (!(x > 0.0)) return 0.0;
            const double z = x / w.scale;
            return w.shape / w.scale * std::pow(z, w.shape - 1.0) * std::exp(-std::pow(z, w.shape));
          },
          [x](const LogNormal& l) {
            if (!(x > 0.0)) return 0.0;
            const double z = (std::log(x) - l.mu) / l.sigma;
            return std::exp(-0.5 * z * z) / (x * l.sigma * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const Normal& n) {
            const double z = (x - n.mean) / n.sd;
            return std::exp(-0.5 * z * z) / (n.sd * std::sqrt(2.0 * std::numbers::pi));
          },
          [x](const Uniform& u) { return (x >= u.lower && x <= u.upper) ? 1.0 / (u.upper - u.lower) : 0.0; },
          [x](const Semistable& s) { return x > s.x_lower ? semistable_scale(s) * raw_semistable(s, x) : 0.0; },
          [x](const PiecewiseConstant& p) {
            double v = 0.0;
            for (const auto& blk : p.blocks)
              if (x > blk.lower && x <= blk.upper) v += blk.height;
            return v / block_total(p);
          },
          [x](const TwoSidedMixture& m) {
            return m.left_weight * family_density(*m.left, -x) + (1.0 - m.left_weight) * family_density(*m.right, x);
          },
          [x](const Tabulated& t) { return t.table(x); },
      },
      family.value);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double semistable_alpha(const Semistable& s, double x) {
  if (!(x > 0.0)) return 0.0;
  return alpha_of_u(s, period_of(s, x).second);
}

double semistable_norm(const Semistable& s) {
  return (1.0 - std::pow(s.b, -s.gamma)) / base_period_integral(s);
}

void validate(const JumpFamily& family) {
  std::visit(
      Overloaded{
          [](const NoJumps&) {},
          [](const Exponential& e) { require(positive_finite(e.rate), "exponential rate must be positive"); },
          [](const Pareto& p) {
            require(positive_finite(p.alpha), "pareto alpha must be positive");
            require(positive_finite(p.x_floor), "pareto x_floor must be positive");
          },
          [](const Weibull& w) {
            require(positive_finite(w.shape), "weibull shape must be positive");
            require(positive_finite(w.scale), "weibull scale must be positive");
          },
          [](const LogNormal& l) {
            require(std::isfinite(l.mu), "lognormal mu must be finite");
            require(positive_finite(l.sigma), "lognormal sigma must be positive");
          },
          [](const Normal& n) {
            require(std::isfinite(n.mean), "normal mean must be finite");
            require(positive_finite(n.sd), "normal sd must be positive");
          },
          [](const Uniform& u) {
            require(std::isfinite(u.lower) && std::isfinite(u.upper) && u.upper > u.lower,
                    "uniform needs lower < upper");
          },
          [](const Semistable& s) {
            require(s.x0 > 1.0 && std::isfinite(s.x0), "semistable needs x0 > 1");
            require(s.b > s.x0 && std::isfinite(s.b), "semistable needs b > x0");
            require(s.delta > 0.0 && 2.0 * s.delta < std::min(s.x0 - 1.0, s.b - s.x0),
                    "semistable needs 0 < 2 delta < min(x0 - 1, b - x0)");
            require(2.0 * s.delta < 1.0, "semistable needs 2 delta < 1");
            require(s.gamma > 0.0 && s.gamma < 1.0, "semistable needs gamma in (0, 1)");
            require(s.x_lower == 0.0 || s.x_lower == 1.0, "semistable x_lower must be 0 or 1");
          },
          [](const PiecewiseConstant& p) {
            require(!p.blocks.empty(), "piecewise-constant family needs blocks");
            for (const auto& blk : p.blocks) {
              require(std::isfinite(blk.lower) && std::isfinite(blk.upper) && blk.upper > blk.lower,
                      "block needs lower < upper");
              require(blk.height >= 0.0 && std::isfinite(blk.height), "block height must be non-negative");
            }
            require(block_total(p) > 0.0, "piecewise-constant family has zero mass");
          },
          [](const TwoSidedMixture& m) {
            require(m.left && m.right, "two-sided mixture needs both components");
            require(m.left_weight >= 0.0 && m.left_weight <= 1.0, "mixture weight must lie in [0, 1]");
            validate(*m.left);
            validate(*m.right);
            const auto* ls = m.left->get_if<Semistable>();
            const auto* rs = m.right->get_if<Semistable>();
            require(!(ls && ls->x_lower == 0.0) && !(rs && rs->x_lower == 0.0),
                    "raw semistable cannot be mixed");
          },
          [](const Tabulated& t) {
            if (t.table.tail().kind != TailKind::none)
              require(std::isfinite(t.table.tail().parameter) && t.table.tail().parameter > 0.0,
                      "tabulated tail parameter must be positive");
          },
      },
      family.value);
}

void validate(const JumpDensitySpec& spec) {
  validate(spec.family);
  const auto* s = spec.family.get_if<Semistable>();
  const bool raw = s && s->x_lower == 0.0;
  if (raw) {
    require(spec.infinite_activity(), "raw semistable density has infinite total mass");
  } else {
    require(!spec.infinite_activity(), "only the raw semistable family has infinite activity");
    require(spec.total_mass >= 0.0 && std::isfinite(spec.total_mass), "total_mass must be non-negative");
  }
  require(positive_finite(spec.cutoff_eps), "cutoff_eps must be positive");
}

void LevyTriplet::validate() const {
  require(std::isfinite(drift), "drift must be finite");
  require(gaussian >= 0.0 && std::isfinite(gaussian), "gaussian coefficient must be non-negative");
  levytail::validate(jumps);
}

const char* family_name(const JumpFamily& family) {
  return std::visit(Overloaded{
                        [](const NoJumps&) { return "none"; },
                        [](const Exponential&) { return "exponential"; },
                        [](const Pareto&) { return "pareto"; },
                        [](const Weibull&) { return "weibull"; },
                        [](const LogNormal&) { return "lognormal"; },
                        [](const Normal&) { return "normal"; },
                        [](const Uniform&) { return "uniform"; },
                        [](const Semistable&) { return "semistable"; },
                        [](const PiecewiseConstant&) { return "piecewise_constant"; },
                        [](const TwoSidedMixture&) { return "two_sided_mixture"; },
                        [](const Tabulated&) { return "tabulated"; },
                    },
                    family.value);
}

double family_density(const JumpFamily& family, double x) {
  const double v = density_impl(family, x);
  return (v > 0.0 && std::isfinite(v)) ? v : 0.0;
}

double evaluate_jump_density(const JumpDensitySpec& spec, double x) { return family_density(spec.family, x); }

double levy_density(const JumpDensitySpec& spec, double x) {
  const double g = family_density(spec.family, x);
  return spec.infinite_activity() ? g : spec.total_mass * g;
}

double family_mass_between(const JumpFamily& family, double a, double b) {
  if (!(b > a)) return 0.0;
  return std::visit(
      Overloaded{
          [](const NoJumps&) { return 0.0; },
          [&](const Exponential& e) {
            const double lo = std::max(a, 0.0);
            if (!(b > lo)) return 0.0;
            const double sa = std::exp(-e.rate * lo);
            return std::isinf(b) ? sa : sa * -std::expm1(-e.rate * (b - lo));
          },
          [&](const Pareto& p) {
            const double lo = std::max(a, p.x_floor);
            if (!(b > lo)) return 0.0;
            const double sa = std::pow(p.x_floor / lo, p.alpha);
            return std::isinf(b) ? sa : sa * -std::expm1(-p.alpha * std::log1p((b - lo) / lo));
          },
          [&](const Weibull& w) {
            const double lo = std::max(a, 0.0);
            if (!(b > lo)) return 0.0;
            if (lo == 0.0) return std::isinf(b) ? 1.0 : -std::expm1(-std::pow(b / w.scale, w.shape));
            const double za = std::pow(lo / w.scale, w.shape);
            const double sa = std::exp(-za);
            if (std::isinf(b)) return sa;
            const double gap = za * std::expm1(w.shape * std::log1p((b - lo) / lo));
            return sa * -std::expm1(-gap);
          },
          [&](const LogNormal& l) {
            const double lo = std::max(a, 0.0);
            if (!(b > lo)) return 0.0;
            auto surv = [&](double x) {
              if (x <= 0.0) return 1.0;
              if (std::isinf(x)) return 0.0;
              return normal_cdf(-(std::log(x) - l.mu) / l.sigma);
            };
            if (!std::isinf(b) && b - lo < 1e-2 * std::max(lo, std::exp(l.mu - 4.0 * l.sigma)))
              return gauss_legendre([&](double x) { return density_impl(family, x); }, lo, b);
            return std::max(0.0, surv(lo) - surv(b));
          },
          [&](const Normal& n) {
            auto cdf = [&](double x) {
              if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
              return normal_cdf((x - n.mean) / n.sd);
            };
            auto surv = [&](double x) {
              if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
              return normal_cdf(-(x - n.mean) / n.sd);
            };
            if (!std::isinf(a) && !std::isinf(b) && b - a < 1e-2 * n.sd)
              return gauss_legendre([&](double x) { return density_impl(family, x); }, a, b);
            return a >= n.mean ? std::max(0.0, surv(a) - surv(b)) : std::max(0.0, cdf(b) - cdf(a));
          },
          [&](const Uniform& u) { return overlap(a, b, u.lower, u.upper) / (u.upper - u.lower); },
          [&](const Semistable& s) { return semistable_mass(s, a, b); },
          [&](const PiecewiseConstant& p) {
            double m = 0.0;
            for (const auto& blk : p.blocks) m += blk.height * overlap(a, b, blk.lower, blk.upper);
            return m / block_total(p);
          },
          [&](const TwoSidedMixture& m) {
            return m.left_weight * family_mass_between(*m.left, -b, -a) +
                   (1.0 - m.left_weight) * family_mass_between(*m.right, a, b);
          },
          [&](const Tabulated& t) { return tabulated_integral(t.table, a, b); },
      },
      family.value);
}

double family_survival(const JumpFamily& family, double x) { return family_mass_between(family, x, kInf); }

std::optional<double> family_quantile(const JumpFamily& family, double u) {
  if (!(u > 0.0 && u < 1.0)) return std::nullopt;
  return std::visit(Overloaded{
                        [&](const Exponential& e) -> std::optional<double> { return -std::log1p(-u) / e.rate; },
                        [&](const Pareto& p) -> std::optional<double> {
                          return p.x_floor * std::pow(1.0 - u, -1.0 / p.alpha);
                        },
                        [&](const Weibull& w) -> std::optional<double> {
                          return w.scale * std::pow(-std::log1p(-u), 1.0 / w.shape);
                        },
                        [&](const Uniform& un) -> std::optional<double> {
                          return un.lower + u * (un.upper - un.lower);
                        },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    family.value);
}

std::vector<double> family_breakpoints(const JumpFamily& family, double a, double b) {
  std::vector<double> pts;
  auto add = [&](double x) {
    if (x > a && x < b) pts.push_back(x);
  };
  std::visit(Overloaded{
                 [](const NoJumps&) {},
                 [&](const Exponential&) { add(0.0); },
                 [&](const Pareto& p) { add(p.x_floor); },
                 [&](const Weibull&) { add(0.0); },
                 [&](const LogNormal&) { add(0.0); },
                 [](const Normal&) {},
                 [&](const Uniform& u) {
                   add(u.lower);
                   add(u.upper);
                 },
                 [&](const Semistable& s) {
                   add(s.x_lower);
                   const double lo = std::max(a, s.x_lower > 0.0 ? s.x_lower : 1e-300);
                   if (!(b > lo)) return;
                   const double hi = std::isinf(b) ? lo * std::pow(s.b, 64.0) : b;
                   const auto br = base_breaks(s);
                   for (int k = period_of(s, lo).first; k <= period_of(s, hi).first; ++k) {
                     const double scale = std::pow(s.b, k);
                     add(scale);
                     for (double u : br) add(scale * u);
                   }
                 },
                 [&](const PiecewiseConstant& p) {
                   for (const auto& blk : p.blocks) {
                     add(blk.lower);
                     add(blk.upper);
                   }
                 },
                 [&](const TwoSidedMixture& m) {
                   add(0.0);
                   for (double x : family_breakpoints(*m.left, -b, -a)) add(-x);
                   for (double x : family_breakpoints(*m.right, a, b)) add(x);
                 },
                 [&](const Tabulated& t) {
                   add(t.table.x_min() - 0.5 * t.table.dx());
                   add(t.table.x_min());
                   add(t.table.x_max());
                 },
             },
             family.value);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

TailModel natural_tail(const JumpFamily& family, double x_max) {
  return std::visit(Overloaded{
                        [](const Exponential& e) { return TailModel::exponential(e.rate); },
                        [](const Pareto& p) { return TailModel::power_law(p.alpha + 1.0); },
                        [](const Semistable& s) { return TailModel::power_law(s.gamma + 1.0); },
                        [&](const Weibull& w) {
                          if (!(x_max > 0.0)) return TailModel::none();
                          return TailModel::power_law(1.0 - w.shape + w.shape * std::pow(x_max / w.scale, w.shape));
                        },
                        [&](const LogNormal& l) {
                          if (!(x_max > 0.0)) return TailModel::none();
                          const double p = 1.0 + (std::log(x_max) - l.mu) / (l.sigma * l.sigma);
                          return p > 0.0 ? TailModel::power_law(p) : TailModel::none();
                        },
                        [&](const Normal& n) {
                          const double r = (x_max - n.mean) / (n.sd * n.sd);
                          return r > 0.0 ? TailModel::exponential(r) : TailModel::none();
                        },
                        [&](const TwoSidedMixture& m) { return natural_tail(*m.right, x_max); },
                        [](const Tabulated& t) { return t.table.tail(); },
                        [](const auto&) { return TailModel::none(); },
                    },
                    family.value);
}

double levy_integrability_check(const JumpDensitySpec& spec) {
  validate(spec);
  if (spec.family.get_if<NoJumps>() || spec.total_mass == 0.0) return 0.0;

  double total = 0.0;
  for (int side : {1, -1}) {
    auto piece = [&](double lo, double hi) {
      // integral of (1 ^ x^2) nu over side*(lo, hi]
      auto h = [&](double x) {
        const double w = std::min(1.0, x * x);
        return w * levy_density(spec, side * x);
      };
      std::vector<double> br;
      if (side > 0) {
        br = family_breakpoints(spec.family, lo, hi);
      } else {
        for (double x : family_breakpoints(spec.family, -hi, -lo)) br.push_back(-x);
      }
      return detail::integrate(h, lo, hi, br, {0.0, 1e-12});
    };
    // Pieces with finite side mass can be skipped when empty.
    const bool finite = !spec.infinite_activity();
    if (finite) {
      const double side_mass =
          side > 0 ? family_mass_between(spec.family, 0.0, kInf) : family_mass_between(spec.family, -kInf, 0.0);
      if (!(side_mass > 0.0)) continue;
    }
    // Dyadic pieces towards infinity and towards zero, each summed until a
    // Cauchy criterion holds.
    for (int direction : {1, -1}) {
      double sum = 0.0;
      int small_run = 0;
      int growth_run = 0;
      double prev = -1.0;
      bool converged = false;
      for (int k = 0; k < 1000; ++k) {
        const double lo = direction > 0 ? std::ldexp(1.0, k) : std::ldexp(1.0, -k - 1);
        const double hi = direction > 0 ? std::ldexp(1.0, k + 1) : std::ldexp(1.0, -k);
        const double p = piece(lo, hi);
        if (!std::isfinite(p)) fail(ErrorCode::DivergentLevyMeasure, "Levy measure integral is not finite");
        sum += p;
        if (prev > 0.0 && p >= 0.999 * prev)
          ++growth_run;
        else
          growth_run = 0;
        if (growth_run >= 8)
          fail(ErrorCode::DivergentLevyMeasure, "dyadic pieces of the Levy measure integral do not decay");
        prev = p;
        if (sum > 0.0 && p <= 1e-15 * sum)
          ++small_run;
        else
          small_run = 0;
        if (small_run >= 3) {
          converged = true;
          break;
        }
        if (sum == 0.0 && finite) {
          const double rest = direction > 0 ? (side > 0 ? family_mass_between(spec.family, hi, kInf)
                                                        : family_mass_between(spec.family, -kInf, -hi))
                                            : (side > 0 ? family_mass_between(spec.family, 0.0, lo)
                                                        : family_mass_between(spec.family, -lo, 0.0));
          if (!(rest > 0.0)) {
            converged = true;
            break;
          }
        }
      }
      if (!converged && sum > 0.0) fail(ErrorCode::DivergentLevyMeasure, "Levy measure integral does not stabilise");
      total += sum;
    }
  }
  return total;
}

namespace {

std::vector<double> cell_masses(const JumpFamily& family, const GridParams& grid, double lower_cut) {
  const std::int64_t first = grid.first_index();
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  std::vector<double> m(n, 0.0);

  const auto* tab = family.get_if<Tabulated>();
  const bool aligned = tab && same_spacing(tab->table.dx(), dx);

  const auto* semi = family.get_if<Semistable>();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(first + static_cast<std::int64_t>(i)) * dx;
    double lo = std::max(x - 0.5 * dx, lower_cut);
    const double hi = x + 0.5 * dx;
    if (!(hi > lo)) continue;
    if (aligned) {
      const std::int64_t k = first + static_cast<std::int64_t>(i);
      if (k >= tab->table.first_index() && k <= tab->table.last_index() && lower_cut == -kInf) {
        m[i] = tab->table.at_index(k) * dx;
        continue;
      }
    }
    if (semi) {
      lo = std::max(lo, semi->x_lower);
      if (!(hi > lo) || lo <= 0.0) continue;
      // Gauss-Legendre between breaks, adaptive around the dip centres.
      auto br = family_breakpoints(family, lo, hi);
      br.insert(br.begin(), lo);
      br.push_back(hi);
      const double c = semistable_scale(*semi);
      double s = 0.0;
      for (std::size_t j = 0; j + 1 < br.size(); ++j) {
        const double p = br[j], q = br[j + 1];
        const double mid_u = period_of(*semi, 0.5 * (p + q)).second;
        if (std::abs(mid_u - semi->x0) < 2.0 * semi->delta) {
          s += detail::integrate_singular([&](double t) { return raw_semistable(*semi, t); }, p, q, {0.0, 1e-10});
        } else {
          s += gauss_legendre([&](double t) { return raw_semistable(*semi, t); }, p, q);
        }
      }
      m[i] = c * s;
      continue;
    }
    m[i] = family_mass_between(family, lo, hi);
  }
  return m;
}

GridFunction finish(const JumpFamily& family, const GridParams& grid, std::vector<double> masses, double leakage,
                    double tol) {
  for (double& v : masses) {
    if (!(v > 0.0) || !std::isfinite(v)) v = 0.0;
    v /= grid.dx;
  }
  GridFunction out(grid, std::move(masses), natural_tail(family, grid.x_max), leakage);
  const double simpson = out.simpson_mass();
  const double trap = out.trapezoid_mass();
  if (out.size() >= 3 && simpson > 0.0 && std::abs(trap - simpson) > tol * std::abs(simpson)) {
    std::ostringstream os;
    os << "grid too coarse: trapezoid mass " << trap << " vs Simpson mass " << simpson;
    fail(ErrorCode::GridTooCoarse, os.str());
  }
  return out;
}

}  // namespace

GridFunction discretize(const JumpFamily& family, const GridParams& grid, double tol) {
  grid.validate();
  validate(family);
  if (const auto* s = family.get_if<Semistable>(); s && s->x_lower == 0.0)
    fail(ErrorCode::CutoffRequired, "raw semistable density needs a cutoff to be discretised");
  auto masses = cell_masses(family, grid, -kInf);
  const double lo = static_cast<double>(grid.first_index()) * grid.dx - 0.5 * grid.dx;
  const double hi = static_cast<double>(grid.last_index()) * grid.dx + 0.5 * grid.dx;
  const double leak = family_mass_between(family, -kInf, lo) + family_mass_between(family, hi, kInf);
  return finish(family, grid, std::move(masses), std::isfinite(leak) ? leak : 0.0, tol);
}

GridFunction discretize(const JumpDensitySpec& spec, const GridParams& grid, double tol) {
  validate(spec);
  if (!spec.infinite_activity()) return discretize(spec.family, grid, tol);
  // Levy density restricted to |x| > cutoff_eps, not normalised.
  grid.validate();
  auto masses = cell_masses(spec.family, grid, spec.cutoff_eps);
  return finish(spec.family, grid, std::move(masses), 0.0, tol);
}

G1 normalize_g1(const JumpDensitySpec& spec, const GridParams& grid) {
  validate(spec);
  grid.validate();
  const double s1 = family_survival(spec.family, 1.0);
  const double tail_mass = spec.infinite_activity() ? s1 : spec.total_mass * s1;
  if (!(tail_mass > 1e-300) || !(s1 > 0.0) || !std::isfinite(s1))
    fail(ErrorCode::EmptyTail, "nu((1, inf)) vanishes");

  const std::int64_t first = grid.first_index();
  const std::size_t n = grid.size();
  const double dx = grid.dx;
  std::vector<double> m = cell_masses(spec.family, grid, 1.0);
  // Mass of the cell straddling x = 1 moves to the first node beyond 1, so
  // that g1 vanishes at every node x <= 1.
  double carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(first + static_cast<std::int64_t>(i)) * dx;
    if (x <= 1.0) {
      carry += m[i];
      m[i] = 0.0;
    } else {
      m[i] += carry;
      carry = 0.0;
      break;
    }
  }
  for (double& v : m) v = (v > 0.0 && std::isfinite(v)) ? v / (s1 * dx) : 0.0;
  const double hi = static_cast<double>(grid.last_index()) * dx + 0.5 * dx;
  double leak = family_survival(spec.family, std::max(hi, 1.0)) / s1 + carry / s1;
  GridFunction g1(grid, std::move(m), natural_tail(spec.family, grid.x_max), leak);
  return {std::move(g1), tail_mass};
}

}  // namespace levytail
