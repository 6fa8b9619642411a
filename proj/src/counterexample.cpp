#include "levytail/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levytail/convolution.hpp"
#include "levytail/errors.hpp"

namespace levytail {

namespace {

double block_sum(const SemistableParams& p) {
  double s = 0.0;
  for (int n : p.n_k) s += 1.0 / std::sqrt(static_cast<double>(n));
  return s;
}

double snap_up(double x, double dx) { return std::ceil(x / dx - 1e-9) * dx; }

void check_nodes(double extent, double dx, std::size_t max_nodes) {
  const double nodes = extent / dx + 1.0;
  if (!(nodes <= static_cast<double>(max_nodes))) {
    std::ostringstream os;
    os << "grid needs " << nodes << " nodes, budget is " << max_nodes;
    fail(ErrorCode::GridInfeasible, os.str());
  }
}

}  // namespace

void SemistableParams::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidParams, what); };
  if (!(x0 > 1.0) || !std::isfinite(x0)) bad("x0 must exceed 1");
  if (!(b > x0) || !std::isfinite(b)) bad("b must exceed x0");
  if (!(delta > 0.0) || !(2.0 * delta < std::min(x0 - 1.0, b - x0)))
    bad("delta must satisfy 0 < 2 delta < min(x0 - 1, b - x0)");
  if (!(gamma > 0.0 && gamma < 1.0)) bad("gamma must lie in (0, 1)");
  if (n_k.empty()) bad("n_k must not be empty");
  for (std::size_t i = 0; i < n_k.size(); ++i) {
    if (n_k[i] < 1) bad("n_k must be positive integers");
    if (i > 0 && n_k[i] <= n_k[i - 1]) bad("n_k must be strictly increasing");
  }
  if (!renormalize && block_sum(*this) > 1.0 + 1e-12) bad("sum of n_k^{-1/2} exceeds 1 without renormalisation");
}

SemistableParams desk_preset() { return {}; }

JumpDensitySpec build_positive_levy(const SemistableParams& p) {
  p.validate();
  Semistable s;
  s.x0 = p.x0;
  s.b = p.b;
  s.delta = p.delta;
  s.gamma = p.gamma;
  s.x_lower = 1.0;
  JumpDensitySpec spec{JumpFamily(s), 1.0};
  validate(spec);
  return spec;
}

JumpDensitySpec build_negative_levy(const SemistableParams& p) {
  p.validate();
  PiecewiseConstant pc;
  for (int n : p.n_k) {
    const double scale = std::pow(p.b, n);
    const double height = 1.0 / (scale * p.delta * std::sqrt(static_cast<double>(n)));
    pc.blocks.push_back({-2.0 * scale * p.delta, -scale * p.delta, height});
  }
  std::sort(pc.blocks.begin(), pc.blocks.end(), [](const auto& a, const auto& c) { return a.lower < c.lower; });
  JumpDensitySpec spec{JumpFamily(pc), p.renormalize ? 1.0 : block_sum(p)};
  validate(spec);
  return spec;
}

bool FailureReport::increasing_f_fbar() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].ratio_f_fbar > points[i - 1].ratio_f_fbar)) return false;
  return true;
}

bool FailureReport::increasing_g2_g() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].ratio_g2_g > points[i - 1].ratio_g2_g)) return false;
  return true;
}

FailureReport demonstrate_failure(const SemistableParams& p, int k_max, double dx, std::size_t max_nodes) {
  p.validate();
  if (k_max < 1 || static_cast<std::size_t>(k_max) > p.n_k.size())
    fail(ErrorCode::InvalidParams, "k_max must lie in [1, size of n_k]");
  if (!(dx > 0.0) || !(dx < p.delta)) fail(ErrorCode::InvalidGrid, "dx must be positive and below delta");

  const double top = std::pow(p.b, p.n_k[static_cast<std::size_t>(k_max) - 1]);
  const double top_all = std::pow(p.b, p.n_k.back());
  // Negative side: several multiples of the widest block so that sums of a
  // few negative jumps stay on the grid.
  const double w = snap_up(16.0 * top_all * p.delta, dx);
  const double x_max = snap_up(top * (p.x0 + 2.0 * p.delta) + w + 1.0, dx);
  check_nodes(x_max + w, dx, max_nodes);

  const auto pos_spec = build_positive_levy(p);
  const auto neg_spec = build_negative_levy(p);
  const GridFunction gp = discretize(pos_spec, GridParams{0.0, x_max, dx});
  const GridFunction gm = discretize(neg_spec, GridParams{-w, 0.0, dx});
  const GeneralizedDensity fbar = compound_poisson_density(1.0, gp);
  const GeneralizedDensity flow = compound_poisson_density(1.0, gm);

  const double e1 = std::exp(-1.0);
  const double c_single = -std::expm1(-1.0) * e1 / -std::expm1(-2.0);
  const double c_cross = std::expm1(-1.0) * std::expm1(-1.0) / -std::expm1(-2.0);

  FailureReport r;
  r.params = p;
  r.dx = dx;
  for (int k = 1; k <= k_max; ++k) {
    const double x = std::pow(p.b, p.n_k[static_cast<std::size_t>(k) - 1]) * p.x0;
    const auto idx = static_cast<std::int64_t>(std::llround(x / dx));
    const double fb = fbar.cont.at_index(idx);
    const double f = c_single * fb + c_cross * convolution_at(flow.cont, fbar.cont, idx);
    const double g = gp.at_index(idx);
    const double g2 = convolution_at(gp, gp, idx) + 2.0 * convolution_at(gp, gm, idx);
    r.points.push_back({k, static_cast<double>(idx) * dx, f / fb, g2 / (2.0 * g)});
  }

  // al.d. of g+ over about ten periods.
  const double ald_max = snap_up(p.x0 * top_all * std::pow(p.b, 7), dx);
  check_nodes(ald_max, dx, max_nodes);
  r.ald = ald_check(discretize(pos_spec, GridParams{0.0, ald_max, dx}));
  return r;
}

nlohmann::json to_json(const SemistableParams& p) {
  return {{"x0", p.x0},       {"b", p.b},           {"delta", p.delta},
          {"gamma", p.gamma}, {"n_k", p.n_k},       {"renormalize", p.renormalize}};
}

nlohmann::json to_json(const FailureReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& q : r.points) pts.push_back({q.k, q.x, q.ratio_f_fbar, q.ratio_g2_g});
  return {{"params", to_json(r.params)},
          {"dx", r.dx},
          {"points", pts},
          {"increasing_f_fbar", r.increasing_f_fbar()},
          {"increasing_g2_g", r.increasing_g2_g()},
          {"ald_g_plus", to_json(r.ald)}};
}

}  // namespace levytail
