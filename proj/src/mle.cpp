#include "levytail/mle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "levytail/charfn.hpp"
#include "levytail/diagnostics.hpp"
#include "levytail/errors.hpp"
#include "quadrature.hpp"

namespace levytail {

namespace {

double uniform01(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

// Jumps of a Levy measure restricted to |y| > eps (eps = 0 for finite
// activity), drawn by closed-form quantile or by inverse CDF over a
// log-spaced table.
class JumpSampler {
 public:
  JumpSampler(const JumpDensitySpec& spec, double eps) : spec_(spec) {
    const bool infinite = spec.infinite_activity();
    if (!infinite && spec.family.get_if<NoJumps>()) return;
    if (!infinite && spec.total_mass == 0.0) return;
    if (!infinite && family_quantile(spec.family, 0.5)) {
      closed_form_ = true;
      rate_ = spec.total_mass;
      return;
    }
    build_table(infinite ? eps : 0.0);
    const double mass = cdf_.empty() ? 0.0 : cdf_.back();
    rate_ = infinite ? mass : spec.total_mass;
    if (infinite) small_variance_ = small_jump_variance(eps);
  }

  double rate() const { return rate_; }
  double small_variance() const { return small_variance_; }

  double draw(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    if (closed_form_) return *family_quantile(spec_.family, u);
    const double target = u * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
    const double below = i == 0 ? 0.0 : cdf_[i - 1];
    const double w = cdf_[i] - below;
    const double t = w > 0.0 ? (target - below) / w : 0.5;
    return edges_[i].first + t * (edges_[i].second - edges_[i].first);
  }

 private:
  double mass(double a, double b) const { return std::max(0.0, family_mass_between(spec_.family, a, b)); }

  double side_tail_end(bool positive, double lo) const {
    const double total = positive ? mass(lo, kInf) : mass(-kInf, -lo);
    double x = std::max(1.0, 2.0 * lo);
    while (x < 1e300) {
      const double t = positive ? mass(x, kInf) : mass(-kInf, -x);
      if (t <= 1e-16 * total) break;
      x *= 2.0;
    }
    return x;
  }

  void build_table(double eps) {
    const double lo = eps > 0.0 ? eps : 1e-12;
    constexpr int kPerDecade = 400;
    std::vector<std::pair<double, double>> cells;
    for (bool positive : {false, true}) {
      const double side = positive ? mass(lo, kInf) : mass(-kInf, -lo);
      if (!(side > 0.0)) continue;
      const double hi = side_tail_end(positive, lo);
      const int n = std::max(1, static_cast<int>(std::ceil(kPerDecade * std::log10(hi / lo))));
      std::vector<std::pair<double, double>> part;
      double a = lo;
      for (int j = 1; j <= n; ++j) {
        const double b = j == n ? hi : lo * std::pow(hi / lo, static_cast<double>(j) / n);
        part.emplace_back(a, b);
        a = b;
      }
      if (!positive) {
        for (auto& c : part) c = {-c.second, -c.first};
        std::reverse(part.begin(), part.end());
      }
      cells.insert(cells.end(), part.begin(), part.end());
    }
    // Mass in [-lo, lo] for finite activity.
    if (eps == 0.0 && mass(-lo, lo) > 0.0) {
      auto it = std::lower_bound(cells.begin(), cells.end(), 0.0,
                                 [](const std::pair<double, double>& c, double v) { return c.second <= v; });
      cells.insert(it, {-lo, lo});
    }
    double acc = 0.0;
    for (const auto& c : cells) {
      const double m = mass(c.first, c.second);
      if (!(m > 0.0)) continue;
      acc += m;
      edges_.push_back(c);
      cdf_.push_back(acc);
    }
  }

  double small_jump_variance(double eps) const {
    double total = 0.0;
    for (bool positive : {false, true}) {
      auto h = [&](double y) { return y * y * levy_density(spec_, positive ? y : -y); };
      double hi = eps;
      int small = 0;
      for (int j = 0; j < 200; ++j) {
        const double a = 0.5 * hi;
        const auto br = positive ? family_breakpoints(spec_.family, a, hi) : std::vector<double>{};
        const double piece = detail::integrate(h, a, hi, br);
        total += piece;
        if (piece <= 1e-16 * total) {
          if (++small >= 3) break;
        } else {
          small = 0;
        }
        hi = a;
      }
    }
    return total;
  }

  const JumpDensitySpec& spec_;
  bool closed_form_ = false;
  double rate_ = 0.0;
  double small_variance_ = 0.0;
  std::vector<std::pair<double, double>> edges_;
  std::vector<double> cdf_;
};

double normal_pdf(double x, double sd) {
  const double z = x / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json verdict_only(const Diagnosis& d) {
  auto j = to_json(d);
  j.erase("curve");
  j.erase("curves");
  return j;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> sample_id_distribution(const LevyTriplet& triplet, std::size_t n, std::uint64_t seed,
                                           std::optional<double> cutoff) {
  triplet.validate();
  const auto& jumps = triplet.jumps;
  if (jumps.infinite_activity() && !cutoff)
    fail(ErrorCode::CutoffRequired, "infinite-activity Levy measure needs a small-jump cutoff for sampling");
  if (cutoff && !(*cutoff > 0.0)) fail(ErrorCode::InvalidInput, "cutoff must be positive");
  const JumpSampler sampler(jumps, jumps.infinite_activity() ? *cutoff : 0.0);
  const double sd = std::sqrt(triplet.gaussian * triplet.gaussian + sampler.small_variance());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::poisson_distribution<long long> poisson(sampler.rate() > 0.0 ? sampler.rate() : 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    double v = triplet.drift;
    if (sd > 0.0) v += sd * normal(rng);
    if (sampler.rate() > 0.0) {
      const long long count = poisson(rng);
      for (long long j = 0; j < count; ++j) v += sampler.draw(rng);
    }
    x = v;
  }
  return out;
}

LikelihoodDensity::LikelihoodDensity(const LevyTriplet& triplet, const GridParams& grid)
    : triplet_(triplet), grid_(grid) {
  triplet_.validate();
  grid_.validate();
  const auto& jumps = triplet_.jumps;
  const bool no_jumps = jumps.family.get_if<NoJumps>() || (!jumps.infinite_activity() && jumps.total_mass == 0.0);
  if (no_jumps) {
    kind_ = triplet_.gaussian > 0.0 ? Kind::gaussian : Kind::degenerate;
    atom_ = kind_ == Kind::degenerate ? 1.0 : 0.0;
    return;
  }
  if (!jumps.infinite_activity() && triplet_.gaussian == 0.0) {
    // e^{-lambda} delta + lambda e^{-lambda} g + R, R = sum_{n>=2} of the series
    kind_ = Kind::compound_poisson;
    lambda_ = jumps.total_mass;
    atom_ = std::exp(-lambda_);
    const GridFunction g = discretize(jumps.family, grid_);
    CfSamples cf = dft_cf(GeneralizedDensity(0.0, g), 2);
    for (auto& v : cf.values) {
      const Complex w = lambda_ * v;
      v = atom_ * (std::exp(w) - 1.0 - w);
    }
    cf.phase_unwrapped.clear();
    table_ = invert_cf_to_density(cf, grid_, 0.0).density;
    return;
  }
  kind_ = Kind::general;
  LevyTriplet centred = triplet_;
  centred.drift = 0.0;
  auto cf = [centred](double z) { return std::exp(levy_khintchine_exponent(centred, z)); };
  table_ = invert_cf_to_density(cf, grid_, 0.0, 1e-10, std::int64_t{1} << 18).density;
}

double LikelihoodDensity::continuous(double x) const {
  const double y = x - triplet_.drift;
  switch (kind_) {
    case Kind::degenerate:
      return 0.0;
    case Kind::gaussian:
      return normal_pdf(y, triplet_.gaussian);
    case Kind::compound_poisson:
      if (y >= grid_.x_min && y <= grid_.x_max)
        return lambda_ * atom_ * family_density(triplet_.jumps.family, y) + std::max(0.0, (*table_)(y));
      return levy_density(triplet_.jumps, y);
    case Kind::general:
      if (y >= grid_.x_min && y <= grid_.x_max) return std::max(0.0, (*table_)(y));
      return levy_density(triplet_.jumps, y);
  }
  return 0.0;
}

double LikelihoodDensity::log_density(double x, std::size_t* floored) const {
  if (atom_ > 0.0 && x == triplet_.drift) return std::log(atom_);
  const double v = continuous(x);
  const double l = v > 0.0 ? std::log(v) : -kInf;
  if (!(l >= kLogFloor)) {
    if (floored) ++*floored;
    return kLogFloor;
  }
  return l;
}

LevyTriplet ParametricFamily::at(const std::vector<double>& theta) const {
  if (theta.size() != parameters.size()) fail(ErrorCode::InvalidInput, "parameter vector has the wrong dimension");
  ModelSpec m = base;
  for (std::size_t i = 0; i < theta.size(); ++i) m = with_parameter(m, parameters[i], theta[i]);
  return make_triplet(m);
}

ParametricFamily cp_weibull_scale(double lambda, double shape) {
  ParametricFamily f;
  f.base.family.name = "weibull";
  f.base.family.params = {{"shape", shape}, {"scale", 1.0}};
  f.base.total_mass = lambda;
  f.parameters = {"scale"};
  f.grid = GridParams{0.0, 600.0, 0.01};
  return f;
}

ParametricFamily cp_exponential_intensity(double rate) {
  ParametricFamily f;
  f.base.family.name = "exponential";
  f.base.family.params = {{"rate", rate}};
  f.base.total_mass = 1.0;
  f.parameters = {"total_mass"};
  f.grid = GridParams{0.0, 100.0 / rate, 0.005 / rate};
  return f;
}

LogLikelihood evaluate_log_likelihood(const LikelihoodDensity& f, const std::vector<double>& samples) {
  if (samples.empty()) fail(ErrorCode::InvalidInput, "empty sample set");
  LogLikelihood r;
  double s = 0.0;
  for (double x : samples) s += f.log_density(x, &r.floored);
  r.value = s / static_cast<double>(samples.size());
  return r;
}

double log_likelihood(const std::vector<double>& theta, const std::vector<double>& samples,
                      const ParametricFamily& family) {
  if (samples.empty()) fail(ErrorCode::InvalidInput, "empty sample set");
  return evaluate_log_likelihood(LikelihoodDensity(family.at(theta), family.grid), samples).value;
}

FitResult fit_mle(const std::vector<double>& samples, const ParametricFamily& family, const Box& box,
                  const FitOptions& options) {
  if (samples.empty()) fail(ErrorCode::InvalidInput, "empty sample set");
  const std::size_t d = family.parameters.size();
  if (box.size() != d) fail(ErrorCode::InvalidInput, "box dimension does not match the family");
  for (const auto& [lo, hi] : box)
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) fail(ErrorCode::InvalidInput, "box must be compact");
  if (options.scan_points < 2 || d > 3) fail(ErrorCode::InvalidInput, "unsupported scan configuration");

  std::map<std::vector<double>, LogLikelihood> cache;
  auto objective = [&](const std::vector<double>& theta) {
    auto it = cache.find(theta);
    if (it != cache.end()) return it->second.value;
    const auto ll = evaluate_log_likelihood(LikelihoodDensity(family.at(theta), family.grid), samples);
    cache.emplace(theta, ll);
    return ll.value;
  };

  // Coarse scan over the product grid.
  const auto pts = static_cast<std::size_t>(options.scan_points);
  std::vector<double> step(d);
  std::vector<std::size_t> counts(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    counts[i] = box[i].first == box[i].second ? 1 : pts;
    step[i] = counts[i] > 1 ? (box[i].second - box[i].first) / static_cast<double>(pts - 1) : 0.0;
    total *= counts[i];
  }
  std::vector<double> best(d);
  double best_val = -kInf;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> theta(d);
    std::size_t r = flat;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = r % counts[i];
      r /= counts[i];
      theta[i] = k + 1 == counts[i] ? box[i].second : box[i].first + static_cast<double>(k) * step[i];
    }
    const double v = objective(theta);
    if (v > best_val) {
      best_val = v;
      best = theta;
    }
  }

  // Golden-section refinement per coordinate.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int cycle = 0; cycle < 50; ++cycle) {
    double moved = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (counts[i] == 1) continue;
      double a = std::max(box[i].first, best[i] - step[i]);
      double b = std::min(box[i].second, best[i] + step[i]);
      auto at = [&](double t) {
        auto theta = best;
        theta[i] = t;
        return objective(theta);
      };
      const double start = best[i];
      double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
      double fc = at(c), fe = at(e);
      double arg = start, val = best_val;
      auto consider = [&](double t, double v) {
        if (v > val) {
          val = v;
          arg = t;
        }
      };
      consider(c, fc);
      consider(e, fe);
      while (b - a > options.tol) {
        if (fc >= fe) {
          b = e;
          e = c;
          fe = fc;
          c = b - inv_phi * (b - a);
          fc = at(c);
          consider(c, fc);
        } else {
          a = c;
          c = e;
          fc = fe;
          e = a + inv_phi * (b - a);
          fe = at(e);
          consider(e, fe);
        }
      }
      moved = std::max(moved, std::abs(arg - start));
      best[i] = arg;
      best_val = val;
      step[i] = std::max(options.tol, 2.0 * std::abs(arg - start) + options.tol);
    }
    if (moved <= options.tol) break;
  }

  FitResult out;
  out.theta_hat = best;
  out.loglik = best_val;
  out.evaluations = cache.size();
  out.box = box;
  out.floored_points = cache.at(best).floored;
  out.converged = true;
  for (std::size_t i = 0; i < d; ++i) {
    if (counts[i] == 1) continue;
    if (best[i] - box[i].first < options.tol || box[i].second - best[i] < options.tol) out.converged = false;
  }
  return out;
}

nlohmann::json check_consistency_hypotheses(const ParametricFamily& family, const std::vector<double>& theta0) {
  const LevyTriplet t = family.at(theta0);
  const GridParams grid{0.0, family.grid.x_max, family.grid.dx};
  const G1 g1 = normalize_g1(t.jumps, grid);
  double sup = 0.0;
  for (double v : g1.g1.values()) sup = std::max(sup, v);
  const bool bounded = std::isfinite(sup) && sup < 1e300;
  const Diagnosis ani = ani_check(g1.g1);
  const Diagnosis sub = subexp_check(GeneralizedDensity(0.0, g1.g1));
  nlohmann::json j = {{"g1_bounded", bounded}, {"g1_sup", sup}, {"ani", verdict_only(ani)},
                      {"subexp", verdict_only(sub)}};
  if (!bounded || ani.verdict.outcome == Outcome::fail || sub.verdict.outcome == Outcome::fail)
    fail(ErrorCode::HypothesisCheckFailed, "consistency hypotheses not met: " + j.dump());
  return j;
}

unsigned worker_threads() {
  if (const char* env = std::getenv("LEVYTAIL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentReport consistency_experiment(const ParametricFamily& family, const std::vector<double>& theta0,
                                        const std::vector<std::size_t>& n_grid, std::size_t reps,
                                        std::uint64_t seed, const Box& box, const FitOptions& options) {
  if (n_grid.empty() || reps == 0) fail(ErrorCode::InvalidInput, "experiment needs sample sizes and replications");
  for (std::size_t n : n_grid)
    if (n == 0) fail(ErrorCode::InvalidInput, "sample sizes must be positive");

  ExperimentReport report;
  report.parameters = family.parameters;
  report.theta0 = theta0;
  report.seed = seed;
  report.hypothesis_checks = check_consistency_hypotheses(family, theta0);

  const LevyTriplet truth = family.at(theta0);
  const std::size_t tasks = n_grid.size() * reps;
  report.rows.resize(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks) return;
      try {
        const std::size_t n = n_grid[t / reps];
        const auto samples = sample_id_distribution(truth, n, derive_seed(seed, t), family.base.cutoff_eps);
        const FitResult fit = fit_mle(samples, family, box, options);
        double err = 0.0;
        for (std::size_t i = 0; i < theta0.size(); ++i) err += std::pow(fit.theta_hat[i] - theta0[i], 2);
        const double ll0 = log_likelihood(theta0, samples, family);
        report.rows[t] = {n, t % reps, fit.theta_hat, std::sqrt(err), fit.loglik, ll0, fit.floored_points};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = tasks;
      }
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), static_cast<unsigned>(tasks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    std::vector<double> errs;
    for (std::size_t r = 0; r < reps; ++r) errs.push_back(report.rows[k * reps + r].abs_err);
    double mean = 0.0;
    for (double e : errs) mean += e;
    mean /= static_cast<double>(errs.size());
    report.summary.push_back({n_grid[k], quantile(errs, 0.5), quantile(errs, 0.1), quantile(errs, 0.9), mean});
  }
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "n,rep";
  for (const auto& p : parameters) os << ",theta_hat_" << p;
  os << ",abs_err,loglik,loglik_theta0,floored_points\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.rep;
    for (double v : r.theta_hat) os << ',' << fmt(v);
    os << ',' << fmt(r.abs_err) << ',' << fmt(r.loglik) << ',' << fmt(r.loglik_theta0) << ',' << r.floored_points
       << '\n';
  }
  return os.str();
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json per_n = nlohmann::json::array();
  for (const auto& s : summary) {
    per_n.push_back({{"n", s.n},
                     {"median_abs_err", s.median_abs_err},
                     {"q10_abs_err", s.q10},
                     {"q90_abs_err", s.q90},
                     {"mean_abs_err", s.mean_abs_err}});
  }
  return {{"parameters", parameters}, {"theta0", theta0},   {"seed", seed},
          {"summary", per_n},         {"hypothesis_checks", hypothesis_checks}};
}

}  // namespace levytail
