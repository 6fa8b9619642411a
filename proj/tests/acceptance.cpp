// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "levytail/charfn.hpp"
#include "levytail/convolution.hpp"
#include "levytail/counterexample.hpp"
#include "levytail/diagnostics.hpp"
#include "levytail/errors.hpp"
#include "levytail/levy_model.hpp"
#include "levytail/mle.hpp"

using namespace levytail;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!cond) {
      ok = false;
      detail += " [x]";
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool passes(const Diagnosis& d) { return d.verdict.outcome == Outcome::pass; }
bool fails(const Diagnosis& d) { return d.verdict.outcome == Outcome::fail; }

Check cp_tail_equivalence() {
  Check c;
  const GridFunction g = discretize(JumpFamily(Pareto{1.5, 1.0}), GridParams{0.0, 1e4, 0.01});
  for (double lambda : {0.5, 1.0, std::log(2.0)}) {
    const GeneralizedDensity f = compound_poisson_density(lambda, g);
    const double target = lambda / -std::expm1(-lambda);
    const Diagnosis d = tail_equivalence(f.cont, g, target);
    c.require(d.verdict.rel_error < 0.05 && d.curves.front().trend_slope < 0.0,
              "lambda " + num(lambda) + ": " + num(d.verdict.limit_estimate) + " vs " + num(target));
  }
  return c;
}

Check inverse_series_round_trip() {
  Check c;
  const GridFunction g = discretize(JumpFamily(Pareto{1.5, 1.0}), GridParams{0.0, 200.0, 0.01});
  double gmax = 0.0;
  for (double v : g.values()) gmax = std::max(gmax, v);
  for (double lambda : {0.1, 0.3, 0.5, 0.69}) {
    const GeneralizedDensity f = compound_poisson_density(lambda, g);
    const RecoveryResult r = recover_jump_density(f.cont, lambda);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) err = std::max(err, std::abs(r.density[i] - g[i]));
    c.require(err / gmax < 1e-6, "lambda " + num(lambda) + " rel err " + num(err / gmax));
  }
  bool raised = false;
  try {
    recover_jump_density(compound_poisson_density(0.5, g).cont, 0.7);
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::SeriesDiverges;
  }
  c.require(raised, "lambda 0.7 raises SeriesDiverges");
  return c;
}

Check fourier_correctness() {
  Check c;
  const InversionResult n =
      invert_cf_to_density([](double z) { return Complex(std::exp(-0.5 * z * z), 0.0); }, GridParams{-8.0, 8.0, 0.01});
  double e = 0.0;
  for (std::size_t i = 0; i < n.density.size(); ++i) {
    const double x = n.density.x(i);
    e = std::max(e, std::abs(n.density[i] - std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI)));
  }
  c.require(e < 1e-8, "gaussian sup err " + num(e));
  const InversionResult g = invert_cf_to_density(
      [](double z) {
        const Complex d(1.0, -z);
        return 1.0 / (d * d);
      },
      GridParams{0.0, 40.0, 0.01});
  e = 0.0;
  for (std::size_t i = 0; i < g.density.size(); ++i) {
    const double x = g.density.x(i);
    e = std::max(e, std::abs(g.density[i] - x * std::exp(-x)));
  }
  c.require(e < 1e-6, "gamma(2,1) sup err " + num(e));
  return c;
}

Check fractional_powers() {
  Check c;
  const double lambda = 0.5;
  const GridFunction g = discretize(JumpFamily(Pareto{1.5, 1.0}), GridParams{0.0, 1000.0, 0.01});
  for (double alpha : {0.5, 2.0}) {
    const Diagnosis d = steutel_ratio(lambda, g, alpha);
    c.require(std::abs(d.verdict.limit_estimate - alpha) < 0.1 * alpha,
              "alpha " + num(alpha) + ": " + num(d.verdict.limit_estimate));
  }
  const GeneralizedDensity f = compound_poisson_density(lambda, g);
  const InversionResult half = invert_cf_to_density(cf_power(dft_cf(f), 0.5), f.cont.params(), std::exp(-lambda / 2));
  const double atom = std::exp(-lambda / 2);
  const GeneralizedDensity h(atom, half.density.scaled(1.0 / (1.0 - atom)));
  const GeneralizedDensity hh = convolve(h, h, {std::make_pair(f.cont.first_index(), f.cont.last_index())});
  double e = 0.0;
  for (std::size_t i = 0; i < f.cont.size(); ++i) e = std::max(e, std::abs(hh.continuous_value(i) - f.continuous_value(i)));
  c.require(e < 1e-6, "half-power squared sup err " + num(e));
  return c;
}

Check subexponential_suite() {
  Check c;
  const GridParams gp{0.0, 1000.0, 0.01};
  const std::vector<std::pair<std::string, GridFunction>> heavy = {
      {"pareto", discretize(JumpFamily(Pareto{1.5, 1.0}), gp)},
      {"weibull", discretize(JumpFamily(Weibull{0.5, 1.0}), gp)},
      {"lognormal", discretize(JumpFamily(LogNormal{0.0, 1.0}), gp)},
  };
  for (const auto& [name, f] : heavy) {
    const Diagnosis s = subexp_check(GeneralizedDensity(0.0, f));
    c.require(passes(s), name + " subexp " + num(s.verdict.limit_estimate));
    c.require(passes(ani_check(f)), name + " ani pass");
  }
  const GridFunction ex = discretize(JumpFamily(Exponential{1.0}), GridParams{0.0, 200.0, 0.01});
  const GridFunction no = discretize(JumpFamily(Normal{0.0, 1.0}), GridParams{-40.0, 80.0, 0.01});
  c.require(fails(subexp_check(GeneralizedDensity(0.0, ex))), "exponential subexp fail");
  c.require(fails(subexp_check(GeneralizedDensity(0.0, no))), "gaussian subexp fail");
  const SemistableParams p = desk_preset();
  const GridFunction gplus =
      discretize(build_positive_levy(p).family, GridParams{0.0, p.x0 * std::pow(p.b, 10.0), 0.01});
  const Diagnosis a = ani_check(gplus);
  c.require(fails(a), std::string("g+ ani ") + to_string(a.verdict.outcome));
  return c;
}

Check convolution_roots() {
  Check c;
  const GridFunction f = discretize(JumpFamily(Pareto{1.5, 1.0}), GridParams{0.0, 1000.0, 0.01});
  for (int n : {2, 3}) {
    const Diagnosis d = convolution_root_ratio(GeneralizedDensity(0.0, f), n);
    c.require(std::abs(d.verdict.limit_estimate - n) < 0.05 * n,
              "n " + std::to_string(n) + ": " + num(d.verdict.limit_estimate));
  }
  return c;
}

Check kesten_boundedness() {
  Check c;
  const GridFunction par = discretize(JumpFamily(Pareto{2.0, 1.0}), GridParams{0.0, 1000.0, 0.01});
  const std::vector<KestenPoint> prof = kesten_bound_profile(par, 0.1, 8);
  double r2 = 0.0, rmax = 0.0;
  for (const auto& k : prof) {
    if (k.n == 2) r2 = k.sup_ratio;
    rmax = std::max(rmax, k.sup_ratio);
  }
  c.require(r2 > 0.0 && rmax < 10.0 * r2, "pareto max/n2 " + num(rmax / r2));
  const GridFunction nor = discretize(JumpFamily(Normal{0.0, 1.0}), GridParams{-10.0, 10.0, 0.01});
  const auto curve = kesten_ratio_curve(nor, 0.1, 2);
  double lo = curve.empty() ? 0.0 : curve.front().second, hi = 0.0;
  for (const auto& [x, r] : curve) hi = std::max(hi, r);
  c.require(lo > 0.0 && hi >= 10.0 * lo, "gaussian n2 growth " + num(lo > 0.0 ? hi / lo : 0.0));
  return c;
}

Check counterexample_signature() {
  Check c;
  const FailureReport r = demonstrate_failure(desk_preset(), 3);
  std::string a, b;
  for (const auto& p : r.points) {
    a += (a.empty() ? "" : ",") + num(p.ratio_f_fbar);
    b += (b.empty() ? "" : ",") + num(p.ratio_g2_g);
  }
  c.require(r.increasing_f_fbar(), "f/fbar increasing (" + a + ")");
  c.require(r.increasing_g2_g(), "g2/g increasing (" + b + ")");
  c.require(fails(r.ald), std::string("ald(g+) ") + to_string(r.ald.verdict.outcome));
  return c;
}

Check mle_consistency() {
  Check c;
  const ExperimentReport r =
      consistency_experiment(cp_weibull_scale(), {1.0}, {500, 2000, 8000}, 20, 20240601, {{0.3, 3.0}});
  std::string med;
  bool decreasing = true;
  for (std::size_t i = 0; i < r.summary.size(); ++i) {
    med += (i ? "," : "") + num(r.summary[i].median_abs_err);
    if (i > 0 && !(r.summary[i].median_abs_err < r.summary[i - 1].median_abs_err)) decreasing = false;
  }
  c.require(decreasing, "medians decreasing (" + med + ")");
  c.require(!r.summary.empty() && r.summary.back().median_abs_err < 0.1, "median at 8000 < 0.1");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

Check cli_determinism() {
  Check c;
  const fs::path root = fs::temp_directory_path() / ("levytail_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  write(root / "cp.json",
        R"({"family":"pareto","params":{"alpha":1.5,"x_floor":1},"total_mass":0.5,"grid":{"x_min":0,"x_max":200,"dx":0.01}})");
  write(root / "gauss.json", R"({"family":"exponential","params":{"rate":1},"total_mass":2,"gaussian":0.5})");
  write(root / "fit.json",
        R"({"family":"weibull","params":{"shape":0.5,"scale":1},"total_mass":1,"grid":{"x_min":0,"x_max":300,"dx":0.01},"fit":{"parameter":"scale","lower":0.3,"upper":3}})");
  const std::string cli = LEVYTAIL_CLI_PATH;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth", "synth --model " + (root / "cp.json").string()},
      {"synth_fourier", "synth --model " + (root / "gauss.json").string() + " --grid-max 30"},
      {"diagnose", "diagnose --model " + (root / "cp.json").string() +
                       " --property subexp --property ani --property ald --property steutel"},
      {"recover", "recover --density " + (root / "density.csv").string() + " --lambda 0.5"},
      {"counterexample", "counterexample"},
      {"fit", "fit --model " + (root / "fit.json").string() + " --n 500 --seed 11"},
      {"experiment", "experiment --model " + (root / "fit.json").string() + " --n 200 --n 400 --reps 3 --seed 11"},
  };
  for (int run = 0; run < 2; ++run) {
    for (const auto& [name, args] : commands) {
      const fs::path out = root / (name + std::to_string(run));
      // The second run uses a different worker count; results must not depend on it.
      const std::string env = run == 0 ? "LEVYTAIL_THREADS=1 " : "LEVYTAIL_THREADS=3 ";
      const std::string cmd = env + cli + " " + args + " --out " + out.string() + " > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      if (rc != 0) c.require(false, name + " exit " + std::to_string(rc));
      if (name == "synth" && run == 0) {
        // recover reads the synthesized compound Poisson density
        std::istringstream in(slurp(out / "density.csv"));
        std::string line, csv;
        while (std::getline(in, line)) csv += line.substr(0, line.rfind(',')) + "\n";
        write(root / "density.csv", csv);
      }
    }
  }
  std::size_t files = 0;
  for (const auto& [name, args] : commands) {
    const fs::path a = root / (name + "0"), b = root / (name + "1");
    bool same = fs::exists(a) && !fs::is_empty(a);
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      same = same && slurp(e.path()) == slurp(b / e.path().filename());
    }
    c.require(same, name);
  }
  c.detail += "; " + std::to_string(files) + " files compared";
  fs::remove_all(root);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 compound Poisson tail equivalence", cp_tail_equivalence},
      {"2 inverse series round trip", inverse_series_round_trip},
      {"3 Fourier inversion", fourier_correctness},
      {"4 fractional convolution powers", fractional_powers},
      {"5 subexponentiality suite", subexponential_suite},
      {"6 convolution-root ratios", convolution_roots},
      {"7 Kesten boundedness", kesten_boundedness},
      {"8 counterexample signature", counterexample_signature},
      {"9 MLE consistency", mle_consistency},
      {"10 CLI determinism", cli_determinism},
  };
  // Optional arguments select criteria by number.
  std::vector<bool> selected(criteria.size(), argc < 2);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0, run_count = 0;
  for (std::size_t idx = 0; idx < criteria.size(); ++idx) {
    if (!selected[idx]) continue;
    ++run_count;
    const auto& [name, run] = criteria[idx];
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %s (%.1fs): %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), secs, c.detail.c_str());
    std::fflush(stdout);
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d of %d criteria passed\n", run_count - failed, run_count);
  return failed == 0 ? 0 : 1;
}
