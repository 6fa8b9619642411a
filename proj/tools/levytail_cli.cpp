#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "levytail/charfn.hpp"
#include "levytail/convolution.hpp"
#include "levytail/counterexample.hpp"
#include "levytail/diagnostics.hpp"
#include "levytail/errors.hpp"
#include "levytail/levy_model.hpp"
#include "levytail/mle.hpp"
#include "levytail/model_io.hpp"

namespace fs = std::filesystem;
using namespace levytail;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 2, kNumeric = 3, kInfeasible = 4, kSeriesDomain = 5 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidGrid:
    case ErrorCode::ModelParse:
    case ErrorCode::DivergentLevyMeasure:
    case ErrorCode::EmptyTail:
    case ErrorCode::CutoffRequired:
      return kInput;
    case ErrorCode::WindowUnderflow:
    case ErrorCode::ZeroPositiveMass:
    case ErrorCode::HypothesisViolated:
    case ErrorCode::GridInfeasible:
    case ErrorCode::HypothesisCheckFailed:
      return kInfeasible;
    case ErrorCode::SeriesDiverges:
      return kSeriesDomain;
    default:
      return kNumeric;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string model;
  std::string density;
  std::string data;
  std::string out = ".";
  std::optional<double> grid_dx;
  std::optional<double> grid_max;
  double tol = kSeriesTol;
  std::uint64_t seed = 20240601;
  std::vector<std::string> properties;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::vector<std::size_t> n;
  std::size_t reps = 20;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidInput, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

fs::path out_dir(const Options& o) {
  fs::path p(o.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::InvalidInput, "cannot create output directory '" + o.out + "'");
  return p;
}

ModelSpec require_model(const Options& o) {
  if (o.model.empty()) fail(ErrorCode::InvalidInput, "--model is required");
  return load_model(o.model);
}

bool has_negative_support(const JumpFamily& f) { return family_mass_between(f, -kInf, 0.0) > 0.0; }

GridParams model_grid(const ModelSpec& m, const Options& o, bool two_sided) {
  GridParams g = m.grid.value_or(GridParams{two_sided ? -100.0 : 0.0, 100.0, 0.01});
  if (o.grid_max) {
    g.x_max = *o.grid_max;
    if (two_sided || !m.grid) g.x_min = two_sided ? -*o.grid_max : 0.0;
  }
  if (o.grid_dx) g.dx = *o.grid_dx;
  g.validate();
  return g;
}

struct ModelDensity {
  LevyTriplet triplet;
  // Continuous part on the grid, relative to `shift`, plus the atom at `shift`.
  GeneralizedDensity density;
  double shift = 0.0;
  std::optional<GridFunction> jumps;  // g for compound Poisson models
  json meta;
};

ModelDensity build_density(const ModelSpec& m, const Options& o) {
  const LevyTriplet t = make_triplet(m);
  levy_integrability_check(t.jumps);
  const bool no_jumps = t.jumps.family.get_if<NoJumps>() || (!t.jumps.infinite_activity() && t.jumps.total_mass == 0.0);
  if (no_jumps && t.gaussian == 0.0) fail(ErrorCode::InvalidParams, "degenerate law: no jumps and no Gaussian part");
  const bool cp = !no_jumps && !t.jumps.infinite_activity() && t.gaussian == 0.0;
  const bool two_sided = !cp || has_negative_support(t.jumps.family);
  const GridParams grid = model_grid(m, o, two_sided);
  json meta = {{"grid", {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"dx", grid.dx}}}, {"model", to_json(m)}};
  if (cp) {
    const double lambda = t.jumps.total_mass;
    const GridFunction g = discretize(t.jumps.family, grid);
    const SeriesTruncation trunc = poisson_truncation(lambda, o.tol);
    GeneralizedDensity f = compound_poisson_density(lambda, g, trunc, o.tol);
    meta["method"] = "compound_poisson_series";
    meta["lambda"] = lambda;
    meta["truncation"] = {{"n_max", trunc.n_max}, {"tail_bound", trunc.tail_bound}};
    meta["jump_leakage"] = g.leakage();
    meta["leakage"] = f.q() * f.cont.leakage();
    return {t, std::move(f), t.drift, g, meta};
  }
  auto cf = [t](double z) { return std::exp(levy_khintchine_exponent(t, z)); };
  const InversionResult inv = invert_cf_to_density(cf, grid, 0.0, std::max(o.tol, kEdgeTol));
  meta["method"] = "fourier_inversion";
  meta["edge_modulus"] = inv.edge_modulus;
  meta["clamped_mass"] = inv.clamped_mass;
  meta["grid_mass"] = inv.mass;
  meta["leakage"] = std::max(0.0, 1.0 - inv.mass);
  const double mass = inv.density.mass();
  GridFunction cont = mass > 0.0 ? inv.density.scaled(1.0 / mass) : inv.density;
  return {t, GeneralizedDensity(0.0, cont), 0.0, std::nullopt, meta};
}

GridFunction read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open density file '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' || line[0] == '.'))
      continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) fail(ErrorCode::InvalidInput, "bad density row: " + line);
    try {
      xs.push_back(std::stod(a));
      vs.push_back(std::stod(b));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidInput, "bad density row: " + line);
    }
  }
  if (xs.size() < 3) fail(ErrorCode::InvalidInput, "density file needs at least three rows");
  const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - dx) > 1e-6 * dx) fail(ErrorCode::InvalidInput, "density file is not on a uniform grid");
  const double k0 = xs.front() / dx;
  if (std::abs(k0 - std::nearbyint(k0)) > 1e-6) fail(ErrorCode::InvalidInput, "grid nodes must be multiples of dx");
  return GridFunction(dx, static_cast<std::int64_t>(std::llround(k0)), vs);
}

std::string curve_csv(const RatioCurve& c) {
  std::string s = "x,ratio\n";
  for (std::size_t i = 0; i < c.x_points.size(); ++i) s += fmt(c.x_points[i]) + "," + fmt(c.ratios[i]) + "\n";
  return s;
}

int cmd_synth(const Options& o) {
  const ModelSpec m = require_model(o);
  const ModelDensity md = build_density(m, o);
  const fs::path dir = out_dir(o);
  const auto& c = md.density.cont;
  std::string csv = "x,density,mass\n";
  double total = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double v = md.density.continuous_value(i);
    total += v * c.dx();
    csv += fmt(c.x(i) + md.shift) + "," + fmt(v) + "," + fmt(v * c.dx()) + "\n";
  }
  write_file(dir / "density.csv", csv);
  json atoms = json::array();
  if (md.density.atom > 0.0) atoms.push_back({{"location", md.shift}, {"mass", md.density.atom}});
  write_json(dir / "atoms.json", atoms);
  json meta = md.meta;
  meta["continuous_mass"] = total;
  write_json(dir / "meta.json", meta);
  std::cout << "density.csv: " << c.size() << " nodes, continuous mass " << fmt(total) << "\n";
  return kOk;
}

int cmd_diagnose(const Options& o) {
  std::optional<ModelSpec> model;
  if (!o.model.empty()) model = load_model(o.model);
  std::optional<ModelDensity> md;
  std::optional<GridFunction> subject;
  if (!o.density.empty()) {
    subject = read_density_csv(o.density);
    const double mass = subject->mass();
    if (!(mass > 0.0)) fail(ErrorCode::InvalidInput, "density file has no mass");
    subject = subject->scaled(1.0 / mass);
  } else if (model) {
    const LevyTriplet t = make_triplet(*model);
    if (t.jumps.infinite_activity() || t.jumps.family.get_if<NoJumps>())
      fail(ErrorCode::InvalidInput, "diagnose needs a finite jump density or --density");
    const GridParams grid = model_grid(*model, o, has_negative_support(t.jumps.family));
    subject = discretize(t.jumps.family, grid);
  } else {
    fail(ErrorCode::InvalidInput, "diagnose needs --model or --density");
  }
  const std::vector<std::string> props =
      o.properties.empty() ? std::vector<std::string>{"long_tailed", "subexp", "ani", "ald"} : o.properties;

  auto cp_params = [&]() {
    if (!model) fail(ErrorCode::InvalidInput, "this property needs --model");
    const LevyTriplet t = make_triplet(*model);
    if (t.jumps.infinite_activity()) fail(ErrorCode::InvalidInput, "this property needs a compound Poisson model");
    return o.lambda.value_or(t.jumps.total_mass);
  };

  const fs::path dir = out_dir(o);
  json all = json::array();
  const GeneralizedDensity gd(0.0, *subject);
  for (const auto& p : props) {
    Diagnosis d;
    if (p == "long_tailed") {
      d = long_tail_check(*subject);
    } else if (p == "subexp") {
      d = subexp_check(gd);
    } else if (p == "subexp_plus") {
      d = subexp_plus_check(gd);
    } else if (p == "ani") {
      d = ani_check(*subject);
    } else if (p == "ald") {
      d = ald_check(*subject);
    } else if (p == "tail_equiv") {
      const double lambda = cp_params();
      const GeneralizedDensity f = compound_poisson_density(lambda, *subject);
      d = tail_equivalence(f.cont, *subject, lambda / -std::expm1(-lambda));
    } else if (p == "conv_root") {
      const int n = o.n.empty() ? 2 : static_cast<int>(o.n.front());
      d = convolution_root_ratio(gd, n);
    } else if (p == "steutel") {
      d = steutel_ratio(cp_params(), *subject, o.alpha.value_or(0.5));
    } else {
      fail(ErrorCode::InvalidInput, "unknown property '" + p + "'");
    }
    write_file(dir / ("curve_" + p + ".csv"), d.curves.empty() ? std::string("x,ratio\n") : curve_csv(d.curves.front()));
    all.push_back(to_json(d));
    std::cout << p << ": " << to_string(d.verdict.outcome) << " (limit " << fmt(d.verdict.limit_estimate) << ", target "
              << fmt(d.verdict.target) << ")\n";
  }
  write_json(dir / "diagnostics.json", all);
  return kOk;
}

int cmd_recover(const Options& o) {
  if (o.density.empty()) fail(ErrorCode::InvalidInput, "recover needs --density");
  if (!o.lambda) fail(ErrorCode::InvalidInput, "recover needs --lambda");
  GridFunction f1 = read_density_csv(o.density);
  const double mass = f1.mass();
  if (!(mass > 0.0)) fail(ErrorCode::InvalidInput, "density file has no mass");
  f1 = f1.scaled(1.0 / mass);
  const RecoveryResult r = recover_jump_density(f1, *o.lambda, o.tol);
  const fs::path dir = out_dir(o);
  std::string csv = "x,density,signed\n";
  for (std::size_t i = 0; i < r.density.size(); ++i)
    csv += fmt(r.density.x(i)) + "," + fmt(r.density[i]) + "," + fmt(r.signed_values[i]) + "\n";
  write_file(dir / "jump_density.csv", csv);
  write_json(dir / "meta.json", {{"lambda", *o.lambda},
                                 {"input_mass", mass},
                                 {"terms", r.terms},
                                 {"closed_form", r.closed_form},
                                 {"clamped_mass", r.clamped_mass},
                                 {"mass", r.density.mass()}});
  std::cout << "jump_density.csv: " << r.density.size() << " nodes, " << r.terms << " terms\n";
  return kOk;
}

int cmd_counterexample(const Options& o) {
  SemistableParams p = desk_preset();
  const int k_max = o.n.empty() ? static_cast<int>(p.n_k.size()) : static_cast<int>(o.n.front());
  const FailureReport r = demonstrate_failure(p, k_max, o.grid_dx.value_or(0.01));
  const fs::path dir = out_dir(o);
  write_json(dir / "counterexample.json", to_json(r));
  for (const auto& q : r.points)
    std::cout << "k=" << q.k << " x=" << fmt(q.x) << " f/fbar=" << fmt(q.ratio_f_fbar) << " g*2/g=" << fmt(q.ratio_g2_g)
              << "\n";
  std::cout << "ald(g+): " << to_string(r.ald.verdict.outcome) << "\n";
  return kOk;
}

ParametricFamily family_from_model(const ModelSpec& m) {
  if (!m.fit) fail(ErrorCode::InvalidInput, "model needs a 'fit' block naming the parameter and its box");
  ParametricFamily f;
  f.base = m;
  f.parameters = {m.fit->parameter};
  if (m.grid) f.grid = *m.grid;
  return f;
}

double base_value(const ModelSpec& m, const std::string& name) {
  if (name == "total_mass") return m.total_mass;
  if (name == "drift") return m.drift;
  if (name == "gaussian") return m.gaussian;
  auto it = m.family.params.find(name);
  if (it == m.family.params.end())
    fail(ErrorCode::InvalidInput, "parameter '" + name + "' needs an explicit value in the model params");
  return it->second;
}

std::vector<double> read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open data file '" + path + "'");
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      if (!out.empty()) fail(ErrorCode::InvalidInput, "bad sample line: " + line);
    }
  }
  return out;
}

int cmd_fit(const Options& o) {
  const ModelSpec m = require_model(o);
  ParametricFamily fam = family_from_model(m);
  if (o.grid_max) fam.grid.x_max = *o.grid_max;
  if (o.grid_dx) fam.grid.dx = *o.grid_dx;
  const double theta0 = base_value(m, m.fit->parameter);
  std::vector<double> samples;
  if (!o.data.empty()) {
    samples = read_samples(o.data);
  } else {
    const std::size_t n = o.n.empty() ? 2000 : o.n.front();
    samples = sample_id_distribution(fam.at({theta0}), n, o.seed, m.cutoff_eps);
  }
  const FitResult r = fit_mle(samples, fam, {{m.fit->lower, m.fit->upper}});
  const fs::path dir = out_dir(o);
  json j = {{"parameter", m.fit->parameter},
            {"theta_hat", r.theta_hat},
            {"loglik", r.loglik},
            {"evaluations", r.evaluations},
            {"converged", r.converged},
            {"box", {m.fit->lower, m.fit->upper}},
            {"floored_points", r.floored_points},
            {"n", samples.size()},
            {"seed", o.seed}};
  if (o.data.empty()) j["theta0"] = theta0;
  write_json(dir / "fit.json", j);
  std::cout << m.fit->parameter << " = " << fmt(r.theta_hat.front()) << " (M_n " << fmt(r.loglik) << ")\n";
  return kOk;
}

int cmd_experiment(const Options& o) {
  const ModelSpec m = require_model(o);
  ParametricFamily fam = family_from_model(m);
  if (o.grid_max) fam.grid.x_max = *o.grid_max;
  if (o.grid_dx) fam.grid.dx = *o.grid_dx;
  const double theta0 = base_value(m, m.fit->parameter);
  const std::vector<std::size_t> n_grid = o.n.empty() ? std::vector<std::size_t>{500, 2000, 8000} : o.n;
  const ExperimentReport r = consistency_experiment(fam, {theta0}, n_grid, o.reps, o.seed, {{m.fit->lower, m.fit->upper}});
  const fs::path dir = out_dir(o);
  write_file(dir / "experiment.csv", r.to_csv());
  write_json(dir / "experiment.json", r.to_json());
  for (const auto& s : r.summary) std::cout << "n=" << s.n << " median |err| " << fmt(s.median_abs_err) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail diagnostics for infinitely divisible densities"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--grid-dx", o.grid_dx, "Grid step");
    sub->add_option("--grid-max", o.grid_max, "Grid upper end");
    sub->add_option("--tol", o.tol, "Series and inversion tolerance");
    sub->add_option("--seed", o.seed, "Random seed");
  };

  auto* synth = app.add_subcommand("synth", "Density of the model law");
  synth->add_option("--model", o.model, "Model JSON")->required();
  add_common(synth);

  auto* diagnose = app.add_subcommand("diagnose", "Tail property verdicts");
  diagnose->add_option("--model", o.model, "Model JSON");
  diagnose->add_option("--density", o.density, "Density CSV (x, density)");
  diagnose->add_option("--property", o.properties, "Property (repeatable)");
  diagnose->add_option("--lambda", o.lambda, "Compound Poisson rate");
  diagnose->add_option("--alpha", o.alpha, "Convolution power");
  diagnose->add_option("--n", o.n, "Convolution order");
  add_common(diagnose);

  auto* recover = app.add_subcommand("recover", "Jump density from a compound Poisson density");
  recover->add_option("--density", o.density, "Density CSV (x, density)")->required();
  recover->add_option("--lambda", o.lambda, "Compound Poisson rate")->required();
  add_common(recover);

  auto* counter = app.add_subcommand("counterexample", "Two-sided compound Poisson outside the subexponential class");
  counter->add_option("--n", o.n, "Number of points k_max");
  add_common(counter);

  auto* fit = app.add_subcommand("fit", "Maximum likelihood fit");
  fit->add_option("--model", o.model, "Model JSON with a fit block")->required();
  fit->add_option("--data", o.data, "Sample file, one value per line");
  fit->add_option("--n", o.n, "Sample size when simulating");
  add_common(fit);

  auto* experiment = app.add_subcommand("experiment", "Consistency experiment");
  experiment->add_option("--model", o.model, "Model JSON with a fit block")->required();
  experiment->add_option("--n", o.n, "Sample sizes (repeatable)");
  experiment->add_option("--reps", o.reps, "Replications per sample size");
  add_common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*diagnose) return cmd_diagnose(o);
    if (*recover) return cmd_recover(o);
    if (*counter) return cmd_counterexample(o);
    if (*fit) return cmd_fit(o);
    if (*experiment) return cmd_experiment(o);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kInput;
}
