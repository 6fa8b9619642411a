#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "levytail/grid.hpp"

namespace levytail {

enum class Property { long_tailed, subexp, subexp_plus, ani, ald, tail_equiv, conv_root, steutel };
enum class Outcome { pass, fail, inconclusive };

const char* to_string(Property p) noexcept;
const char* to_string(Outcome o) noexcept;

struct RatioCurve {
  std::string label;
  std::vector<double> x_points;
  std::vector<double> ratios;
  // Median ratio over the final third (in log x) of the last decade.
  double limit_estimate = 0.0;
  // Least-squares slope of log|ratio - target| against log x over the last decade.
  double trend_slope = 0.0;
  bool divergent = false;
  // |ratio - target| <= 1e-9 (relative) throughout the last decade.
  bool exact = false;
};

struct Verdict {
  Property property = Property::long_tailed;
  Outcome outcome = Outcome::inconclusive;
  double limit_estimate = 0.0;
  double target = 0.0;
  double rel_error = 0.0;
  std::pair<double, double> window{0.0, 0.0};
};

struct Diagnosis {
  Verdict verdict;
  std::vector<RatioCurve> curves;
};

struct DiagnosticsConfig {
  double threshold = 0.05;
  int points_per_decade = 60;
  // Read-out curves cover at most this many decades below the window end.
  double decades = 3.0;
};

Diagnosis long_tail_check(const GridFunction& f, const std::vector<double>& y_set = {1.0, 5.0, 10.0},
                          const DiagnosticsConfig& cfg = {});
// f~^{*2}/f~ on the continuous parts (the atom enters through exact algebra).
Diagnosis subexp_check(const GeneralizedDensity& f, const DiagnosticsConfig& cfg = {});
Diagnosis subexp_plus_check(const GeneralizedDensity& f, const DiagnosticsConfig& cfg = {});
// Curves sup_{t>=x} f(t)/f(x) and inf_{x0<=t<=x} f(t)/f(x).
Diagnosis ani_check(const GridFunction& f, const DiagnosticsConfig& cfg = {});
// K(x) = sup_{y>0} f(x+y)/f(x); judged by the growth of block maxima over
// eight log-spaced bins.
Diagnosis ald_check(const GridFunction& f, const DiagnosticsConfig& cfg = {});
Diagnosis tail_equivalence(const GridFunction& f, const GridFunction& g, double target,
                           const DiagnosticsConfig& cfg = {});
Diagnosis convolution_root_ratio(const GeneralizedDensity& f, int n, const DiagnosticsConfig& cfg = {});
// Continuous part of f~^{*alpha} over that of f~, f~ the compound Poisson law
// with rate lambda and jump density g.
Diagnosis steutel_ratio(double lambda, const GridFunction& g, double alpha, const DiagnosticsConfig& cfg = {});

struct LocalMassCurves {
  // F(x+Delta)/f(x), expected c for long-tailed f.
  RatioCurve mass_over_density;
  // F(x+1+Delta)/F(x+Delta).
  RatioCurve long_tail;
  // F^{*2}(x+Delta)/F(x+Delta).
  RatioCurve subexp;
};

LocalMassCurves local_interval_mass(const GridFunction& f, double c, const DiagnosticsConfig& cfg = {});

// Largest h with sup_{|y|<=h} |f(x+y) - f(x)| < tol f(x), per read-out point.
RatioCurve insensitivity_scale(const GridFunction& f, double tol = 0.01, const DiagnosticsConfig& cfg = {});

nlohmann::json to_json(const RatioCurve& c);
nlohmann::json to_json(const Diagnosis& d);

}  // namespace levytail
