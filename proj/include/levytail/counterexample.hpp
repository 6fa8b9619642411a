#pragma once

#include <vector>

#include <json.hpp>

#include "levytail/diagnostics.hpp"
#include "levytail/levy_model.hpp"

namespace levytail {

struct SemistableParams {
  double x0 = 1.5;
  double b = 2.0;
  double delta = 0.05;
  double gamma = 0.5;
  std::vector<int> n_k{1, 2, 3};
  // Rescale the negative blocks to total mass 1 when sum n_k^{-1/2} != 1.
  bool renormalize = true;

  void validate() const;
};

SemistableParams desk_preset();

// Semistable Levy density on (1, inf) with the dip at x0 b^n.
JumpDensitySpec build_positive_levy(const SemistableParams& p);
// Blocks on (-2 b^{n_k} delta, -b^{n_k} delta] of height b^{-n_k} delta^{-1} n_k^{-1/2}.
JumpDensitySpec build_negative_levy(const SemistableParams& p);

struct FailurePoint {
  int k;
  double x;
  // f(x)/fbar(x): two-sided continuous part over the positive-side one.
  double ratio_f_fbar;
  // g^{*2}(x)/g(x) with g = (g+ + g-)/2.
  double ratio_g2_g;
};

struct FailureReport {
  SemistableParams params;
  double dx = 0.0;
  std::vector<FailurePoint> points;
  // ald_check on g+ over several periods.
  Diagnosis ald;

  bool increasing_f_fbar() const;
  bool increasing_g2_g() const;
};

// Ratios at x = b^{n_k} x0 for k = 1..k_max. GridInfeasible when the grid
// needs more than max_nodes nodes.
FailureReport demonstrate_failure(const SemistableParams& p, int k_max, double dx = 0.01,
                                  std::size_t max_nodes = 20'000'000);

nlohmann::json to_json(const SemistableParams& p);
nlohmann::json to_json(const FailureReport& r);

}  // namespace levytail
