#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "levytail/grid.hpp"
#include "levytail/levy_model.hpp"
#include "levytail/model_io.hpp"

namespace levytail {

// Stream seed for replication `index`: splitmix64(seed + (index + 1) * golden gamma).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// n draws of drift + Gaussian + compound Poisson jumps. Infinite-activity
// models need a cutoff: jumps with |y| <= cutoff are replaced by a Gaussian
// with variance int_{|y|<=cutoff} y^2 nu(dy).
std::vector<double> sample_id_distribution(const LevyTriplet& triplet, std::size_t n, std::uint64_t seed,
                                           std::optional<double> cutoff = std::nullopt);

// Density of the law with Levy triplet, on the dominating measure
// delta_drift + Lebesgue when there is an atom.
class LikelihoodDensity {
 public:
  LikelihoodDensity(const LevyTriplet& triplet, const GridParams& grid);

  double atom() const { return atom_; }
  double atom_location() const { return triplet_.drift; }
  // Continuous part at x (atom excluded).
  double continuous(double x) const;
  // log density; the atom location gets log(atom). Values below the floor
  // are clamped to it and counted.
  double log_density(double x, std::size_t* floored = nullptr) const;
  const GridParams& grid() const { return grid_; }

 private:
  enum class Kind { compound_poisson, gaussian, degenerate, general };
  LevyTriplet triplet_;
  GridParams grid_;
  Kind kind_;
  double atom_ = 0.0;
  double lambda_ = 0.0;
  std::optional<GridFunction> table_;
};

constexpr double kLogFloor = -745.0;

struct ParametricFamily {
  ModelSpec base;
  std::vector<std::string> parameters;
  // Grid on which densities are tabulated, relative to the drift.
  GridParams grid{0.0, 600.0, 0.01};

  LevyTriplet at(const std::vector<double>& theta) const;
};

// Compound Poisson with Weibull(shape) jumps of scale theta.
ParametricFamily cp_weibull_scale(double lambda = 1.0, double shape = 0.5);
// Compound Poisson with exponential(rate) jumps and intensity theta.
ParametricFamily cp_exponential_intensity(double rate = 1.0);

struct LogLikelihood {
  double value = 0.0;  // M_n
  std::size_t floored = 0;
};

LogLikelihood evaluate_log_likelihood(const LikelihoodDensity& f, const std::vector<double>& samples);
double log_likelihood(const std::vector<double>& theta, const std::vector<double>& samples,
                      const ParametricFamily& family);

using Box = std::vector<std::pair<double, double>>;

struct FitOptions {
  int scan_points = 16;
  double tol = 1e-4;
};

struct FitResult {
  std::vector<double> theta_hat;
  double loglik = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
  Box box;
  std::size_t floored_points = 0;
};

FitResult fit_mle(const std::vector<double>& samples, const ParametricFamily& family, const Box& box,
                  const FitOptions& options = {});

struct ExperimentRow {
  std::size_t n;
  std::size_t rep;
  std::vector<double> theta_hat;
  double abs_err;
  double loglik;
  double loglik_theta0;
  std::size_t floored_points;
};

struct ExperimentSummary {
  std::size_t n;
  double median_abs_err;
  double q10;
  double q90;
  double mean_abs_err;
};

struct ExperimentReport {
  std::vector<std::string> parameters;
  std::vector<double> theta0;
  std::uint64_t seed = 0;
  std::vector<ExperimentRow> rows;
  std::vector<ExperimentSummary> summary;
  nlohmann::json hypothesis_checks;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// Checks that g1 at theta0 is bounded, not failing ani_check and not failing
// subexp_check; HypothesisCheckFailed otherwise. Returns the diagnostics.
nlohmann::json check_consistency_hypotheses(const ParametricFamily& family, const std::vector<double>& theta0);

ExperimentReport consistency_experiment(const ParametricFamily& family, const std::vector<double>& theta0,
                                        const std::vector<std::size_t>& n_grid, std::size_t reps,
                                        std::uint64_t seed, const Box& box, const FitOptions& options = {});

// Worker count: LEVYTAIL_THREADS if set, otherwise the hardware concurrency.
unsigned worker_threads();

}  // namespace levytail
