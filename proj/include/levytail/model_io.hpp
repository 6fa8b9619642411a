#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "levytail/grid.hpp"
#include "levytail/levy_model.hpp"

namespace levytail {

struct FitSpec {
  std::string parameter;
  double lower = 0.0;
  double upper = 0.0;
};

// Jump family by name with named parameters. Missing parameters take the
// family defaults; unknown names are rejected.
struct FamilySpec {
  std::string name = "none";
  std::map<std::string, double> params;
  // two_sided only
  std::shared_ptr<const FamilySpec> left;
  std::shared_ptr<const FamilySpec> right;
};

struct ModelSpec {
  FamilySpec family;
  double total_mass = 1.0;
  double drift = 0.0;
  double gaussian = 0.0;
  // Small-jump cutoff for sampling infinite-activity models.
  std::optional<double> cutoff_eps;
  std::optional<GridParams> grid;
  std::optional<FitSpec> fit;
};

JumpFamily make_family(const FamilySpec& spec);
LevyTriplet make_triplet(const ModelSpec& model);

// Copy of the model with one parameter replaced: a family parameter name or
// one of total_mass, drift, gaussian.
ModelSpec with_parameter(const ModelSpec& model, const std::string& name, double value);

// Strict parse: unknown keys, wrong types and invalid values raise ModelParse.
ModelSpec parse_model(const nlohmann::json& j);
ModelSpec load_model(const std::string& path);
nlohmann::json to_json(const ModelSpec& model);

}  // namespace levytail
