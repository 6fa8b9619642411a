#include <doctest.h>

#include <json.hpp>

#include "levytail/errors.hpp"
#include "levytail/model_io.hpp"

using namespace levytail;
using nlohmann::json;

namespace {

bool parse_fails(const json& j) {
  try {
    parse_model(j);
  } catch (const Error& e) {
    return e.code() == ErrorCode::ModelParse;
  }
  return false;
}

}  // namespace

TEST_CASE("model parse and round trip") {
  const json j = json::parse(R"({"family":"weibull","params":{"shape":0.5,"scale":2},"total_mass":1.5,
    "drift":0.25,"grid":{"x_min":0,"x_max":50,"dx":0.01},"fit":{"parameter":"scale","lower":0.5,"upper":4}})");
  const ModelSpec m = parse_model(j);
  CHECK(m.family.name == "weibull");
  CHECK(m.total_mass == 1.5);
  CHECK(m.drift == 0.25);
  REQUIRE(m.grid);
  CHECK(m.grid->dx == 0.01);
  REQUIRE(m.fit);
  CHECK(m.fit->parameter == "scale");
  const ModelSpec back = parse_model(to_json(m));
  CHECK(to_json(back) == to_json(m));
  const LevyTriplet t = make_triplet(m);
  CHECK(t.jumps.total_mass == 1.5);
  CHECK(std::get<Weibull>(t.jumps.family.value).scale == 2.0);
}

TEST_CASE("two-sided and infinite-activity models") {
  const ModelSpec m = parse_model(json::parse(
      R"({"family":"two_sided","params":{"left_weight":0.3},"left":{"family":"exponential"},
          "right":{"family":"pareto","params":{"alpha":1.5}}})"));
  CHECK(m.family.left->name == "exponential");
  const ModelSpec s = parse_model(
      json::parse(R"({"family":"semistable","params":{"x_lower":0},"total_mass":"inf","cutoff_eps":0.001})"));
  CHECK(make_triplet(s).jumps.infinite_activity());
}

TEST_CASE("strict parsing") {
  CHECK(parse_fails(json::parse(R"({"family":"weibull","colour":1})")));
  CHECK(parse_fails(json::parse(R"({"family":"weibull","params":{"rate":1}})")));
  CHECK(parse_fails(json::parse(R"({"family":"cauchy"})")));
  CHECK(parse_fails(json::parse(R"({"family":"pareto","params":{"alpha":-1}})")));
  CHECK(parse_fails(json::parse(R"({"family":"exponential","total_mass":"lots"})")));
  CHECK(parse_fails(json::parse(R"({"family":"exponential","grid":{"x_min":0,"x_max":-1,"dx":0.1}})")));
  CHECK(parse_fails(json::parse(R"({"family":"exponential","fit":{"parameter":"rate","lower":2,"upper":1}})")));
  CHECK(parse_fails(json::parse(R"({"family":"exponential","left":{"family":"exponential"}})")));
  CHECK(parse_fails(json::parse("[1,2]")));
}

TEST_CASE("with_parameter") {
  const ModelSpec m = parse_model(json::parse(R"({"family":"exponential","params":{"rate":1}})"));
  CHECK(with_parameter(m, "rate", 3.0).family.params.at("rate") == 3.0);
  CHECK(with_parameter(m, "total_mass", 0.5).total_mass == 0.5);
  CHECK_THROWS_AS(with_parameter(m, "shape", 1.0), Error);
}

TEST_CASE("missing model file") { CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error); }
