#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "levytail/grid.hpp"

namespace levytail {

struct Exponential {
  double rate = 1.0;
};

// alpha * x_floor^alpha * x^{-alpha-1} on [x_floor, inf).
struct Pareto {
  double alpha = 1.5;
  double x_floor = 1.0;
};

struct Weibull {
  double shape = 0.5;
  double scale = 1.0;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

struct Uniform {
  double lower = 0.0;
  double upper = 1.0;
};

// Log-periodic density c * x^{-gamma-1} * alpha(log x) on (x_lower, inf).
// alpha has period log b, vanishes at x0 and behaves like -1/log|u - x0|
// within 2*delta of it. x_lower = 1 gives a probability density (c chosen to
// normalise); x_lower = 0 gives the raw infinite-activity Levy density (c = 1).
struct Semistable {
  double x0 = 1.5;
  double b = 2.0;
  double delta = 0.05;
  double gamma = 0.5;
  double x_lower = 1.0;
};

// Sum of constant blocks on (lower, upper]; total mass is normalised to 1.
struct PiecewiseConstant {
  struct Block {
    double lower;
    double upper;
    double height;
  };
  std::vector<Block> blocks;
};

struct Tabulated {
  GridFunction table;
};

struct NoJumps {};

struct JumpFamily;

// left_weight * left(-x) + (1 - left_weight) * right(x); the left component is
// specified on (0, inf) and reflected.
struct TwoSidedMixture {
  std::shared_ptr<const JumpFamily> left;
  std::shared_ptr<const JumpFamily> right;
  double left_weight = 0.5;
};

struct JumpFamily {
  using Variant = std::variant<NoJumps, Exponential, Pareto, Weibull, LogNormal, Normal, Uniform, Semistable,
                               PiecewiseConstant, TwoSidedMixture, Tabulated>;
  Variant value;

  JumpFamily() = default;
  template <class T>
  JumpFamily(T family) : value(std::move(family)) {}

  template <class T>
  const T* get_if() const { return std::get_if<T>(&value); }
};

// Levy density nu(dx) = total_mass * g(x) dx with g a probability density.
// total_mass = +inf flags infinite activity (raw semistable only).
struct JumpDensitySpec {
  JumpFamily family;
  double total_mass = 1.0;
  double cutoff_eps = 1e-3;

  bool infinite_activity() const { return std::isinf(total_mass); }
};

struct LevyTriplet {
  double drift = 0.0;
  double gaussian = 0.0;
  JumpDensitySpec jumps;

  void validate() const;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const JumpFamily& family);
void validate(const JumpDensitySpec& spec);

const char* family_name(const JumpFamily& family);

// g(x) of the family (normalised unless it is the raw infinite-activity form).
double family_density(const JumpFamily& family, double x);
double evaluate_jump_density(const JumpDensitySpec& spec, double x);
// Levy density total_mass * g(x), or the raw density for infinite activity.
double levy_density(const JumpDensitySpec& spec, double x);

// Mass of g over (a, b].
double family_mass_between(const JumpFamily& family, double a, double b);
double family_survival(const JumpFamily& family, double x);
// Closed-form quantile where one exists.
std::optional<double> family_quantile(const JumpFamily& family, double u);
// Points in (a, b) where g or its derivative is not smooth.
std::vector<double> family_breakpoints(const JumpFamily& family, double a, double b);
// Extrapolation model beyond x_max implied by the family.
TailModel natural_tail(const JumpFamily& family, double x_max);

double semistable_alpha(const Semistable& s, double x);
// Normalising constant c of a semistable density with x_lower = 1.
double semistable_norm(const Semistable& s);

// int (1 ^ x^2) nu(dx).
double levy_integrability_check(const JumpDensitySpec& spec);

struct G1 {
  GridFunction g1;
  double tail_mass;  // nu((1, inf))
};
G1 normalize_g1(const JumpDensitySpec& spec, const GridParams& grid);

constexpr double kDefaultCoarseTol = 0.05;

// Cell averages of g over [x_i - dx/2, x_i + dx/2]. leakage = mass of g off
// the grid.
GridFunction discretize(const JumpFamily& family, const GridParams& grid, double tol = kDefaultCoarseTol);
GridFunction discretize(const JumpDensitySpec& spec, const GridParams& grid, double tol = kDefaultCoarseTol);

}  // namespace levytail
