#pragma once

// Adaptive quadrature on top of GSL's QUADPACK port.

#include <functional>
#include <span>

namespace levytail::detail {

using Integrand = std::function<double(double)>;

struct QuadratureTolerance {
  double abs = 1e-14;
  double rel = 1e-11;
};

// Finite interval, optionally split at interior break points.
double integrate(const Integrand& f, double a, double b, std::span<const double> breaks = {},
                 QuadratureTolerance tol = {});
// Finite interval with an integrable endpoint singularity (QAGS).
double integrate_singular(const Integrand& f, double a, double b, QuadratureTolerance tol = {});
// [a, infinity).
double integrate_to_infinity(const Integrand& f, double a, QuadratureTolerance tol = {});
// int_a^b f(x) cos(omega x) dx or sin(omega x) dx over a finite interval.
double integrate_oscillatory(const Integrand& f, double a, double b, double omega, bool sine,
                             QuadratureTolerance tol = {});
// int_a^inf f(x) cos(omega x) dx or sin(...), omega > 0.
double integrate_fourier_tail(const Integrand& f, double a, double omega, bool sine,
                              QuadratureTolerance tol = {});

}  // namespace levytail::detail
