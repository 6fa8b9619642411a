#include "quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "levytail/errors.hpp"

namespace levytail::detail {

namespace {

constexpr std::size_t kLimit = 2000;

struct GslSetup {
  GslSetup() { gsl_set_error_handler_off(); }
};
const GslSetup gsl_setup;

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

Workspace make_workspace() { return Workspace(gsl_integration_workspace_alloc(kLimit)); }

double trampoline(double x, void* params) {
  const auto* f = static_cast<const Integrand*>(params);
  return (*f)(x);
}

gsl_function wrap(const Integrand& f) {
  gsl_function g;
  g.function = &trampoline;
  g.params = const_cast<Integrand*>(&f);
  return g;
}

double check(int status, double result, double abserr, QuadratureTolerance tol, const char* where) {
  if (!std::isfinite(result)) fail(ErrorCode::QuadratureFailure, std::string(where) + ": non-finite result");
  if (status == GSL_SUCCESS) return result;
  // GSL reports round-off limits even when the estimate is usable.
  if (abserr <= std::max(1e3 * tol.abs, 1e-7 * std::abs(result))) return result;
  std::ostringstream os;
  os << where << ": " << gsl_strerror(status) << " (estimate " << result << ", error " << abserr << ")";
  fail(ErrorCode::QuadratureFailure, os.str());
}

}  // namespace

double integrate(const Integrand& f, double a, double b, std::span<const double> breaks,
                 QuadratureTolerance tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto ws = make_workspace();
  gsl_function g = wrap(f);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double result = 0.0, abserr = 0.0;
    int status = gsl_integration_qag(&g, pts[i], pts[i + 1], tol.abs, tol.rel, kLimit, GSL_INTEG_GAUSS41,
                                     ws.get(), &result, &abserr);
    if (status != GSL_SUCCESS) {
      status = gsl_integration_qags(&g, pts[i], pts[i + 1], tol.abs, tol.rel, kLimit, ws.get(), &result,
                                    &abserr);
    }
    total += check(status, result, abserr, tol, "integrate");
  }
  return total;
}

double integrate_singular(const Integrand& f, double a, double b, QuadratureTolerance tol) {
  if (!(b > a)) return 0.0;
  auto ws = make_workspace();
  gsl_function g = wrap(f);
  double result = 0.0, abserr = 0.0;
  const int status = gsl_integration_qags(&g, a, b, tol.abs, tol.rel, kLimit, ws.get(), &result, &abserr);
  return check(status, result, abserr, tol, "integrate_singular");
}

double integrate_to_infinity(const Integrand& f, double a, QuadratureTolerance tol) {
  auto ws = make_workspace();
  gsl_function g = wrap(f);
  double result = 0.0, abserr = 0.0;
  const int status = gsl_integration_qagiu(&g, a, tol.abs, tol.rel, kLimit, ws.get(), &result, &abserr);
  return check(status, result, abserr, tol, "integrate_to_infinity");
}

double integrate_oscillatory(const Integrand& f, double a, double b, double omega, bool sine,
                             QuadratureTolerance tol) {
  if (!(b > a)) return 0.0;
  auto ws = make_workspace();
  std::unique_ptr<gsl_integration_qawo_table, void (*)(gsl_integration_qawo_table*)> table(
      gsl_integration_qawo_table_alloc(omega, b - a, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50),
      gsl_integration_qawo_table_free);
  gsl_function g = wrap(f);
  double result = 0.0, abserr = 0.0;
  const int status =
      gsl_integration_qawo(&g, a, tol.abs, tol.rel, kLimit, ws.get(), table.get(), &result, &abserr);
  return check(status, result, abserr, tol, "integrate_oscillatory");
}

double integrate_fourier_tail(const Integrand& f, double a, double omega, bool sine, QuadratureTolerance tol) {
  auto ws = make_workspace();
  auto cycles = make_workspace();
  std::unique_ptr<gsl_integration_qawo_table, void (*)(gsl_integration_qawo_table*)> table(
      gsl_integration_qawo_table_alloc(omega, 1.0, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50),
      gsl_integration_qawo_table_free);
  gsl_function g = wrap(f);
  double result = 0.0, abserr = 0.0;
  const int status =
      gsl_integration_qawf(&g, a, tol.abs, kLimit, ws.get(), cycles.get(), table.get(), &result, &abserr);
  return check(status, result, abserr, tol, "integrate_fourier_tail");
}

}  // namespace levytail::detail
