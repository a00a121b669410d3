// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace vskip {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // Kronrod error estimate, summed over subintervals
  int intervals = 0;
  bool converged = false;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

/// Bisects the subinterval with the largest error estimate until the total
/// estimate drops below max(abs_tol, rel_tol * |value|) or `max_intervals`
/// subintervals are in use.
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double abs_tol, double rel_tol = 0.0, int max_intervals = 4000);

/// Same, but throws QuadratureError (carrying the achieved estimate) when the
/// tolerance is not met.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol = 0.0);

}  // namespace vskip
