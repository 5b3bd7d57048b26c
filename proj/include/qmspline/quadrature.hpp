#pragma once

// Shared numerical helpers: Gauss-Legendre rules, adaptive panel
// integration with extended-precision accumulation, and golden-section
// maximization.  Everything here is deterministic: fixed node orders,
// fixed reduction order, no data-dependent thread scheduling.

#include <functional>
#include <vector>

#include "qmspline/ddouble.hpp"

namespace qms {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // matching order
};

// n-point Gauss-Legendre rule (Newton iteration on the Legendre
// recurrence).  Cached per order, thread-safe.
const GaussRule& gauss_legendre(int n);

// Integral of f over [a,b] with a single n-point rule.
DDouble gauss_panel(const std::function<DDouble(double)>& f, double a, double b, int n);

struct AdaptiveResult {
  DDouble value;
  int panels = 1;           // panel count of the accepted pass
  double rel_change = 0.0;  // relative change of the last halving
  double abs_change = 0.0;  // absolute change of the last halving
  bool converged = true;
};

// Integrate f over [a,b]: start with one n-point panel and halve panel
// widths (doubling the count) until the relative change drops below
// rel_tol or max_panels is reached.  A positive abs_tol also accepts a
// pass whose absolute change is at most abs_tol; callers integrating one
// piece of a larger sum use it to stop refining pieces whose remaining
// error cannot move the sum.
AdaptiveResult integrate_adaptive(const std::function<DDouble(double)>& f, double a, double b,
                                  double rel_tol, int points_per_panel = 16,
                                  int max_panels = 4096, double abs_tol = 0.0);

struct MaxResult {
  double x = 0.0;
  double value = 0.0;
};

// Maximize f over [a,b]: scan_points-point uniform scan, then
// golden-section refinement around the best sample until the bracket is
// narrower than x_tol.
MaxResult maximize_scan_golden(const std::function<double(double)>& f, double a, double b,
                               int scan_points, double x_tol);

}  // namespace qms
