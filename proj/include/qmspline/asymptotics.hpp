#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "qmspline/design.hpp"
#include "qmspline/kernel.hpp"

namespace qms {

// Scale constant of the limiting local error: the L_p norm over [0,1] of the
// two-point Hermite remainder of the canonical process with m-fold integrated
// fractional increments (exponent beta), pinned at 0.
enum class BMethod { automatic, closed_form, quadrature };

struct BConstant {
  int m = 0;
  double beta = 1.0;
  int k = 1;
  double p = 2.0;
  double value = 0.0;
  BMethod method = BMethod::closed_form;
};

// Closed form (beta = 1, m = k):
//   p < inf : Beta(p(k+1)/2 + 1, p(k+1)/2 + 1)^{1/p} / (k+1)!
//   p = inf : 2^{-(k+1)} / (k+1)!
// Quadrature branch (m in {0,1}, k <= 2m+1, beta in (0,1]): runs the exact
// error engine for the integrated-fractional model on the single-interval
// design {0,1}.  `automatic` prefers the closed form where it applies.
BConstant b_constant(int m, double beta, int k, double p, BMethod method = BMethod::automatic);

// Local variance scale c(t): the limit of ||X^(m)(t+s) - X^(m)(t)||^2 / s^{2 beta}
// as s -> 0.  The derivative route returns cov(t,t,m+1,m+1) when the model
// carries order m+1 kernels; the ladder route evaluates the quotient on
// s = 2^{-j} down to 2^{-20} and Richardson-extrapolates twice.
enum class StationarityRoute { automatic, derivative, ladder };

double local_stationarity(const CovarianceModel& model, int m, double t, double beta,
                          StationarityRoute route = StationarityRoute::automatic);

// Variance-optimal generating density h ~ c^{gamma/2} with gamma = 1/(order + 1/p),
// where order is m+beta (rate route) or k+1 (higher-order route).  A power-law
// c yields the closed-form power density with lambda = 1/(1 - theta*gamma);
// a general c is tabulated numerically.
GeneratingDensity optimal_density(const PowerLaw& c, double order, double p);
GeneratingDensity optimal_density(const std::function<double(double)>& c_fn, double order,
                                  double p);

// Power-law exponent of a density's quantile near 0: lambda for the power
// family, otherwise fitted from the log-slope of h near 0.
double near_zero_lambda(const GeneratingDensity& density);

// b.value * || c^{1/2} h^{-order} ||_p over (0,1], evaluated on geometric
// segments (2^{-j-1}, 2^{-j}] refined toward 0 until the tail is below 1e-6
// relative; declared divergent when the partial norm passes 1e6.
double asymptotic_constant(const BConstant& b, const std::function<double(double)>& c_fn,
                           const GeneratingDensity& density, double p, double order);

// Least-squares power-law fit e_n ~ C n^{-rho} in log-log coordinates.
struct RateFit {
  double logC = 0.0;       // natural log of C
  double rho = 0.0;        // positive decay exponent
  double r_squared = 0.0;
  double n_lo = 0.0;       // smallest n used in the fit
  double n_hi = 0.0;       // largest n used
  int points_used = 0;
  bool full_range = false;
};

// Fits the largest max(4, ceil(rows/2)) sizes by default; rows must be
// (n, e_n) with n ascending and e_n > 0.
RateFit fit_rate(const std::vector<std::pair<double, double>>& table, bool full_range = false);

// Smallest n with C n^{-rho} <= epsilon under the fitted law.
long knots_for_accuracy(const RateFit& fit, double epsilon);

}  // namespace qms
