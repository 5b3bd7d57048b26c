#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qmspline/design.hpp"
#include "qmspline/kernel.hpp"
#include "qmspline/spline.hpp"

namespace qms {

// Which covariance backend feeds the bilinear form.  The form itself is
// always accumulated in compensated double-double arithmetic; `plain` only
// downgrades the kernel evaluations.  `automatic` selects `extended` when
// the scheme samples derivatives (k >= 3), where the squared error can sit
// ~20 digits below the individual terms.
enum class CovPrecision { automatic, plain, extended };

// Quadratic-mean interpolation error
//   e_n(t)^2 = cov(t,t) - 2 sum_a w_a cov(t,tau_a,0,d_a)
//            + sum_a sum_b w_a w_b cov(tau_a,tau_b,d_a,d_b) + bias(t)^2
// with the basis weights of the composite scheme; clamped at zero before the
// square root.
double pointwise_error(const CovarianceModel& model, const Design& design,
                       const SplineScheme& scheme, double t,
                       CovPrecision precision = CovPrecision::automatic);

struct NormDiagnostics {
  int panels = 0;              // accepted quadrature panels across intervals (finite p)
  double est_rel_err = 0.0;    // worst per-interval relative change at acceptance
  bool converged = true;       // every interval met the quadrature tolerance
  double min_deficit = 0.0;    // most negative pre-clamp e^2 encountered
};

struct NormResult {
  double value = 0.0;
  double p = 2.0;
  NormDiagnostics diag;
};

// L_p norm of the error curve over [0,1] (p = infinity gives the sup).
// Finite p: per-interval adaptive Gauss-Legendre on e^p starting from 16
// nodes, halving until the relative change is <= 1e-7.  Sup: per-interval
// 33-point scan plus golden-section refinement to |dt| <= 1e-10 h_j.  Both
// reduce across intervals in index order, independent of scheduling.
NormResult norm_error(const CovarianceModel& model, const Design& design,
                      const SplineScheme& scheme, double p,
                      CovPrecision precision = CovPrecision::automatic);

struct ErrorCurve {
  std::vector<std::pair<double, double>> samples;  // (t, e_n(t)), ascending t
};

// Samples e_n at `per_interval` uniform points inside each interval plus all
// knots.
ErrorCurve error_curve(const CovarianceModel& model, const Design& design,
                       const SplineScheme& scheme, int per_interval,
                       CovPrecision precision = CovPrecision::automatic);

struct SweepRow {
  std::size_t n = 0;
  bool ok = false;
  double value = 0.0;
  std::string message;  // failure reason when !ok
  NormDiagnostics diag;
};

// norm_error over generate_knots(density, n) for each n in n_list (strictly
// increasing).  Row failures are recorded, not propagated.
std::vector<SweepRow> sweep(const CovarianceModel& model, const GeneratingDensity& density,
                            const SplineScheme& scheme, double p,
                            const std::vector<std::size_t>& n_list,
                            CovPrecision precision = CovPrecision::automatic);

}  // namespace qms
