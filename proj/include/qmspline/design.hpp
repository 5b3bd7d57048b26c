#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qmspline/errors.hpp"
#include "qmspline/kernel.hpp"

namespace qms {

// Knot set 0 = t_0 < t_1 < ... < t_n = 1 on the unit interval.
struct Design {
  std::vector<double> knots;

  std::size_t intervals() const { return knots.empty() ? 0 : knots.size() - 1; }
};

inline void validate_design(const Design& design) {
  const auto& ts = design.knots;
  if (ts.size() < 2) throw ConstructionError("design needs at least two knots");
  if (ts.front() != 0.0) throw ConstructionError("design must start at 0");
  if (ts.back() != 1.0) throw ConstructionError("design must end at 1");
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i] > ts[i - 1])) throw ConstructionError("design knots must be strictly increasing");
  }
}

// 1-based index j of the interval (t_{j-1}, t_j] containing t; t = 0 maps to
// interval 1, so a knot always belongs to the interval it terminates.
inline std::size_t containing_interval(const Design& design, double t) {
  const auto& ts = design.knots;
  if (t < 0.0 || t > 1.0) throw DomainError("evaluation point outside [0,1]");
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  auto j = static_cast<std::size_t>(it - ts.begin());
  return j == 0 ? 1 : j;
}

// A probability density h on (0,1] together with its cumulative H, quantile
// G = H^{-1}, and quantile density g = G' = 1/(h ∘ G).  Knots are placed at
// quantiles: t_i = G(i/n).
enum class DensityKind { power, tabulated, closed_form };

struct GeneratingDensity {
  DensityKind kind = DensityKind::closed_form;
  double lambda = 0.0;  // power family: G(u) = u^lambda
  std::function<double(double)> h;
  std::function<double(double)> H;
  std::function<double(double)> G;
  std::function<double(double)> g;
};

// Power family: G(u) = u^lambda, H(t) = t^{1/lambda}, h(t) = t^{1/lambda-1}/lambda,
// g(s) = lambda s^{lambda-1}.  lambda = 1 is the uniform density.
GeneratingDensity make_power_density(double lambda);

// Wraps user-supplied closed forms; verifies H(G(u)) = u to 1e-10 on a grid.
GeneratingDensity make_closed_form_density(std::function<double(double)> h,
                                           std::function<double(double)> H,
                                           std::function<double(double)> G,
                                           std::function<double(double)> g);

// Builds the cumulative and quantile maps numerically from a raw (not
// necessarily normalized) density that may blow up integrably at 0: the mass
// is accumulated over a log-spaced grid down to t_min with a fitted power
// head below it, and quantiles are found by safeguarded Newton iteration to
// |H(t) - u| <= 1e-12.
GeneratingDensity make_tabulated_density(const std::function<double(double)>& h_raw,
                                         double t_min = 1e-12);

// Quantile knots t_i = G(i/n); closed form for the power family.
Design generate_knots(const GeneratingDensity& density, std::size_t n);

// Admissibility checks for quantile designs from power densities.  Variant C
// gates the approximation rate by the local smoothness order m+beta; variant
// Cprime gates it by the spline order k+1 (k is ignored for C).  Both reduce
// to lambda thresholds for power-law profile data:
//   main:  lambda > order / (l + alpha + 1/p)
//   sub:   lambda > order / (order - theta + 1/p)
// where theta is the blow-up exponent of V (variant C; falls back to the
// exponent of c when V has none recorded) or of c_k (variant Cprime).  The
// reported threshold is the max of the two; equality is not sufficient.
enum class ConditionVariant { C, Cprime };

struct ConditionVerdict {
  bool satisfied = false;
  double threshold = 0.0;
  double lambda_main = 0.0;
  double lambda_sub = 0.0;
  bool v_from_c = false;  // sub-threshold exponent taken from c, not V
  std::string detail;
};

ConditionVerdict check_condition(const SmoothnessProfile& profile,
                                 const GeneratingDensity& density, double p,
                                 ConditionVariant variant, int k = 0);

// For a profile whose local-variance function follows c(t) ~ C t^{-2 theta},
// the window (lower, upper) of theta values for which the variance-optimal
// density is admissible for the L_p error, p < infinity:
//   lower = (1 - (l+alpha+1/p)/(m+beta)) * (m+beta+1/p),  upper = m+beta+1/p.
struct ThetaWindow {
  double lower = 0.0;
  double upper = 0.0;
  double theta = 0.0;
  bool inside = false;
};

ThetaWindow optimal_density_theta_window(const SmoothnessProfile& profile, double p);

// Greedy left-to-right design whose interval lengths obey
//   h_1   <= M^{-1/(l+alpha+1/p)} n^{-kappa/(l+alpha+1/p)}
//   h_j   <= V(t_{j-1})^{-1/(2(m+beta+1/p))} n^{-kappa/(m+beta+1/p)},  j >= 2,
// up to the reported uniform relaxation factor (<= 2): when the strict bounds
// cannot reach 1 in n steps, the smallest inflation that does is applied to
// every bound.  Surplus steps are spent halving the largest intervals.  The
// closing interval may exceed its bound by at most 1e-12 absolute (the step
// snaps to 1 when it lands that close).
struct IntermediateDesign {
  Design design;
  double relaxation = 1.0;
  std::size_t greedy_steps = 0;
};

IntermediateDesign intermediate_design(const SmoothnessProfile& profile, double kappa,
                                       std::size_t n, double p);

}  // namespace qms
