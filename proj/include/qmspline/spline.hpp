#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qmspline/design.hpp"

namespace qms {

// Composite Hermite interpolation scheme: degree q on the first interval,
// degree k on every other interval.  Both degrees are odd; the degree-(2r+1)
// piece matches values and derivatives up to order r at the interval ends.
struct SplineScheme {
  int q = 1;
  int k = 1;
};

// Validates q, k ∈ {1, 3, 5} and q ≤ k.
SplineScheme make_scheme(int q, int k);

struct WeightEntry {
  std::size_t knot = 0;  // knot index into Design::knots
  int deriv = 0;         // derivative order sampled at that knot
  double weight = 0.0;
};

using BasisWeights = std::vector<WeightEntry>;

// Local cardinal expansion at t: the interpolant equals
// sum_a weight_a * f^(deriv_a)(knots[knot_a]).  Exact zeros are dropped, so a
// knot point yields the single entry (that knot, 0, 1).
BasisWeights basis_weights(const SplineScheme& scheme, const Design& design, double t);

// Applies the expansion to a deterministic function; f(t, d) must return the
// d-th derivative of f at t for d up to (k-1)/2.
double interpolate_deterministic(const SplineScheme& scheme, const Design& design,
                                 const std::function<double(double, int)>& f, double t);

}  // namespace qms
