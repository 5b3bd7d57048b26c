#include "qmspline/spline.hpp"

#include <array>
#include <cmath>

#include "qmspline/errors.hpp"

namespace qms {

namespace {

struct CardinalPair {
  double left = 0.0;   // weight of f^(d) at the left endpoint
  double right = 0.0;  // weight of f^(d) at the right endpoint
};

// Cardinal Hermite polynomials on [0,1] for derivative order d, degree 2r+1.
// Obtained by solving the 2(r+1) interpolation conditions; coefficients are
// exact small rationals.
std::array<CardinalPair, 3> cardinal_values(int degree, double u) {
  std::array<CardinalPair, 3> out{};
  const double v = 1.0 - u;
  switch (degree) {
    case 1:
      out[0] = {v, u};
      break;
    case 3:
      out[0] = {v * v * (1.0 + 2.0 * u), u * u * (3.0 - 2.0 * u)};
      out[1] = {u * v * v, -u * u * v};
      break;
    case 5: {
      const double u2 = u * u, u3 = u2 * u;
      const double s = u3 * (10.0 - 15.0 * u + 6.0 * u2);
      out[0] = {1.0 - s, s};
      out[1] = {u - u3 * (6.0 - 8.0 * u + 3.0 * u2), -u3 * v * (4.0 - 3.0 * u)};
      out[2] = {0.5 * u2 * v * v * v, 0.5 * u3 * v * v};
      break;
    }
    default:
      throw UnsupportedDegreeError("supported spline degrees are 1, 3, 5");
  }
  return out;
}

void check_degree(int degree) {
  if (degree != 1 && degree != 3 && degree != 5)
    throw UnsupportedDegreeError("supported spline degrees are 1, 3, 5");
}

}  // namespace

SplineScheme make_scheme(int q, int k) {
  check_degree(q);
  check_degree(k);
  if (q > k) throw UnsupportedDegreeError("first-interval degree q must not exceed k");
  return SplineScheme{q, k};
}

BasisWeights basis_weights(const SplineScheme& scheme, const Design& design, double t) {
  validate_design(design);
  check_degree(scheme.q);
  check_degree(scheme.k);
  if (scheme.q > scheme.k) throw UnsupportedDegreeError("first-interval degree q must not exceed k");

  const std::size_t j = containing_interval(design, t);
  const double a = design.knots[j - 1];
  const double b = design.knots[j];
  const double h = b - a;
  const double u = (t - a) / h;

  const int degree = (j == 1) ? scheme.q : scheme.k;
  const int r = (degree - 1) / 2;
  const auto cards = cardinal_values(degree, u);

  BasisWeights out;
  out.reserve(2 * static_cast<std::size_t>(r + 1));
  double hd = 1.0;  // h^d
  for (int d = 0; d <= r; ++d) {
    const double wl = cards[static_cast<std::size_t>(d)].left * hd;
    const double wr = cards[static_cast<std::size_t>(d)].right * hd;
    if (wl != 0.0) out.push_back({j - 1, d, wl});
    if (wr != 0.0) out.push_back({j, d, wr});
    hd *= h;
  }
  return out;
}

double interpolate_deterministic(const SplineScheme& scheme, const Design& design,
                                 const std::function<double(double, int)>& f, double t) {
  double acc = 0.0;
  for (const auto& e : basis_weights(scheme, design, t)) {
    acc += e.weight * f(design.knots[e.knot], e.deriv);
  }
  return acc;
}

}  // namespace qms
