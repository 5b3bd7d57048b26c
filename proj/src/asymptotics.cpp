#include "qmspline/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qmspline/ddouble.hpp"
#include "qmspline/errors.hpp"
#include "qmspline/qmerror.hpp"
#include "qmspline/quadrature.hpp"
#include "qmspline/spline.hpp"

namespace qms {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_norm_exponent(double p) {
  if (std::isnan(p) || p < 1.0) throw ConfigError("norm exponent p must satisfy p >= 1");
}

double inverse_p(double p) {
  check_norm_exponent(p);
  return std::isinf(p) ? 0.0 : 1.0 / p;
}

bool closed_form_applies(int m, double beta, int k) { return beta == 1.0 && m == k; }

bool quadrature_applies(int m, double beta, int k) {
  return (m == 0 || m == 1) && k <= 2 * m + 1 && beta > 0.0 && beta <= 1.0;
}

double b_closed_form(int k, double p) {
  const double fact = factorial(k + 1);
  if (std::isinf(p)) return std::ldexp(1.0, -(k + 1)) / fact;
  // ||[t(1-t)]^{(k+1)/2}||_p = Beta(a, a)^{1/p} with a = p(k+1)/2 + 1.
  const double a = 0.5 * p * (k + 1) + 1.0;
  const double log_beta = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
  return std::exp(log_beta / p) / fact;
}

double b_quadrature(int m, double beta, int k, double p) {
  CovarianceModel model = (m == 0) ? make_fbm(beta) : make_integrated_fbm(1, beta);
  Design unit{{0.0, 1.0}};
  SplineScheme scheme = make_scheme(k, k);
  return norm_error(model, unit, scheme, p, CovPrecision::extended).value;
}

}  // namespace

BConstant b_constant(int m, double beta, int k, double p, BMethod method) {
  if (m < 0) throw ConfigError("b_constant: m must be non-negative");
  if (k != 1 && k != 3 && k != 5) throw ConfigError("b_constant: degree k must be 1, 3, or 5");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("b_constant: beta must lie in (0,1]");
  check_norm_exponent(p);

  BMethod chosen = method;
  if (chosen == BMethod::automatic) {
    if (closed_form_applies(m, beta, k))
      chosen = BMethod::closed_form;
    else if (quadrature_applies(m, beta, k))
      chosen = BMethod::quadrature;
    else
      throw ConfigError(
          "b_constant: no evaluation available for (m, beta, k) = (" + std::to_string(m) + ", " +
          std::to_string(beta) + ", " + std::to_string(k) + ")");
  }

  BConstant out;
  out.m = m;
  out.beta = beta;
  out.k = k;
  out.p = p;
  out.method = chosen;
  if (chosen == BMethod::closed_form) {
    if (!closed_form_applies(m, beta, k))
      throw ConfigError("b_constant: closed form requires beta = 1 and m = k");
    out.value = b_closed_form(k, p);
  } else {
    if (!quadrature_applies(m, beta, k))
      throw ConfigError(
          "b_constant: quadrature route requires m in {0,1}, k <= 2m+1, beta in (0,1]");
    out.value = b_quadrature(m, beta, k, p);
  }
  return out;
}

double local_stationarity(const CovarianceModel& model, int m, double t, double beta,
                          StationarityRoute route) {
  if (m < 0) throw ConfigError("local_stationarity: m must be non-negative");
  if (!(beta > 0.0 && beta <= 1.0))
    throw ConfigError("local_stationarity: beta must lie in (0,1]");
  if (!(t > 0.0 && t <= 1.0)) throw DomainError("local_stationarity: t must lie in (0,1]");

  const bool derivative_ok = (m + 1 <= model.max_deriv_order);
  const bool ladder_ok = (m <= model.max_deriv_order);
  StationarityRoute chosen = route;
  if (chosen == StationarityRoute::automatic)
    chosen = derivative_ok ? StationarityRoute::derivative : StationarityRoute::ladder;

  if (chosen == StationarityRoute::derivative) {
    if (!derivative_ok)
      throw OrderExceededError("local_stationarity: model lacks order m+1 kernels");
    return eval_cov(model, t, t, m + 1, m + 1);
  }

  if (!ladder_ok) throw OrderExceededError("local_stationarity: model lacks order m kernels");

  // Dyadic quotient ladder r2_j = ||X^(m)(t + s) - X^(m)(t)||^2 / s^{2 beta}
  // at s = 2^{-j}, extrapolated twice against an expansion in integer powers
  // of s.  The raw increment cancels catastrophically in double precision for
  // small s, so everything runs in compensated arithmetic.
  int j0 = 8;
  while (j0 < 16 && t + std::ldexp(1.0, -j0) > 1.0) ++j0;
  const int j1 = 20;
  if (t + std::ldexp(1.0, -j0) > 1.0)
    throw DomainError("local_stationarity: no room above t for the quotient ladder");

  std::vector<DDouble> r2;
  for (int j = j0; j <= j1; ++j) {
    const double s = std::ldexp(1.0, -j);
    const double u = t + s;
    DDouble incr = eval_cov_dd(model, u, u, m, m) - 2.0 * eval_cov_dd(model, u, t, m, m) +
                   eval_cov_dd(model, t, t, m, m);
    r2.push_back(incr / dd_pow(DDouble(s), 2.0 * beta));
  }

  std::vector<DDouble> first(r2.size() - 1);
  for (std::size_t i = 0; i + 1 < r2.size(); ++i) first[i] = 2.0 * r2[i + 1] - r2[i];
  std::vector<DDouble> second(first.size() - 1);
  for (std::size_t i = 0; i + 1 < first.size(); ++i)
    second[i] = (4.0 * first[i + 1] - first[i]) / 3.0;

  const double estimate = second.back().hi;
  const double scale = std::max(std::abs(estimate), 1e-300);
  double spread = 0.0;
  const std::size_t tail = std::min<std::size_t>(3, second.size());
  for (std::size_t i = second.size() - tail; i < second.size(); ++i)
    spread = std::max(spread, std::abs(second[i].hi - estimate) / scale);
  if (!(spread <= 1e-3) || !(estimate > 0.0))
    throw EstimationError(
        "local_stationarity: quotient ladder did not stabilize (exponent beta likely wrong)");
  return estimate;
}

GeneratingDensity optimal_density(const PowerLaw& c, double order, double p) {
  if (!(order > 0.0)) throw ConfigError("optimal_density: order must be positive");
  if (!(c.coef > 0.0)) throw ConfigError("optimal_density: power law needs coefficient > 0");
  const double gamma = 1.0 / (order + inverse_p(p));
  const double tg = c.theta * gamma;
  if (tg >= 1.0)
    throw DivergenceError("optimal_density: c^{gamma/2} is not integrable (theta * gamma >= 1)");
  // h ~ t^{-theta*gamma}; the coefficient cancels under normalization.
  return make_power_density(1.0 / (1.0 - tg));
}

GeneratingDensity optimal_density(const std::function<double(double)>& c_fn, double order,
                                  double p) {
  if (!c_fn) throw ConfigError("optimal_density: c_fn must be callable");
  if (!(order > 0.0)) throw ConfigError("optimal_density: order must be positive");
  const double gamma = 1.0 / (order + inverse_p(p));
  const double half_gamma = 0.5 * gamma;
  auto h_raw = [c_fn, half_gamma](double t) { return std::pow(c_fn(t), half_gamma); };

  // Probe the log-slope near zero before tabulating: a tail h ~ t^{-a} with
  // a >= 1 cannot be normalized.
  const double t_lo = 1e-9, t_hi = 1e-7;
  const double h_lo = h_raw(t_lo), h_hi = h_raw(t_hi);
  if (!(h_lo > 0.0) || !(h_hi > 0.0) || !std::isfinite(h_lo) || !std::isfinite(h_hi))
    throw ConfigError("optimal_density: c must be positive and finite near 0");
  const double slope = (std::log(h_hi) - std::log(h_lo)) / (std::log(t_hi) - std::log(t_lo));
  if (slope <= -1.0 + 1e-9)
    throw DivergenceError("optimal_density: c^{gamma/2} is not integrable near 0");
  return make_tabulated_density(h_raw);
}

double near_zero_lambda(const GeneratingDensity& density) {
  if (density.kind == DensityKind::power) return density.lambda;
  if (!density.h) throw ConfigError("near_zero_lambda: density has no raw density function");
  const double t_lo = 1e-9, t_hi = 1e-7;
  const double a =
      -(std::log(density.h(t_hi)) - std::log(density.h(t_lo))) /
      (std::log(t_hi) - std::log(t_lo));
  if (a >= 1.0) throw DivergenceError("near_zero_lambda: density blows up too fast near 0");
  // h ~ t^{-a}  =>  H ~ t^{1-a}  =>  G(u) ~ u^{1/(1-a)}.
  return 1.0 / (1.0 - a);
}

double asymptotic_constant(const BConstant& b, const std::function<double(double)>& c_fn,
                           const GeneratingDensity& density, double p, double order) {
  if (!c_fn) throw ConfigError("asymptotic_constant: c_fn must be callable");
  if (!density.h) throw ConfigError("asymptotic_constant: density has no density function");
  if (!(order > 0.0)) throw ConfigError("asymptotic_constant: order must be positive");
  check_norm_exponent(p);
  if (!(b.value >= 0.0) || !std::isfinite(b.value))
    throw ConfigError("asymptotic_constant: scale constant must be finite and non-negative");

  auto f = [&](double t) { return std::sqrt(c_fn(t)) * std::pow(density.h(t), -order); };

  constexpr double kCap = 1e6;     // partial norms past this are declared divergent
  constexpr int kMaxSegments = 400;

  if (std::isinf(p)) {
    // Supremum over geometric segments (2^{-j-1}, 2^{-j}].  The integrand is a
    // power law times a slowly varying factor near 0, so its segment maxima
    // are eventually monotone; twenty consecutive non-increasing segments with
    // no new global maximum certify the supremum.
    double sup = 0.0;
    double prev_seg = kInf;
    int settled = 0;
    for (int j = 0; j < kMaxSegments; ++j) {
      const double hi = std::ldexp(1.0, -j);
      const double lo = 0.5 * hi;
      MaxResult mr = maximize_scan_golden(f, lo, hi, 33, 1e-12 * (hi - lo));
      const double seg = mr.value;
      if (!std::isfinite(seg)) throw DivergenceError("asymptotic_constant: sup norm diverges");
      if (seg > sup * (1.0 + 1e-12)) {
        sup = seg;
        settled = 0;
      } else if (seg <= prev_seg * (1.0 + 1e-9)) {
        ++settled;
      } else {
        settled = 0;
      }
      if (sup > kCap) throw DivergenceError("asymptotic_constant: sup norm diverges near 0");
      if (settled >= 20) return b.value * sup;
      prev_seg = seg;
    }
    throw DivergenceError("asymptotic_constant: sup norm did not stabilize near 0");
  }

  // Finite p: accumulate the integral of f^p over geometric segments and stop
  // once a geometric tail bound drops below 1e-7 of the running total.
  DDouble total{0.0, 0.0};
  double prev_seg = -1.0;
  for (int j = 0; j < kMaxSegments; ++j) {
    const double hi = std::ldexp(1.0, -j);
    const double lo = 0.5 * hi;
    AdaptiveResult seg = integrate_adaptive(
        [&](double x) { return DDouble(std::pow(f(x), p)); }, lo, hi, 1e-9, 16);
    const double seg_mass = seg.value.hi;
    if (!std::isfinite(seg_mass))
      throw DivergenceError("asymptotic_constant: norm diverges near 0");
    total += seg.value;
    const double partial = std::pow(total.hi, 1.0 / p);
    if (partial > kCap) throw DivergenceError("asymptotic_constant: norm diverges near 0");
    if (j >= 8 && prev_seg > 0.0 && seg_mass < prev_seg) {
      const double ratio = std::min(seg_mass / prev_seg, 0.999);
      const double tail = seg_mass * ratio / (1.0 - ratio);
      if (tail <= 1e-7 * total.hi) return b.value * dd_pow(total, 1.0 / p).hi;
    }
    prev_seg = seg_mass;
  }
  throw DivergenceError("asymptotic_constant: norm did not stabilize near 0");
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& table, bool full_range) {
  if (table.size() < 4) throw ConfigError("fit_rate: need at least 4 rows");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].first > 0.0)) throw ConfigError("fit_rate: sizes must be positive");
    if (!(table[i].second > 0.0) || !std::isfinite(table[i].second))
      throw ConfigError("fit_rate: errors must be positive and finite");
    if (i > 0 && !(table[i].first > table[i - 1].first))
      throw ConfigError("fit_rate: sizes must be strictly increasing");
  }

  const std::size_t rows = table.size();
  std::size_t use = full_range ? rows : std::max<std::size_t>(4, (rows + 1) / 2);
  if (use > rows) use = rows;
  const std::size_t start = rows - use;

  double sx = 0.0, sy = 0.0;
  for (std::size_t i = start; i < rows; ++i) {
    sx += std::log(table[i].first);
    sy += std::log(table[i].second);
  }
  const double xbar = sx / static_cast<double>(use);
  const double ybar = sy / static_cast<double>(use);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = start; i < rows; ++i) {
    const double dx = std::log(table[i].first) - xbar;
    const double dy = std::log(table[i].second) - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ConfigError("fit_rate: degenerate size range");

  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = start; i < rows; ++i) {
    const double dx = std::log(table[i].first) - xbar;
    const double dy = std::log(table[i].second) - ybar;
    const double resid = dy - slope * dx;
    ss_res += resid * resid;
  }

  RateFit fit;
  fit.rho = -slope;
  fit.logC = ybar - slope * xbar;
  fit.r_squared = (syy > 0.0) ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  fit.n_lo = table[start].first;
  fit.n_hi = table[rows - 1].first;
  fit.points_used = static_cast<int>(use);
  fit.full_range = full_range;
  return fit;
}

long knots_for_accuracy(const RateFit& fit, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("knots_for_accuracy: epsilon must be positive");
  if (!(fit.rho > 0.0))
    throw DomainError("knots_for_accuracy: fitted rate does not decay (rho <= 0)");
  const double log_n = (fit.logC - std::log(epsilon)) / fit.rho;
  if (log_n > 41.0)  // e^41 ~ 6e17, near the integer limit of double
    throw DomainError("knots_for_accuracy: required size overflows");
  const double n = std::exp(log_n);
  const double rounded = std::ceil(n * (1.0 - 1e-12) - 1e-12);
  return std::max(1L, static_cast<long>(rounded));
}

}  // namespace qms
