#include "qmspline/qmerror.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmspline/quadrature.hpp"

namespace qms {

namespace {

bool use_extended(const SplineScheme& scheme, CovPrecision precision) {
  switch (precision) {
    case CovPrecision::plain:
      return false;
    case CovPrecision::extended:
      return true;
    case CovPrecision::automatic:
    default:
      return scheme.k >= 3;
  }
}

struct ErrorForm {
  const CovarianceModel* model = nullptr;
  const Design* design = nullptr;
  const SplineScheme* scheme = nullptr;
  bool extended = true;
  double min_deficit = 0.0;

  DDouble cov(double s, double t, int i, int j) const {
    return extended ? eval_cov_dd(*model, s, t, i, j) : DDouble(eval_cov(*model, s, t, i, j));
  }

  // Clamped e_n(t)^2 in double-double precision.
  DDouble error_sq(double t) {
    const auto weights = basis_weights(*scheme, *design, t);
    const auto& knots = design->knots;

    DDouble acc = cov(t, t, 0, 0);
    for (const auto& a : weights) {
      acc -= 2.0 * (a.weight * cov(t, knots[a.knot], 0, a.deriv));
    }
    for (const auto& a : weights) {
      for (const auto& b : weights) {
        // Error-free weight product: a rounded double product would break
        // the exact-square structure of the form at ~1e-17, far above the
        // extended-precision clamp budget.
        acc += detail::two_prod(a.weight, b.weight) *
               cov(knots[a.knot], knots[b.knot], a.deriv, b.deriv);
      }
    }
    if (!model->zero_mean) {
      DDouble bias(model->mean(t, 0));
      for (const auto& a : weights) {
        bias -= a.weight * DDouble(model->mean(knots[a.knot], a.deriv));
      }
      acc += dd_sqr(bias);
    }
    if (acc.hi < min_deficit) min_deficit = acc.hi;
    if (acc.hi < 0.0) return DDouble(0.0);
    return acc;
  }
};

}  // namespace

double pointwise_error(const CovarianceModel& model, const Design& design,
                       const SplineScheme& scheme, double t, CovPrecision precision) {
  validate_design(design);
  ErrorForm form{&model, &design, &scheme, use_extended(scheme, precision)};
  return static_cast<double>(dd_sqrt(form.error_sq(t)));
}

NormResult norm_error(const CovarianceModel& model, const Design& design,
                      const SplineScheme& scheme, double p, CovPrecision precision) {
  validate_design(design);
  if (!(p >= 1.0)) throw ConfigError("norm order p must be >= 1 (or infinity)");
  ErrorForm form{&model, &design, &scheme, use_extended(scheme, precision)};

  NormResult out;
  out.p = p;
  const auto& ts = design.knots;

  if (std::isinf(p)) {
    double best_sq = 0.0;
    for (std::size_t j = 1; j < ts.size(); ++j) {
      const double h = ts[j] - ts[j - 1];
      auto f = [&form](double t) { return static_cast<double>(form.error_sq(t)); };
      MaxResult m = maximize_scan_golden(f, ts[j - 1], ts[j], 33, 1e-10 * h);
      best_sq = std::max(best_sq, m.value);
    }
    out.value = std::sqrt(best_sq);
    out.diag.panels = static_cast<int>(ts.size()) - 1;
  } else {
    constexpr double kRelTol = 1e-7;
    const double half_p = 0.5 * p;
    auto f = [&form, half_p](double t) {
      DDouble e2 = form.error_sq(t);
      if (half_p == 1.0) return e2;
      return dd_pow(e2, half_p);
    };

    // Coarse single-panel pass over every interval to scale the absolute
    // slack below.  The squared error often concentrates its mass in a few
    // intervals; the others sit so close to the evaluation noise floor of
    // the compensated form that a pure relative test never settles and
    // refinement runs to the panel cap chasing noise.  An interval may stop
    // once its remaining change cannot move the full integral at kRelTol,
    // apportioned by interval width.
    double coarse_total = 0.0;
    for (std::size_t j = 1; j < ts.size(); ++j) {
      coarse_total += std::max(0.0, static_cast<double>(gauss_panel(f, ts[j - 1], ts[j], 16)));
    }

    const double span = ts.back() - ts.front();
    DDouble total(0.0);
    double change_sum = 0.0;
    for (std::size_t j = 1; j < ts.size(); ++j) {
      const double slack = kRelTol * coarse_total * ((ts[j] - ts[j - 1]) / span);
      AdaptiveResult r = integrate_adaptive(f, ts[j - 1], ts[j], kRelTol, 16, 4096, slack);
      total += r.value;
      out.diag.panels += r.panels;
      change_sum += r.abs_change;
      out.diag.converged = out.diag.converged && r.converged;
    }
    if (total.hi < 0.0) total = DDouble(0.0);
    out.diag.est_rel_err = total.hi > 0.0 ? change_sum / total.hi : 0.0;
    out.value = static_cast<double>(dd_pow(total, 1.0 / p));
  }
  out.diag.min_deficit = form.min_deficit;
  return out;
}

ErrorCurve error_curve(const CovarianceModel& model, const Design& design,
                       const SplineScheme& scheme, int per_interval, CovPrecision precision) {
  validate_design(design);
  if (per_interval < 1) throw ConfigError("error curve needs at least one sample per interval");
  ErrorForm form{&model, &design, &scheme, use_extended(scheme, precision)};

  ErrorCurve curve;
  const auto& ts = design.knots;
  curve.samples.reserve((ts.size() - 1) * static_cast<std::size_t>(per_interval) + 1);
  auto eval = [&form](double t) { return static_cast<double>(dd_sqrt(form.error_sq(t))); };
  for (std::size_t j = 1; j < ts.size(); ++j) {
    curve.samples.emplace_back(ts[j - 1], eval(ts[j - 1]));
    for (int i = 1; i <= per_interval; ++i) {
      double t = ts[j - 1] + (ts[j] - ts[j - 1]) * i / (per_interval + 1.0);
      curve.samples.emplace_back(t, eval(t));
    }
  }
  curve.samples.emplace_back(1.0, eval(1.0));
  return curve;
}

std::vector<SweepRow> sweep(const CovarianceModel& model, const GeneratingDensity& density,
                            const SplineScheme& scheme, double p,
                            const std::vector<std::size_t>& n_list, CovPrecision precision) {
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw ConfigError("sweep sizes must be strictly increasing");
  }
  std::vector<SweepRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t n : n_list) {
    SweepRow row;
    row.n = n;
    try {
      Design d = generate_knots(density, n);
      NormResult r = norm_error(model, d, scheme, p, precision);
      row.ok = true;
      row.value = r.value;
      row.diag = r.diag;
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qms
