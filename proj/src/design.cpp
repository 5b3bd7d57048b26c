#include "qmspline/design.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "qmspline/quadrature.hpp"

namespace qms {

namespace {

constexpr double kInversionTol = 1e-12;

double inv_p(double p) {
  if (std::isinf(p)) return 0.0;
  if (!(p >= 1.0)) throw ConfigError("norm order p must be >= 1 (or infinity)");
  return 1.0 / p;
}

// H(G(u)) = u spot check shared by all density constructors.
void validate_roundtrip(const GeneratingDensity& d) {
  for (int i = 1; i <= 20; ++i) {
    double u = static_cast<double>(i) / 20.0;
    double back = d.H(d.G(u));
    if (std::abs(back - u) > 1e-10) {
      std::ostringstream msg;
      msg << "quantile/cumulative round trip off by " << std::abs(back - u) << " at u=" << u;
      throw ConstructionError(msg.str());
    }
  }
}

// Plain double GL-16 integral of a positive density over [a,b].
double gl16(const std::function<double(double)>& f, double a, double b) {
  const auto& rule = gauss_legendre(16);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return acc * half;
}

struct DensityTable {
  std::vector<double> t;    // log-spaced nodes, t.front() = t_min, t.back() = 1
  std::vector<double> cum;  // normalized cumulative H at the nodes
  double total = 0.0;       // raw mass of h_raw over (0,1]
  double head_mass = 0.0;   // raw mass below t_min (fitted power)
  double head_exp = 0.0;    // h_raw(t) ~ h_raw(t_min) (t/t_min)^{-head_exp} below t_min
  double h_tmin = 0.0;
  std::function<double(double)> h_raw;

  double raw_cum(double x) const {
    // Raw mass of (0, x].
    if (x <= t.front()) {
      return head_mass * std::pow(x / t.front(), 1.0 - head_exp);
    }
    auto it = std::upper_bound(t.begin(), t.end(), x);
    auto i = static_cast<std::size_t>(it - t.begin()) - 1;
    if (i >= t.size() - 1) i = t.size() - 2;
    // cum[i] is normalized; scale back to raw mass and add the partial piece.
    double raw_at_node = cum[i] * total;
    return raw_at_node + (x > t[i] ? gl16(h_raw, t[i], x) : 0.0);
  }

  double H(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return raw_cum(x) / total;
  }

  double quantile(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double target = u * total;
    if (target <= head_mass) {
      return t.front() * std::pow(target / head_mass, 1.0 / (1.0 - head_exp));
    }
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    auto hi_i = static_cast<std::size_t>(it - cum.begin());
    if (hi_i == 0) hi_i = 1;
    double lo = t[hi_i - 1], hi = t[hi_i];
    // Safeguarded Newton on H(x) - u.
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
      double f = H(x) - u;
      if (std::abs(f) <= kInversionTol) return x;
      if (f > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      double deriv = h_raw(x) / total;
      double step = (deriv > 0.0) ? x - f / deriv : lo - 1.0;
      x = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
    }
    throw ConstructionError("quantile iteration failed to reach tolerance");
  }
};

}  // namespace

GeneratingDensity make_power_density(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("power density exponent must be positive and finite");
  }
  GeneratingDensity d;
  d.kind = DensityKind::power;
  d.lambda = lambda;
  d.h = [lambda](double t) { return std::pow(t, 1.0 / lambda - 1.0) / lambda; };
  d.H = [lambda](double t) { return std::pow(t, 1.0 / lambda); };
  d.G = [lambda](double u) { return std::pow(u, lambda); };
  d.g = [lambda](double s) { return lambda * std::pow(s, lambda - 1.0); };
  return d;
}

GeneratingDensity make_closed_form_density(std::function<double(double)> h,
                                           std::function<double(double)> H,
                                           std::function<double(double)> G,
                                           std::function<double(double)> g) {
  GeneratingDensity d;
  d.kind = DensityKind::closed_form;
  d.h = std::move(h);
  d.H = std::move(H);
  d.G = std::move(G);
  d.g = std::move(g);
  validate_roundtrip(d);
  return d;
}

GeneratingDensity make_tabulated_density(const std::function<double(double)>& h_raw,
                                         double t_min) {
  if (!(t_min > 0.0 && t_min < 1e-3)) throw ConfigError("tabulated density needs 0 < t_min < 1e-3");

  auto tab = std::make_shared<DensityTable>();
  tab->h_raw = h_raw;

  constexpr std::size_t kNodes = 2048;
  tab->t.resize(kNodes);
  const double log_tmin = std::log(t_min);
  for (std::size_t i = 0; i < kNodes; ++i) {
    double frac = static_cast<double>(i) / static_cast<double>(kNodes - 1);
    tab->t[i] = std::exp(log_tmin * (1.0 - frac));
  }
  tab->t.front() = t_min;
  tab->t.back() = 1.0;

  // Power head below t_min from the local log-log slope.
  const double t1 = t_min, t2 = 4.0 * t_min;
  const double h1 = h_raw(t1), h2 = h_raw(t2);
  if (!(h1 > 0.0) || !(h2 > 0.0)) throw ConstructionError("density must be positive on (0,1]");
  tab->head_exp = -(std::log(h2) - std::log(h1)) / (std::log(t2) - std::log(t1));
  if (tab->head_exp >= 1.0) {
    throw ConstructionError("density is not integrable at 0 (blow-up exponent >= 1)");
  }
  tab->h_tmin = h1;
  tab->head_mass = h1 * t_min / (1.0 - tab->head_exp);

  // Raw cumulative over the grid.
  std::vector<double> raw(kNodes, 0.0);
  raw[0] = tab->head_mass;
  for (std::size_t i = 1; i < kNodes; ++i) {
    double seg = gl16(h_raw, tab->t[i - 1], tab->t[i]);
    if (!(seg >= 0.0) || !std::isfinite(seg)) {
      throw ConstructionError("density produced a non-finite segment mass");
    }
    raw[i] = raw[i - 1] + seg;
  }
  tab->total = raw.back();
  if (!(tab->total > 0.0)) throw ConstructionError("density has zero total mass");
  tab->cum.resize(kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) tab->cum[i] = raw[i] / tab->total;

  GeneratingDensity d;
  d.kind = DensityKind::tabulated;
  const double total = tab->total;
  d.h = [tab, total](double t) { return tab->h_raw(t) / total; };
  d.H = [tab](double t) { return tab->H(t); };
  d.G = [tab](double u) { return tab->quantile(u); };
  d.g = [tab, total](double s) {
    double x = tab->quantile(s);
    double hx = tab->h_raw(x) / total;
    return hx > 0.0 ? 1.0 / hx : 0.0;
  };
  validate_roundtrip(d);
  return d;
}

Design generate_knots(const GeneratingDensity& density, std::size_t n) {
  if (n < 1) throw ConfigError("knot generation needs n >= 1");
  Design d;
  d.knots.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    double u = static_cast<double>(i) / static_cast<double>(n);
    double t = 0.0;
    if (density.kind == DensityKind::power) {
      t = std::pow(u, density.lambda);
    } else {
      t = density.G(u);
      if (i > 0 && i < n && std::abs(density.H(t) - u) > 1e-10) {
        throw ConstructionError("quantile map failed to invert the cumulative");
      }
    }
    d.knots[i] = t;
  }
  d.knots.front() = 0.0;
  d.knots.back() = 1.0;
  validate_design(d);
  return d;
}

ConditionVerdict check_condition(const SmoothnessProfile& profile,
                                 const GeneratingDensity& density, double p,
                                 ConditionVariant variant, int k) {
  if (density.kind != DensityKind::power) {
    throw UndecidableError("admissibility is decidable only for power densities");
  }
  const double invp = inv_p(p);
  const double la = profile.l + profile.alpha;
  if (!(la > 0.0)) throw IncompleteProfileError("global smoothness exponent l+alpha must be positive");

  double order = 0.0;
  PowerLaw sub_law{};
  bool v_from_c = false;
  std::string sub_source;
  if (variant == ConditionVariant::C) {
    order = profile.m + profile.beta;
    if (profile.v_power) {
      sub_law = *profile.v_power;
      sub_source = "V";
    } else if (profile.c_power) {
      sub_law = *profile.c_power;
      v_from_c = true;
      sub_source = "c (V not recorded)";
    } else {
      throw IncompleteProfileError("variant C needs the blow-up exponent of V or c");
    }
  } else {
    if (k < 1) throw ConfigError("variant Cprime needs the spline degree k >= 1");
    order = static_cast<double>(k) + 1.0;
    auto it = profile.ck_powers.find(k);
    if (it == profile.ck_powers.end()) {
      throw IncompleteProfileError("variant Cprime needs the power law of c_k for the requested k");
    }
    sub_law = it->second;
    sub_source = "c_k";
  }

  ConditionVerdict v;
  v.v_from_c = v_from_c;
  v.lambda_main = order / (la + invp);
  const double sub_den = order - sub_law.theta + invp;
  v.lambda_sub = (sub_den > 0.0) ? order / sub_den : std::numeric_limits<double>::infinity();
  v.threshold = std::max(v.lambda_main, v.lambda_sub);
  v.satisfied = density.lambda > v.threshold;

  std::ostringstream detail;
  detail << "lambda=" << density.lambda << ", main threshold " << v.lambda_main
         << ", sub threshold " << v.lambda_sub << " (exponent source: " << sub_source
         << ", theta=" << sub_law.theta << "); strict inequality required";
  if (variant == ConditionVariant::C && !std::isinf(p) && profile.c_power) {
    auto w = optimal_density_theta_window(profile, p);
    detail << "; optimal-density theta window (" << w.lower << ", " << w.upper
           << "), theta_c=" << w.theta << (w.inside ? " inside" : " outside");
  }
  v.detail = detail.str();
  return v;
}

ThetaWindow optimal_density_theta_window(const SmoothnessProfile& profile, double p) {
  if (std::isinf(p)) throw ConfigError("the theta window applies to finite p only");
  const double invp = inv_p(p);
  if (!profile.c_power) throw IncompleteProfileError("theta window needs the power law of c");
  const double la = profile.l + profile.alpha;
  const double mb = profile.m + profile.beta;
  ThetaWindow w;
  w.upper = mb + invp;
  w.lower = (1.0 - (la + invp) / mb) * w.upper;
  w.theta = profile.c_power->theta;
  w.inside = (w.lower < w.theta && w.theta < w.upper);
  return w;
}

namespace {

struct GreedyParams {
  double first_bound = 0.0;  // bound on t_1
  double interior_coef = 0.0;  // n^{-kappa/(m+beta+1/p)}
  double v_exp = 0.0;          // V(t)^{-v_exp} multiplies interior_coef
  const std::function<double(double)>* V = nullptr;
};

// Runs the greedy construction with bounds inflated by sigma.  Returns the
// number of steps used, or 0 if 1 was not reached within max_steps.
std::size_t greedy_steps_needed(const GreedyParams& gp, double sigma, std::size_t max_steps,
                                std::vector<double>* knots_out) {
  double t = 0.0;
  std::size_t steps = 0;
  if (knots_out) {
    knots_out->clear();
    knots_out->push_back(0.0);
  }
  while (t < 1.0 && steps < max_steps) {
    double bound = (steps == 0)
                       ? gp.first_bound
                       : std::pow((*gp.V)(t), -gp.v_exp) * gp.interior_coef;
    if (!(bound > 0.0) || !std::isfinite(bound)) return 0;
    double next = t + sigma * bound;
    // Absolute snap guard: lets exact-fit constructions (e.g. uniform steps
    // of width 1/n) close the interval despite rounding in the sum.
    if (next >= 1.0 - 1e-12) next = 1.0;
    if (next <= t) return 0;  // stalled
    t = next;
    ++steps;
    if (knots_out) knots_out->push_back(t);
  }
  return t >= 1.0 ? steps : 0;
}

}  // namespace

IntermediateDesign intermediate_design(const SmoothnessProfile& profile, double kappa,
                                       std::size_t n, double p) {
  const double invp = inv_p(p);
  const double la = profile.l + profile.alpha;
  const double mb = profile.m + profile.beta;
  const double M = profile.holder_const;
  if (!(la > 0.0) || !(mb > 0.0) || !(M > 0.0)) {
    throw IncompleteProfileError("intermediate design needs l+alpha, m+beta, M positive");
  }
  if (!profile.V_fn) throw IncompleteProfileError("intermediate design needs V");
  if (!(kappa >= la - 1e-12 && kappa <= mb + 1e-12)) {
    throw ConfigError("kappa must lie in [l+alpha, m+beta]");
  }
  if (n < 1) throw ConfigError("intermediate design needs n >= 1");

  GreedyParams gp;
  const double nd = static_cast<double>(n);
  gp.first_bound = std::pow(M, -1.0 / (la + invp)) * std::pow(nd, -kappa / (la + invp));
  gp.interior_coef = std::pow(nd, -kappa / (mb + invp));
  gp.v_exp = 1.0 / (2.0 * (mb + invp));
  gp.V = &profile.V_fn;

  constexpr double kMaxRelax = 2.0;
  auto feasible = [&](double sigma, std::size_t steps_cap) {
    return greedy_steps_needed(gp, sigma, steps_cap, nullptr) > 0;
  };

  double sigma = 1.0;
  if (!feasible(1.0, n)) {
    if (!feasible(kMaxRelax, n)) {
      // Find the smallest n for which even the relaxed bounds work.
      std::size_t minimal = 0;
      std::size_t probe = n;
      for (int doublings = 0; doublings < 24; ++doublings) {
        probe *= 2;
        GreedyParams gp2 = gp;
        const double pd = static_cast<double>(probe);
        gp2.first_bound = std::pow(M, -1.0 / (la + invp)) * std::pow(pd, -kappa / (la + invp));
        gp2.interior_coef = std::pow(pd, -kappa / (mb + invp));
        if (greedy_steps_needed(gp2, kMaxRelax, probe, nullptr) > 0) {
          minimal = probe;
          break;
        }
      }
      // Tighten by bisection on n when a feasible size was found.
      if (minimal > 0) {
        std::size_t lo = minimal / 2, hi = minimal;
        while (hi - lo > 1) {
          std::size_t mid = lo + (hi - lo) / 2;
          GreedyParams gp2 = gp;
          const double pd = static_cast<double>(mid);
          gp2.first_bound = std::pow(M, -1.0 / (la + invp)) * std::pow(pd, -kappa / (la + invp));
          gp2.interior_coef = std::pow(pd, -kappa / (mb + invp));
          if (greedy_steps_needed(gp2, kMaxRelax, mid, nullptr) > 0) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        minimal = hi;
      }
      throw InfeasibleDesignError("greedy design cannot reach 1 within n steps", minimal);
    }
    double lo = 1.0, hi = kMaxRelax;
    for (int iter = 0; iter < 80; ++iter) {
      double mid = 0.5 * (lo + hi);
      (feasible(mid, n) ? hi : lo) = mid;
    }
    sigma = hi;
  }

  std::vector<double> knots;
  std::size_t steps = greedy_steps_needed(gp, sigma, n, &knots);
  if (steps == 0) {
    // The bisection endpoint should be feasible; guard against rounding.
    sigma = std::nextafter(sigma, kMaxRelax);
    steps = greedy_steps_needed(gp, sigma, n, &knots);
    if (steps == 0) throw ConstructionError("relaxed greedy design unexpectedly infeasible");
  }

  // Spend surplus knots halving the largest interval (leftmost on ties).
  while (knots.size() < n + 1) {
    std::size_t widest = 1;
    double best = -1.0;
    for (std::size_t j = 1; j < knots.size(); ++j) {
      double len = knots[j] - knots[j - 1];
      if (len > best) {
        best = len;
        widest = j;
      }
    }
    knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(widest),
                 0.5 * (knots[widest - 1] + knots[widest]));
  }

  IntermediateDesign out;
  out.design.knots = std::move(knots);
  out.relaxation = sigma;
  out.greedy_steps = steps;
  validate_design(out.design);
  return out;
}

}  // namespace qms
