#include "qmspline/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qms {

namespace {

GaussRule build_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Roots of P_n by Newton from the Chebyshev-like initial guess; the
  // recurrence gives P_n and P_n' together.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;  // exact midpoint for odd orders
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

DDouble gauss_panel(const std::function<DDouble(double)>& f, double a, double b, int n) {
  const GaussRule& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  DDouble sum(0.0);
  for (int i = 0; i < n; ++i) sum += f(mid + half * rule.nodes[i]) * rule.weights[i];
  return sum * half;
}

AdaptiveResult integrate_adaptive(const std::function<DDouble(double)>& f, double a, double b,
                                  double rel_tol, int points_per_panel, int max_panels,
                                  double abs_tol) {
  AdaptiveResult res;
  auto pass = [&](int panels) {
    DDouble total(0.0);
    const double h = (b - a) / panels;
    for (int j = 0; j < panels; ++j) {
      double lo = a + j * h;
      double hi = (j + 1 == panels) ? b : a + (j + 1) * h;
      total += gauss_panel(f, lo, hi, points_per_panel);
    }
    return total;
  };

  DDouble prev = pass(1);
  int panels = 1;
  res.converged = false;
  while (panels < max_panels) {
    panels *= 2;
    DDouble cur = pass(panels);
    double denom = std::abs(to_double(cur));
    double change = std::abs(to_double(cur - prev));
    double rel = denom > 0.0 ? change / denom : change;
    prev = cur;
    res.rel_change = rel;
    res.abs_change = change;
    if (rel <= rel_tol || change <= abs_tol) {
      res.converged = true;
      break;
    }
  }
  res.value = prev;
  res.panels = panels;
  return res;
}

MaxResult maximize_scan_golden(const std::function<double(double)>& f, double a, double b,
                               int scan_points, double x_tol) {
  MaxResult best;
  if (scan_points < 3) scan_points = 3;
  const double h = (b - a) / (scan_points - 1);
  int best_i = 0;
  best.x = a;
  best.value = f(a);
  for (int i = 1; i < scan_points; ++i) {
    double x = (i + 1 == scan_points) ? b : a + i * h;
    double v = f(x);
    if (v > best.value) {
      best.value = v;
      best.x = x;
      best_i = i;
    }
  }
  // Golden-section refinement on the bracket around the best sample.
  double lo = std::max(a, a + (best_i - 1) * h);
  double hi = std::min(b, a + (best_i + 1) * h);
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > x_tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  double xm = 0.5 * (lo + hi);
  double fm = f(xm);
  if (f1 > fm) { fm = f1; xm = x1; }
  if (f2 > fm) { fm = f2; xm = x2; }
  if (fm > best.value) {
    best.value = fm;
    best.x = xm;
  }
  return best;
}

}  // namespace qms
