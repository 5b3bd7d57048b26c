#include "qmspline/kernel.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

namespace qms {

double PowerLaw::operator()(double t) const { return coef * std::pow(t, -2.0 * theta); }

namespace {

// ---- scalar shims so each kernel is written once for both backends ------

inline double s_pow(double x, double y) { return std::pow(x, y); }
inline DDouble s_pow(const DDouble& x, double y) { return dd_pow(x, y); }
inline double s_sqrt(double x) { return std::sqrt(x); }
inline DDouble s_sqrt(const DDouble& x) { return dd_sqrt(x); }
inline double s_exp(double x) { return std::exp(x); }
inline DDouble s_exp(const DDouble& x) { return dd_exp(x); }
inline double s_abs(double x) { return std::abs(x); }
inline DDouble s_abs(const DDouble& x) { return dd_abs(x); }

// Exact difference of two doubles in the requested precision.
template <typename Real>
Real exact_diff(double a, double b);
template <>
double exact_diff<double>(double a, double b) {
  return a - b;
}
template <>
DDouble exact_diff<DDouble>(double a, double b) {
  return detail::two_sum(a, -b);
}

void check_args(const CovarianceModel& m, double s, double t, int i, int j) {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0))
    throw DomainError("eval_cov: arguments must lie in [0,1]");
  if (i < 0 || j < 0 || i > m.max_deriv_order || j > m.max_deriv_order) {
    std::ostringstream os;
    os << "eval_cov: derivative order (" << i << "," << j << ") exceeds max "
       << m.max_deriv_order << " for model " << m.kind;
    throw OrderExceededError(os.str());
  }
}

// ---- fractional Brownian motion -----------------------------------------

template <typename Real>
Real fbm_cov(double s, double t, double two_h) {
  Real d = s_abs(exact_diff<Real>(s, t));
  return (s_pow(Real(s), two_h) + s_pow(Real(t), two_h) - s_pow(d, two_h)) * 0.5;
}

// ---- once-integrated fBm -------------------------------------------------
//
// With A = 2H+1 and B = 2H+2 the antiderivatives of |u-v|^{2H} are
// elementary, giving closed kernels:
//   cov11(s,t) = r_B(s,t)
//   cov01(s,t) = int_0^s r_B(u,t) du
//              = ( s^A/A + s t^{2H} - I1(s,t) ) / 2
//   cov00(s,t) = ( t s^A/A + s t^A/A - I2(s,t) ) / 2
//   I1(s,t)    = ( t^A -+ (t-s)^A )/A   (sign by which of s,t is larger)
//   I2(s,t)    = ( s^B + t^B - |s-t|^B ) / (A B)

template <typename Real>
Real ifbm_I1(double s, double t, double A) {
  // int_0^s |u-t|^{2H} du
  if (s <= t) {
    Real d = exact_diff<Real>(t, s);
    return (s_pow(Real(t), A) - s_pow(d, A)) / A;
  }
  Real d = exact_diff<Real>(s, t);
  return (s_pow(Real(t), A) + s_pow(d, A)) / A;
}

template <typename Real>
Real ifbm_cov(double s, double t, double hurst, int i, int j) {
  const double two_h = 2.0 * hurst;
  const double A = two_h + 1.0;
  const double B = two_h + 2.0;
  if (i == 1 && j == 1) return fbm_cov<Real>(s, t, two_h);
  if (i == 1 && j == 0) return ifbm_cov<Real>(t, s, hurst, 0, 1);
  if (i == 0 && j == 1) {
    // int_0^s r_B(u,t) du with the roles fixed by symmetry of r1.
    return (s_pow(Real(s), A) / A + Real(s) * s_pow(Real(t), two_h) - ifbm_I1<Real>(s, t, A)) * 0.5;
  }
  Real d = s_abs(exact_diff<Real>(s, t));
  Real I2 = (s_pow(Real(s), B) + s_pow(Real(t), B) - s_pow(d, B)) / (A * B);
  return (Real(t) * s_pow(Real(s), A) / A + Real(s) * s_pow(Real(t), A) / A - I2) * 0.5;
}

// ---- time-changed fBm ----------------------------------------------------

template <typename Real>
Real tc_fbm_cov(double s, double t, double hurst) {
  Real rs = s_sqrt(Real(s));
  Real rt = s_sqrt(Real(t));
  Real d = s_abs(rs - rt);
  return (s_pow(Real(s), hurst) + s_pow(Real(t), hurst) - s_pow(d, 2.0 * hurst)) * 0.5;
}

// ---- distorted stationary process ---------------------------------------
//
// r(s,t) = s^eta t^eta phi(s-t), phi(x) = exp(-x^2).  Product rule:
//   cov(s,t,i,j) = sum_{a<=i} sum_{b<=j} C(i,a) C(j,b) ff(a) ff(b)
//                  s^{eta-a} t^{eta-b} (-1)^{j-b} phi^{(i+j-a-b)}(s-t)
// with ff(a) = eta (eta-1) ... (eta-a+1) and
// phi^{(n)}(x) = exp(-x^2) P_n(x), P_0 = 1, P_{n+1} = P_n' - 2x P_n.

constexpr int kDistMaxOrder = 4;

const std::array<std::vector<long long>, 2 * kDistMaxOrder + 1>& phi_poly_table() {
  static const auto table = [] {
    std::array<std::vector<long long>, 2 * kDistMaxOrder + 1> polys;
    polys[0] = {1};
    for (int n = 1; n < static_cast<int>(polys.size()); ++n) {
      const auto& p = polys[n - 1];
      std::vector<long long> q(p.size() + 1, 0);
      for (size_t k = 1; k < p.size(); ++k) q[k - 1] += static_cast<long long>(k) * p[k];
      for (size_t k = 0; k < p.size(); ++k) q[k + 1] -= 2 * p[k];
      polys[n] = std::move(q);
    }
    return polys;
  }();
  return table;
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

template <typename Real>
Real phi_deriv(const Real& x, int n) {
  const auto& coeffs = phi_poly_table()[n];
  Real poly(coeffs.back() * 1.0);
  for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
    poly = poly * x + static_cast<double>(coeffs[k]);
  return s_exp(-(x * x)) * poly;
}

template <typename Real>
Real falling_factorial(double eta, int a) {
  Real r(1.0);
  for (int x = 0; x < a; ++x) r *= exact_diff<Real>(eta, static_cast<double>(x));
  return r;
}

template <typename Real>
Real distorted_cov(double s, double t, double eta, int i, int j) {
  if (s == 0.0 || t == 0.0) {
    if ((s == 0.0 && i >= 1) || (t == 0.0 && j >= 1))
      throw SingularityError("distorted_stationary: derivative kernel singular at t = 0");
    return Real(0.0);  // every term carries a factor 0^eta
  }
  Real x = exact_diff<Real>(s, t);
  std::array<Real, kDistMaxOrder + 1> s_pows, t_pows, ffs;
  for (int a = 0; a <= i; ++a) s_pows[a] = s_pow(Real(s), eta - a);
  for (int b = 0; b <= j; ++b) t_pows[b] = s_pow(Real(t), eta - b);
  for (int a = 0; a <= std::max(i, j); ++a) ffs[a] = falling_factorial<Real>(eta, a);
  Real sum(0.0);
  for (int a = 0; a <= i; ++a) {
    for (int b = 0; b <= j; ++b) {
      Real term = ffs[a] * ffs[b] * s_pows[a] * t_pows[b] * phi_deriv<Real>(x, i - a + j - b);
      double sign = ((j - b) % 2 == 0) ? 1.0 : -1.0;
      double coef = static_cast<double>(binom(i, a) * binom(j, b)) * sign;
      sum += term * coef;
    }
  }
  return sum;
}

std::function<double(double, int)> zero_mean_fn() {
  return [](double, int) { return 0.0; };
}

double require_param(const std::map<std::string, double>& params, const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("make_model: missing parameter '" + key + "'");
  return it->second;
}

}  // namespace

double eval_cov(const CovarianceModel& model, double s, double t, int i, int j) {
  check_args(model, s, t, i, j);
  return model.cov(s, t, i, j);
}

DDouble eval_cov_dd(const CovarianceModel& model, double s, double t, int i, int j) {
  check_args(model, s, t, i, j);
  return model.cov_dd(s, t, i, j);
}

CovarianceModel make_fbm(double hurst) {
  if (!(hurst > 0.0 && hurst <= 1.0)) throw ConfigError("fbm: hurst must lie in (0,1]");
  CovarianceModel m;
  m.kind = "fbm";
  m.max_deriv_order = 0;
  m.mean = zero_mean_fn();
  const double two_h = 2.0 * hurst;
  m.cov = [two_h](double s, double t, int, int) { return fbm_cov<double>(s, t, two_h); };
  m.cov_dd = [two_h](double s, double t, int, int) { return fbm_cov<DDouble>(s, t, two_h); };
  m.profile.l = 0;
  m.profile.alpha = hurst;
  m.profile.holder_const = 1.0;
  m.profile.m = 0;
  m.profile.beta = hurst;
  m.profile.c_fn = [](double) { return 1.0; };
  m.profile.V_fn = m.profile.c_fn;
  m.profile.c_power = PowerLaw{1.0, 0.0};
  m.profile.v_power = PowerLaw{1.0, 0.0};
  return m;
}

CovarianceModel make_integrated_fbm(int m_order, double hurst) {
  if (!(hurst > 0.0 && hurst <= 1.0))
    throw ConfigError("integrated_fbm: hurst must lie in (0,1]");
  if (m_order == 0) return make_fbm(hurst);
  if (m_order != 1)
    throw ConfigError("integrated_fbm: only m in {0,1} supported");
  CovarianceModel m;
  m.kind = "integrated_fbm";
  m.max_deriv_order = 1;
  m.mean = zero_mean_fn();
  m.cov = [hurst](double s, double t, int i, int j) { return ifbm_cov<double>(s, t, hurst, i, j); };
  m.cov_dd = [hurst](double s, double t, int i, int j) {
    return ifbm_cov<DDouble>(s, t, hurst, i, j);
  };
  m.profile.l = 1;
  m.profile.alpha = hurst;
  m.profile.holder_const = 1.0;
  m.profile.m = 1;
  m.profile.beta = hurst;
  m.profile.c_fn = [](double) { return 1.0; };
  m.profile.V_fn = m.profile.c_fn;
  m.profile.c_power = PowerLaw{1.0, 0.0};
  m.profile.v_power = PowerLaw{1.0, 0.0};
  return m;
}

CovarianceModel make_time_changed_fbm(double hurst) {
  if (!(hurst > 0.0 && hurst <= 1.0))
    throw ConfigError("time_changed_fbm: hurst must lie in (0,1]");
  CovarianceModel m;
  m.kind = "time_changed_fbm";
  m.max_deriv_order = 0;
  m.mean = zero_mean_fn();
  m.cov = [hurst](double s, double t, int, int) { return tc_fbm_cov<double>(s, t, hurst); };
  m.cov_dd = [hurst](double s, double t, int, int) { return tc_fbm_cov<DDouble>(s, t, hurst); };
  m.profile.l = 0;
  m.profile.alpha = 0.5 * hurst;
  m.profile.holder_const = 1.0;
  m.profile.m = 0;
  m.profile.beta = hurst;
  m.profile.c_fn = [hurst](double t) { return std::pow(4.0 * t, -hurst); };
  m.profile.V_fn = m.profile.c_fn;
  m.profile.c_power = PowerLaw{std::pow(4.0, -hurst), 0.5 * hurst};
  m.profile.v_power = m.profile.c_power;
  return m;
}

CovarianceModel make_distorted_stationary(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw ConfigError("distorted_stationary: eta must lie in (0,1)");
  CovarianceModel m;
  m.kind = "distorted_stationary";
  m.max_deriv_order = kDistMaxOrder;
  m.mean = zero_mean_fn();
  m.cov = [eta](double s, double t, int i, int j) { return distorted_cov<double>(s, t, eta, i, j); };
  m.cov_dd = [eta](double s, double t, int i, int j) {
    return distorted_cov<DDouble>(s, t, eta, i, j);
  };
  m.profile.l = 0;
  m.profile.alpha = eta;
  m.profile.holder_const = 1.0;
  // Smooth on (0,1]; the profile exposes the highest order the derivative
  // kernels certify, m = 3 with beta = 1 and c(t) = ||X''''(t)||^2.
  m.profile.m = 3;
  m.profile.beta = 1.0;
  auto cov = m.cov;
  auto c3 = [cov](double t) { return cov(t, t, 4, 4); };
  m.profile.c_fn = c3;
  m.profile.V_fn = c3;
  for (int k = 0; k <= kDistMaxOrder - 1; ++k) {
    double coef = falling_factorial<double>(eta, k + 1);
    m.profile.ck_powers[k] = PowerLaw{coef * coef, (k + 1) - eta};
  }
  m.profile.c_power = m.profile.ck_powers[3];
  m.profile.v_power = m.profile.ck_powers[3];
  return m;
}

CovarianceModel make_model(const std::string& kind, const std::map<std::string, double>& params) {
  if (kind == "fbm") return make_fbm(require_param(params, "hurst"));
  if (kind == "integrated_fbm")
    return make_integrated_fbm(static_cast<int>(require_param(params, "m")),
                               require_param(params, "hurst"));
  if (kind == "time_changed_fbm") return make_time_changed_fbm(require_param(params, "hurst"));
  if (kind == "distorted_stationary")
    return make_distorted_stationary(require_param(params, "eta"));
  throw ConfigError("make_model: unknown model kind '" + kind + "'");
}

}  // namespace qms
