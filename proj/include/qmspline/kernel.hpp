#pragma once

// Covariance models for zero-mean second-order processes on [0,1] whose
// sample-path regularity degrades at t = 0.  A model carries the covariance
// r(s,t) together with its mixed derivative kernels
//   cov(s,t,i,j) = d^{i+j} r / ds^i dt^j
// up to max_deriv_order per argument, in a plain double backend and a
// compensated double-double backend (the error engine needs the latter for
// high-degree schemes where e_n^2 sits ~20 digits below the terms).

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "qmspline/ddouble.hpp"
#include "qmspline/errors.hpp"

namespace qms {

// Near-origin power law f(t) = coef * t^(-2*theta).
struct PowerLaw {
  double coef = 1.0;
  double theta = 0.0;
  double operator()(double t) const;
};

// Regularity data of a process: global Hoelder class C^{l,alpha}([0,1], M)
// plus local order m with exponent beta on (0,1], the mean-smoothness
// exponent, and the local-stationarity / local-Hoelder functions when known.
//
//   c(t)   : ||X^{(m)}(t+s) - X^{(m)}(t)||^2 / |s|^{2 beta} -> c(t) as s -> 0
//   V(t)   : nonincreasing majorant of c used by interval error bounds
//
// v_power is the near-zero power law of V; ck_powers[k] is the near-zero
// power law of c_k(t) = ||X^{(k+1)}(t)||^2 for models smooth enough on
// (0,1] that the higher-order route applies.
struct SmoothnessProfile {
  int l = 0;
  double alpha = 1.0;
  double holder_const = 1.0;  // M
  int m = 0;
  double beta = 1.0;
  double theta = 1.0;  // mean-smoothness exponent
  std::function<double(double)> c_fn;
  std::function<double(double)> V_fn;
  std::optional<PowerLaw> c_power;
  std::optional<PowerLaw> v_power;
  std::map<int, PowerLaw> ck_powers;
};

struct CovarianceModel {
  std::string kind;
  int max_deriv_order = 0;
  bool zero_mean = true;
  // mean(t, order); only consulted when zero_mean is false.
  std::function<double(double, int)> mean;
  std::function<double(double, double, int, int)> cov;
  std::function<DDouble(double, double, int, int)> cov_dd;
  SmoothnessProfile profile;
};

// Validated covariance evaluation: domain [0,1]^2, derivative orders within
// max_deriv_order, singular derivative kernels rejected at t = 0.
double eval_cov(const CovarianceModel& model, double s, double t, int i, int j);
DDouble eval_cov_dd(const CovarianceModel& model, double s, double t, int i, int j);

// Fractional Brownian motion with Hurst exponent `hurst` in (0,1]:
// r(s,t) = (s^{2H} + t^{2H} - |s-t|^{2H}) / 2.
CovarianceModel make_fbm(double hurst);

// m-fold integral of fBm, pinned to zero at 0 through order m-1.
// Supported m: 0 (plain fBm) and 1 (closed-form covariance kernels).
CovarianceModel make_integrated_fbm(int m, double hurst);

// Time-changed fBm X(t) = B(sqrt t): r(s,t) = r_B(sqrt s, sqrt t).
// Globally Hoelder of exponent hurst/2, locally of exponent hurst with
// local-stationarity function c(t) = (4t)^{-hurst}.
CovarianceModel make_time_changed_fbm(double hurst);

// Distorted stationary process X(t) = t^eta Y(t) with Y stationary,
// r_Y(s,t) = exp(-(s-t)^2).  Analytic mixed partials up to order 4 per
// argument; derivative kernels are singular at 0.
CovarianceModel make_distorted_stationary(double eta);

// String-keyed factory used by the CLI.  Recognized kinds:
//   fbm(hurst), integrated_fbm(m, hurst), time_changed_fbm(hurst),
//   distorted_stationary(eta).
CovarianceModel make_model(const std::string& kind, const std::map<std::string, double>& params);

}  // namespace qms
