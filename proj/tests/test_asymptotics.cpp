#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qmspline/asymptotics.hpp"
#include "qmspline/design.hpp"
#include "qmspline/errors.hpp"
#include "qmspline/kernel.hpp"
#include "qmspline/quadrature.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace

TEST_CASE("scale constant closed forms") {
  auto b_sup = qms::b_constant(1, 1.0, 1, kInf);
  CHECK(b_sup.value == 0.125);
  CHECK(b_sup.method == qms::BMethod::closed_form);

  // ||t(1-t)/2||_2 = sqrt(Beta(3,3)) / 2 = sqrt(1/30) / 2
  auto b_l2 = qms::b_constant(1, 1.0, 1, 2.0);
  CHECK(rel_err(b_l2.value, std::sqrt(1.0 / 30.0) / 2.0) <= 1e-12);

  // degree 3: sqrt(Beta(5,5)) / 4! = sqrt(1/630) / 24
  auto b3 = qms::b_constant(3, 1.0, 3, 2.0);
  CHECK(rel_err(b3.value, std::sqrt(1.0 / 630.0) / 24.0) <= 1e-12);
  CHECK(b3.value == doctest::Approx(1.6600e-3).epsilon(1e-4));

  // degree 5 sup: 2^{-6} / 6!
  auto b5 = qms::b_constant(5, 1.0, 5, kInf);
  CHECK(rel_err(b5.value, std::ldexp(1.0, -6) / 720.0) <= 1e-14);
}

TEST_CASE("quadrature route reproduces Brownian-bridge norms") {
  auto b_sup = qms::b_constant(0, 0.5, 1, kInf);
  CHECK(b_sup.method == qms::BMethod::quadrature);
  CHECK(std::abs(b_sup.value - 0.5) <= 1e-8);

  auto b_l2 = qms::b_constant(0, 0.5, 1, 2.0);
  CHECK(std::abs(b_l2.value - 1.0 / std::sqrt(6.0)) <= 1e-8);
}

TEST_CASE("closed form and quadrature agree where both apply") {
  for (double p : {2.0, kInf}) {
    auto closed = qms::b_constant(1, 1.0, 1, p, qms::BMethod::closed_form);
    auto quad = qms::b_constant(1, 1.0, 1, p, qms::BMethod::quadrature);
    CHECK(rel_err(quad.value, closed.value) <= 1e-6);
  }
}

TEST_CASE("rough sup constant matches a direct maximization") {
  // For the exponent-0.8 base process on the unit interval the squared error
  // of linear interpolation is the same phi profile used by the error-engine
  // tests; its maximum pins b(0, 0.8, 1, inf).
  auto b = qms::b_constant(0, 0.8, 1, kInf);
  auto err_sq = [](double t) {
    return std::pow(t, 1.6) - t * (std::pow(t, 1.6) + 1.0 - std::pow(1.0 - t, 1.6)) + t * t;
  };
  const double phi_max = oracle::golden_max(err_sq, 0.0, 1.0, 1e-12);
  CHECK(rel_err(b.value, std::sqrt(phi_max)) <= 1e-9);
  CHECK(b.value == doctest::Approx(0.2827).epsilon(2e-4));
}

TEST_CASE("cubic quadrature branch is available for one integrated level") {
  auto b = qms::b_constant(1, 0.7, 3, 2.0);
  CHECK(b.value > 0.0);
  CHECK(std::isfinite(b.value));
  // smoother process, higher degree: smaller constant than the linear one
  auto b_lin = qms::b_constant(0, 0.7, 1, 2.0);
  CHECK(b.value < b_lin.value);
}

TEST_CASE("unsupported scale-constant requests are rejected") {
  CHECK_THROWS_AS(qms::b_constant(2, 0.7, 1, 2.0), qms::ConfigError);   // no route
  CHECK_THROWS_AS(qms::b_constant(0, 0.7, 3, kInf), qms::ConfigError);  // k > 2m+1
  CHECK_THROWS_AS(qms::b_constant(1, 0.9, 1, 2.0, qms::BMethod::closed_form), qms::ConfigError);
  CHECK_THROWS_AS(qms::b_constant(3, 1.0, 3, 2.0, qms::BMethod::quadrature), qms::ConfigError);
  CHECK_THROWS_AS(qms::b_constant(1, 1.0, 2, 2.0), qms::ConfigError);  // even degree
  CHECK_THROWS_AS(qms::b_constant(1, 1.5, 1, 2.0), qms::ConfigError);  // beta out of range
  CHECK_THROWS_AS(qms::b_constant(1, 1.0, 1, 0.5), qms::ConfigError);  // p < 1
}

TEST_CASE("quotient ladder recovers the unit scale of the fractional base") {
  auto model = qms::make_fbm(0.7);
  for (double t : {0.3, 0.6}) {
    const double c = qms::local_stationarity(model, 0, t, 0.7);
    CHECK(rel_err(c, 1.0) <= 1e-6);
  }
}

TEST_CASE("quotient ladder matches the time-warped closed form") {
  auto model = qms::make_time_changed_fbm(0.8);
  for (double t : {0.25, 0.5, 0.9}) {
    const double want = std::pow(4.0 * t, -0.8);
    const double got = qms::local_stationarity(model, 0, t, 0.8);
    CHECK(rel_err(got, want) <= 1e-6);
  }
}

TEST_CASE("derivative and ladder routes agree on the distorted field") {
  auto model = qms::make_distorted_stationary(0.9);
  for (int m : {0, 1}) {
    for (double t : {0.25, 0.5, 0.75}) {
      const double via_deriv =
          qms::local_stationarity(model, m, t, 1.0, qms::StationarityRoute::derivative);
      const double via_ladder =
          qms::local_stationarity(model, m, t, 1.0, qms::StationarityRoute::ladder);
      CHECK(rel_err(via_ladder, via_deriv) <= 1e-4);
      // automatic prefers the derivative route when kernels are available
      CHECK(qms::local_stationarity(model, m, t, 1.0) == via_deriv);
    }
  }
}

TEST_CASE("ladder with a wrong exponent fails loudly") {
  auto model = qms::make_fbm(0.5);
  CHECK_THROWS_AS(qms::local_stationarity(model, 0, 0.5, 0.3), qms::EstimationError);
}

TEST_CASE("stationarity route validation") {
  auto rough = qms::make_fbm(0.6);
  CHECK_THROWS_AS(qms::local_stationarity(rough, 1, 0.5, 0.6), qms::OrderExceededError);
  CHECK_THROWS_AS(
      qms::local_stationarity(rough, 0, 0.5, 0.6, qms::StationarityRoute::derivative),
      qms::OrderExceededError);
  CHECK_THROWS_AS(qms::local_stationarity(rough, 0, 0.0, 0.6), qms::DomainError);
  CHECK_THROWS_AS(qms::local_stationarity(rough, 0, 0.5, 1.5), qms::ConfigError);
}

TEST_CASE("optimal density for a power-law scale is the closed-form power family") {
  // theta = 3.1, order = 4, p = 2: gamma = 2/9 and lambda = 1/(1 - 6.2/9) = 45/14
  auto d = qms::optimal_density(qms::PowerLaw{0.0432, 3.1}, 4.0, 2.0);
  CHECK(d.kind == qms::DensityKind::power);
  CHECK(rel_err(d.lambda, 45.0 / 14.0) <= 1e-12);
  CHECK(qms::near_zero_lambda(d) == d.lambda);

  // the coefficient cancels under normalization
  auto d2 = qms::optimal_density(qms::PowerLaw{17.0, 3.1}, 4.0, 2.0);
  CHECK(d2.lambda == d.lambda);

  // flat scale: uniform knots
  auto du = qms::optimal_density(qms::PowerLaw{1.0, 0.0}, 4.0, 2.0);
  CHECK(du.lambda == 1.0);
}

TEST_CASE("optimal density lambda comes from the profile of the distorted field") {
  auto model = qms::make_distorted_stationary(0.9);
  const auto& c3 = model.profile.ck_powers.at(3);
  CHECK(std::abs(c3.theta - 3.1) <= 1e-12);
  auto d = qms::optimal_density(c3, 4.0, 2.0);
  CHECK(rel_err(d.lambda, 45.0 / 14.0) <= 1e-12);
}

TEST_CASE("optimal density matches the warped-base closed form") {
  // c(t) = (4t)^{-beta}: h*(t) = (1 - beta*gamma/2) t^{-beta*gamma/2}
  const double beta = 0.6, p = 2.0;
  const double gamma = 1.0 / (beta + 1.0 / p);
  auto d = qms::optimal_density(qms::PowerLaw{std::pow(4.0, -beta), 0.5 * beta}, beta, p);
  const double a = 0.5 * beta * gamma;
  for (double t : {0.1, 0.37, 0.8, 1.0}) {
    const double want = (1.0 - a) * std::pow(t, -a);
    CHECK(rel_err(d.h(t), want) <= 1e-12);
  }
}

TEST_CASE("non-integrable scale is rejected") {
  CHECK_THROWS_AS(qms::optimal_density(qms::PowerLaw{1.0, 5.0}, 4.0, 2.0), qms::DivergenceError);
  const std::function<double(double)> steep = [](double t) { return std::pow(t, -10.0); };
  CHECK_THROWS_AS(qms::optimal_density(steep, 4.0, 2.0), qms::DivergenceError);
}

TEST_CASE("tabulated optimal density normalizes and has the right tail") {
  const std::function<double(double)> c = [](double t) { return std::pow(4.0 * t, -0.8); };
  auto d = qms::optimal_density(c, 0.8, kInf);
  CHECK(d.kind == qms::DensityKind::tabulated);
  // gamma = 1/0.8, theta*gamma = 0.5: quantile exponent 2
  CHECK(rel_err(qms::near_zero_lambda(d), 2.0) <= 1e-6);
  CHECK(std::abs(d.G(0.25) - 0.0625) <= 1e-8);
  CHECK(std::abs(d.H(1.0) - 1.0) <= 1e-10);

  // the raw density (4t)^{-1/2} already has unit mass, so the normalized
  // density keeps the closed forms h(t) = t^{-1/2}/2 and H(t) = sqrt(t)
  for (double t : {0.04, 0.25, 0.7, 1.0}) {
    CHECK(rel_err(d.h(t), 0.5 / std::sqrt(t)) <= 1e-6);
    CHECK(rel_err(d.H(t), std::sqrt(t)) <= 1e-6);
  }
}

TEST_CASE("asymptotic constant reduces to the scale constant for a flat profile") {
  auto b = qms::b_constant(0, 0.8, 1, kInf);
  const std::function<double(double)> one = [](double) { return 1.0; };
  auto uniform = qms::make_power_density(1.0);
  const double got = qms::asymptotic_constant(b, one, uniform, kInf, 0.8);
  CHECK(rel_err(got, b.value) <= 1e-12);
}

TEST_CASE("asymptotic constant for the warped base under a stretched power density") {
  auto model = qms::make_time_changed_fbm(0.8);
  auto b = qms::b_constant(0, 0.8, 1, kInf);
  auto density = qms::make_power_density(2.1);
  const double got = qms::asymptotic_constant(b, model.profile.c_fn, density, kInf, 0.8);
  // integrand (4t)^{-0.4} * (2.1 t^{1-1/2.1})^{0.8} peaks at t = 1
  const double want = std::pow(4.0, -0.4) * std::pow(2.1, 0.8) * b.value;
  CHECK(rel_err(got, want) <= 1e-6);
  CHECK(got == doctest::Approx(0.2939).epsilon(2e-3));
}

TEST_CASE("asymptotic constant diverges for too-slow knot concentration") {
  auto model = qms::make_time_changed_fbm(0.8);
  auto b = qms::b_constant(0, 0.8, 1, kInf);
  auto uniform = qms::make_power_density(1.0);
  CHECK_THROWS_AS(qms::asymptotic_constant(b, model.profile.c_fn, uniform, kInf, 0.8),
                  qms::DivergenceError);
}

TEST_CASE("optimal density minimizes the asymptotic constant") {
  // c(t) = (4t)^{-beta}, order beta, p = 2: the gamma-mean identity gives the
  // value at the optimum in closed form, and nearby lambdas do worse.
  const double beta = 0.6, p = 2.0;
  const double gamma = 1.0 / (beta + 1.0 / p);
  auto model = qms::make_time_changed_fbm(beta);
  auto b = qms::b_constant(0, beta, 1, p);

  const double a = 0.5 * beta * gamma;
  const double lambda_opt = 1.0 / (1.0 - a);
  const double mean_gamma =
      std::pow(std::pow(4.0, -a) / (1.0 - a), 1.0 / gamma);  // (int c^{gamma/2})^{1/gamma}
  const double at_opt = qms::asymptotic_constant(b, model.profile.c_fn,
                                                 qms::make_power_density(lambda_opt), p, beta);
  CHECK(rel_err(at_opt, b.value * mean_gamma) <= 1e-5);

  for (double scale : {0.85, 1.15}) {
    const double off = qms::asymptotic_constant(
        b, model.profile.c_fn, qms::make_power_density(lambda_opt * scale), p, beta);
    CHECK(off > at_opt * (1.0 + 1e-4));
  }
}

TEST_CASE("rate fit recovers an exact power law") {
  std::vector<std::pair<double, double>> rows;
  for (double n : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) rows.push_back({n, 3.0 * std::pow(n, -2.0)});

  auto fit = qms::fit_rate(rows);
  CHECK(std::abs(fit.rho - 2.0) <= 1e-12);
  CHECK(rel_err(std::exp(fit.logC), 3.0) <= 1e-12);
  CHECK(std::abs(fit.r_squared - 1.0) <= 1e-12);
  CHECK(fit.points_used == 4);
  CHECK(fit.n_lo == 8.0);
  CHECK(fit.n_hi == 64.0);
  CHECK_FALSE(fit.full_range);

  auto full = qms::fit_rate(rows, true);
  CHECK(full.points_used == 6);
  CHECK(full.n_lo == 2.0);
  CHECK(std::abs(full.rho - 2.0) <= 1e-12);
  CHECK(full.full_range);
}

TEST_CASE("tail fit sheds pre-asymptotic contamination") {
  std::vector<std::pair<double, double>> rows;
  for (int i = 2; i <= 9; ++i) {
    const double n = std::pow(2.0, i);
    rows.push_back({n, 3.0 * std::pow(n, -2.0) * (1.0 + 10.0 / n)});
  }
  auto tail = qms::fit_rate(rows);
  auto full = qms::fit_rate(rows, true);
  CHECK(std::abs(tail.rho - 2.0) < std::abs(full.rho - 2.0));
  CHECK(std::abs(tail.rho - 2.0) <= 0.1);
}

TEST_CASE("rate fit input validation") {
  std::vector<std::pair<double, double>> three = {{2, 1}, {4, 0.5}, {8, 0.25}};
  CHECK_THROWS_AS(qms::fit_rate(three), qms::ConfigError);

  std::vector<std::pair<double, double>> zero_err = {{2, 1}, {4, 0.5}, {8, 0.0}, {16, 0.1}};
  CHECK_THROWS_AS(qms::fit_rate(zero_err), qms::ConfigError);

  std::vector<std::pair<double, double>> dup_n = {{2, 1}, {4, 0.5}, {4, 0.4}, {16, 0.1}};
  CHECK_THROWS_AS(qms::fit_rate(dup_n), qms::ConfigError);
}

TEST_CASE("knot budget from a fitted law") {
  qms::RateFit unit;
  unit.logC = 0.0;
  unit.rho = 1.0;
  CHECK(qms::knots_for_accuracy(unit, 0.1) == 10);
  CHECK(qms::knots_for_accuracy(unit, 1.0) == 1);

  // exact integer boundary must not round up
  qms::RateFit half;
  half.logC = std::log(2.0);
  half.rho = 0.5;
  CHECK(qms::knots_for_accuracy(half, 0.02) == 10000);

  qms::RateFit flat;
  flat.logC = std::log(5.0);
  flat.rho = 0.0;
  CHECK_THROWS_AS(qms::knots_for_accuracy(flat, 0.1), qms::DomainError);
  CHECK_THROWS_AS(qms::knots_for_accuracy(unit, 0.0), qms::ConfigError);
}
