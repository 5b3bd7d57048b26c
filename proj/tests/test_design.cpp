#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "qmspline/design.hpp"
#include "qmspline/errors.hpp"
#include "qmspline/kernel.hpp"

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("power density knots follow the closed form") {
  auto d2 = qms::generate_knots(qms::make_power_density(2.0), 4);
  const std::vector<double> want = {0.0, 0.0625, 0.25, 0.5625, 1.0};
  REQUIRE(d2.knots.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(d2.knots[i] == want[i]);

  auto d1 = qms::generate_knots(qms::make_power_density(1.0), 4);
  for (std::size_t i = 0; i <= 4; ++i) CHECK(d1.knots[i] == doctest::Approx(i / 4.0).epsilon(1e-16));
}

TEST_CASE("power density fields are mutually consistent") {
  for (double lambda : {1.0, 2.1, 45.0 / 14.0}) {
    auto den = qms::make_power_density(lambda);
    CHECK(den.kind == qms::DensityKind::power);
    for (double u : {0.1, 0.37, 0.9, 1.0}) {
      CHECK(den.H(den.G(u)) == doctest::Approx(u).epsilon(1e-12));
      // g = 1 / h(G(u)) pointwise.
      CHECK(den.g(u) == doctest::Approx(1.0 / den.h(den.G(u))).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS((void)qms::make_power_density(0.0), qms::ConfigError);
  CHECK_THROWS_AS((void)qms::make_power_density(-1.0), qms::ConfigError);
}

TEST_CASE("larger exponents push knots toward zero") {
  auto a = qms::generate_knots(qms::make_power_density(2.0), 8);
  auto b = qms::generate_knots(qms::make_power_density(3.0), 8);
  for (std::size_t i = 1; i < 8; ++i) CHECK(b.knots[i] < a.knots[i]);
}

TEST_CASE("power design interval lengths stay below lambda over n") {
  for (double lambda : {1.0, 2.1, 45.0 / 14.0}) {
    for (std::size_t n : {4u, 16u, 64u}) {
      auto d = qms::generate_knots(qms::make_power_density(lambda), n);
      double h_max = 0.0;
      for (std::size_t j = 1; j <= n; ++j) h_max = std::max(h_max, d.knots[j] - d.knots[j - 1]);
      CHECK(h_max <= lambda / static_cast<double>(n) + 1e-15);
    }
  }
}

TEST_CASE("tabulated density reproduces a known power law") {
  // Raw density 0.5 t^{-1/2} integrates to 1; the quantile is u^2.
  auto den = qms::make_tabulated_density([](double t) { return 0.5 / std::sqrt(t); });
  CHECK(den.kind == qms::DensityKind::tabulated);
  for (double u : {0.001, 0.01, 0.2, 0.5, 0.9, 0.999}) {
    CHECK(den.G(u) == doctest::Approx(u * u).epsilon(1e-8));
    CHECK(den.H(u * u) == doctest::Approx(u).epsilon(1e-10));
  }
  auto knots = qms::generate_knots(den, 16);
  auto exact = qms::generate_knots(qms::make_power_density(2.0), 16);
  for (std::size_t i = 0; i <= 16; ++i) {
    CHECK(knots.knots[i] == doctest::Approx(exact.knots[i]).epsilon(1e-8));
  }
}

TEST_CASE("tabulated density handles unnormalized input") {
  // 3 t^{-0.38} up to a constant: quantile u^{1/0.62}.
  auto den = qms::make_tabulated_density([](double t) { return 3.0 * std::pow(t, -0.38); });
  const double lam = 1.0 / 0.62;
  for (double u : {0.05, 0.3, 0.8}) {
    CHECK(den.G(u) == doctest::Approx(std::pow(u, lam)).epsilon(1e-8));
  }
  // Normalized density integrates H to 1.
  CHECK(den.H(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("non-integrable densities are rejected") {
  CHECK_THROWS_AS((void)qms::make_tabulated_density([](double t) { return 1.0 / t; }),
                  qms::ConstructionError);
  CHECK_THROWS_AS((void)qms::make_tabulated_density([](double t) { return std::pow(t, -1.4); }),
                  qms::ConstructionError);
}

TEST_CASE("closed-form density wrapper validates the round trip") {
  auto ok = qms::make_closed_form_density(
      [](double t) { return 0.5 / std::sqrt(t); }, [](double t) { return std::sqrt(t); },
      [](double u) { return u * u; }, [](double s) { return 2.0 * s; });
  CHECK(ok.kind == qms::DensityKind::closed_form);
  CHECK_THROWS_AS((void)qms::make_closed_form_density(
                      [](double) { return 1.0; }, [](double t) { return t; },
                      [](double u) { return u * u; },  // not the inverse of H
                      [](double) { return 1.0; }),
                  qms::ConstructionError);
}

TEST_CASE("sup-norm admissibility thresholds for the time-changed model") {
  auto profile = qms::make_time_changed_fbm(0.8).profile;
  auto check = [&](double lambda) {
    return qms::check_condition(profile, qms::make_power_density(lambda), kInf,
                                qms::ConditionVariant::C);
  };
  auto v = check(2.1);
  CHECK(std::abs(v.threshold - 2.0) <= 1e-12);
  CHECK(std::abs(v.lambda_main - 2.0) <= 1e-12);
  CHECK(std::abs(v.lambda_sub - 2.0) <= 1e-12);
  CHECK(v.satisfied);
  CHECK_FALSE(v.v_from_c);
  CHECK_FALSE(check(1.0).satisfied);
  // Equality with the threshold is not enough.
  CHECK_FALSE(check(2.0).satisfied);
}

TEST_CASE("mean-square admissibility threshold for the distorted model") {
  auto profile = qms::make_distorted_stationary(0.9).profile;
  auto check = [&](double lambda) {
    return qms::check_condition(profile, qms::make_power_density(lambda), 2.0,
                                qms::ConditionVariant::Cprime, 3);
  };
  const double want = 20.0 / 7.0;
  auto v = check(3.0);
  CHECK(std::abs(v.threshold - want) <= 1e-12);
  CHECK(std::abs(v.lambda_main - want) <= 1e-12);
  CHECK(std::abs(v.lambda_sub - want) <= 1e-12);
  CHECK(v.satisfied);
  CHECK(check(4.0).satisfied);
  CHECK(check(5.0).satisfied);
  // Probing at the computed threshold itself: strict inequality fails.
  CHECK_FALSE(check(v.threshold).satisfied);
  CHECK_FALSE(check(2.65).satisfied);
}

TEST_CASE("admissibility is monotone in the exponent") {
  auto profile = qms::make_time_changed_fbm(0.6).profile;
  double prev_threshold = -1.0;
  bool seen_satisfied = false;
  for (double lambda : {1.0, 1.5, 2.0, 2.5, 3.0, 4.0}) {
    auto v = qms::check_condition(profile, qms::make_power_density(lambda), kInf,
                                  qms::ConditionVariant::C);
    if (prev_threshold >= 0.0) CHECK(v.threshold == prev_threshold);
    prev_threshold = v.threshold;
    if (seen_satisfied) CHECK(v.satisfied);
    seen_satisfied = seen_satisfied || v.satisfied;
  }
  CHECK(seen_satisfied);
}

TEST_CASE("condition checks demand power densities and complete profiles") {
  auto profile = qms::make_time_changed_fbm(0.8).profile;
  auto tab = qms::make_tabulated_density([](double t) { return 0.5 / std::sqrt(t); });
  CHECK_THROWS_AS(
      (void)qms::check_condition(profile, tab, kInf, qms::ConditionVariant::C),
      qms::UndecidableError);

  qms::SmoothnessProfile bare;
  bare.l = 0;
  bare.alpha = 0.4;
  bare.m = 0;
  bare.beta = 0.8;
  auto den = qms::make_power_density(3.0);
  CHECK_THROWS_AS((void)qms::check_condition(bare, den, kInf, qms::ConditionVariant::C),
                  qms::IncompleteProfileError);
  CHECK_THROWS_AS((void)qms::check_condition(profile, den, 2.0, qms::ConditionVariant::Cprime, 3),
                  qms::IncompleteProfileError);

  // V missing but c recorded: the verdict flags the fallback.
  qms::SmoothnessProfile c_only = bare;
  c_only.c_power = qms::PowerLaw{1.0, 0.4};
  auto v = qms::check_condition(c_only, den, kInf, qms::ConditionVariant::C);
  CHECK(v.v_from_c);
  CHECK(std::abs(v.threshold - 2.0) <= 1e-12);
}

TEST_CASE("theta window matches the closed-form algebra") {
  // Profile family with l+alpha = beta/2, m+beta = beta, theta_c = beta/2:
  // lower = beta/2 - (1/(2p) + 1/(beta p^2)), upper = beta + 1/p, and the
  // window always contains theta_c for finite p.
  for (double beta : {0.3, 0.6, 0.9}) {
    auto profile = qms::make_time_changed_fbm(beta).profile;
    for (double p : {1.0, 2.0, 5.0}) {
      auto w = qms::optimal_density_theta_window(profile, p);
      double lower_ref = beta / 2.0 - (1.0 / (2.0 * p) + 1.0 / (beta * p * p));
      CHECK(w.lower == doctest::Approx(lower_ref).epsilon(1e-12));
      CHECK(w.upper == doctest::Approx(beta + 1.0 / p).epsilon(1e-12));
      CHECK(w.theta == doctest::Approx(beta / 2.0).epsilon(1e-15));
      CHECK(w.inside);
    }
  }
  CHECK_THROWS_AS((void)qms::optimal_density_theta_window(
                      qms::make_time_changed_fbm(0.5).profile, kInf),
                  qms::ConfigError);
}

TEST_CASE("greedy design degenerates to uniform when the bounds are flat") {
  qms::SmoothnessProfile profile;
  profile.l = 0;
  profile.alpha = 0.5;
  profile.holder_const = 1.0;
  profile.m = 0;
  profile.beta = 0.5;
  profile.V_fn = [](double) { return 1.0; };
  auto out = qms::intermediate_design(profile, 0.5, 64, kInf);
  CHECK(out.relaxation == 1.0);
  CHECK(out.greedy_steps == 64);
  REQUIRE(out.design.knots.size() == 65);
  for (std::size_t i = 0; i <= 64; ++i) {
    CHECK(out.design.knots[i] == doctest::Approx(i / 64.0).epsilon(1e-12));
  }
}

TEST_CASE("intermediate design for the time-changed model meets its bounds") {
  auto profile = qms::make_time_changed_fbm(0.8).profile;
  const double kappa = 0.8;  // = m + beta: the fastest intermediate rate
  for (std::size_t n : {64u, 256u}) {
    auto out = qms::intermediate_design(profile, kappa, n, kInf);
    REQUIRE(out.design.intervals() == n);
    CHECK(out.relaxation > 1.0);   // strict bounds provably fall short of 1
    CHECK(out.relaxation <= 1.2);  // but only a few percent are needed
    // Interval-by-interval bound check, inflated by the reported relaxation.
    const double nd = static_cast<double>(n);
    const double first_bound = std::pow(nd, -kappa / 0.4);
    const double interior_coef = std::pow(nd, -kappa / 0.8);
    const auto& ts = out.design.knots;
    // The closing step may snap to 1 from up to 1e-12 below, so allow that
    // absolute slack on top of rounding.
    CHECK(ts[1] - ts[0] <= out.relaxation * first_bound + 2e-12);
    for (std::size_t j = 2; j < ts.size(); ++j) {
      double bound = std::pow(profile.V_fn(ts[j - 1]), -1.0 / 1.6) * interior_coef;
      CHECK(ts[j] - ts[j - 1] <= out.relaxation * bound + 2e-12);
    }
    // Early knots sit below the power(2) quantile knots: the design is finer
    // near the singularity.
    auto power2 = qms::generate_knots(qms::make_power_density(2.0), n);
    CHECK(ts[2] < power2.knots[2]);
    CHECK(ts[8] < power2.knots[8]);
  }
  // The needed relaxation shrinks as n grows.
  auto a = qms::intermediate_design(profile, kappa, 64, kInf);
  auto b = qms::intermediate_design(profile, kappa, 1024, kInf);
  CHECK(b.relaxation < a.relaxation);
}

TEST_CASE("infeasible greedy designs raise with a hint") {
  qms::SmoothnessProfile profile;
  profile.l = 0;
  profile.alpha = 0.5;
  profile.holder_const = 1.0;
  profile.m = 0;
  profile.beta = 1.0;
  profile.V_fn = [](double t) { return std::pow(t, -100.0); };  // theta = 50
  try {
    (void)qms::intermediate_design(profile, 1.0, 4, kInf);
    FAIL("expected an infeasibility error");
  } catch (const qms::InfeasibleDesignError& e) {
    CHECK(e.minimal_feasible_n == 0);  // no workable n below the search cap
  }
  CHECK_THROWS_AS((void)qms::intermediate_design(profile, 0.2, 16, kInf), qms::ConfigError);
  qms::SmoothnessProfile no_v = profile;
  no_v.V_fn = nullptr;
  CHECK_THROWS_AS((void)qms::intermediate_design(no_v, 1.0, 16, kInf),
                  qms::IncompleteProfileError);
}
