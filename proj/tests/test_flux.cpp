#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fronttrack/flux.hpp"
#include "support.hpp"

using namespace fronttrack;

TEST_CASE("builtin families evaluate") {
  const Flux b = ft_test::burgers();
  CHECK(b.f(0.0, 2.0) == 2.0);
  CHECK(b.alpha() == 1.0);

  const Flux m = ft_test::modulated();
  CHECK(m.f(0.0, 2.0) == 2.0);
  CHECK(m.f(std::numbers::pi / 2, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(m.alpha() == 0.5);
  CHECK(m.exact());
}

TEST_CASE("invalid builtin parameters are rejected") {
  FluxParams p;
  p.mean = 1.0;
  p.amplitude = 1.0;
  CHECK_THROWS_AS(make_builtin_flux(FluxFamily::modulated_burgers, p), std::invalid_argument);
  p.mean = -1.0;
  p.amplitude = 0.0;
  CHECK_THROWS_AS(make_builtin_flux(FluxFamily::modulated_burgers, p), std::invalid_argument);
  CHECK_THROWS(make_builtin_flux(FluxFamily::custom_expr, FluxParams{}));
  CHECK_THROWS(flux_family_from_string("nope"));
}

TEST_CASE("audit certifies Burgers") {
  const AssumptionReport r = audit_assumptions(ft_test::burgers(), {-5, 5}, {-3, 3});
  CHECK(r.passed);
  CHECK(r.violations.empty());
  CHECK(r.certified_alpha == 1.0);
  CHECK(r.sample_counts.x_samples >= 16);
}

TEST_CASE("audit catches non-convex and non-stationary fluxes") {
  const Flux cubic = make_expr_flux("u^3");
  const AssumptionReport r = audit_assumptions(cubic, {-1, 1}, {-1, 1});
  CHECK_FALSE(r.passed);
  bool uc = false;
  for (const Violation& v : r.violations) {
    if (v.assumption == Assumption::UC) {
      uc = true;
      CHECK(v.u <= 0.0);
    }
  }
  CHECK(uc);

  const AssumptionReport s = audit_assumptions(make_expr_flux("u^2/2 + x"), {-1, 1}, {-1, 1});
  CHECK_FALSE(s.passed);
  bool s0 = false;
  for (const Violation& v : s.violations) s0 = s0 || v.assumption == Assumption::S0;
  CHECK(s0);
  CHECK_THROWS(certify(cubic, r));
}

TEST_CASE("audit of DSL flux applies the safety factor") {
  const Flux f = make_expr_flux("(1+0.5*sin(x))*u^2/2");
  CHECK(f.alpha() == 0.0);
  const AssumptionReport r = audit_assumptions(f, {-4, 4}, {-2, 2});
  REQUIRE(r.passed);
  CHECK(r.certified_alpha == doctest::Approx(0.99 * r.min_fuu));
  CHECK(r.min_fuu >= 0.5);
  CHECK(r.min_fuu <= 0.51);
  CHECK(certify(f, r).alpha() == r.certified_alpha);
}

TEST_CASE("audit rejects tiny grids") {
  CHECK_THROWS(audit_assumptions(ft_test::burgers(), {-1, 1}, {-1, 1}, {8, 64}));
}

TEST_CASE("speed envelope examples") {
  const std::vector<double> xg = linspace(-4, 4, 257);
  const std::vector<double> vg = linspace(-3, 3, 61);
  const SpeedEnvelope b = speed_envelope(ft_test::burgers(), vg, xg);
  CHECK(b.theta(2.0) == doctest::Approx(2.0));
  CHECK(b.theta(0.0) == 0.0);
  CHECK(b.lipschitz_L(1.5) == doctest::Approx(1.5));

  // max a = 1.5 is attained at x = pi/2, which the grid must contain.
  std::vector<double> xm = xg;
  xm.push_back(std::numbers::pi / 2);
  std::sort(xm.begin(), xm.end());
  const SpeedEnvelope m = speed_envelope(ft_test::modulated(), vg, xm);
  CHECK(m.theta(2.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m.theta(0.0) == 0.0);
  CHECK_THROWS(speed_envelope(ft_test::burgers(), {}, xg));
}

TEST_CASE("property: envelope dominates |f_u| at every sampled x") {
  const Flux m = ft_test::modulated();
  const std::vector<double> xg = linspace(-5, 5, 101);
  const std::vector<double> vg = linspace(-2, 2, 41);
  const SpeedEnvelope env(m, vg, xg);
  for (double v : vg) {
    for (double x : xg) CHECK(env.theta(v) >= std::abs(m.fu(x, v)));
  }
}

TEST_CASE("property: quadratic lower bound and positivity") {
  CounterRng rng(3, 0);
  for (const Flux& f : {ft_test::burgers(), ft_test::modulated()}) {
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.uniform(-10, 10);
      const double u = rng.uniform(-3, 3);
      CHECK(f.f(x, u) >= f.alpha() * u * u / 2 - 1e-15);
      if (u != 0.0) CHECK(f.f(x, u) > 0.0);
    }
  }
}

TEST_CASE("property: closed-form derivatives agree with finite differences to O(h^2)") {
  CounterRng rng(4, 0);
  const double h = 1e-4;
  for (const Flux& f : {ft_test::burgers(), ft_test::modulated()}) {
    for (int i = 0; i < 500; ++i) {
      const double x = rng.uniform(-5, 5);
      const double u = rng.uniform(-2, 2);
      const double fd_u = ft_test::central_difference([&](double v) { return f.f(x, v); }, u, h);
      const double fd_x = ft_test::central_difference([&](double v) { return f.f(v, u); }, x, h);
      const double fd_uu = ft_test::central_difference([&](double v) { return f.fu(x, v); }, u, h);
      const double fd_xu = ft_test::central_difference([&](double v) { return f.fu(v, u); }, x, h);
      // Third derivatives here are bounded by 2, so C h^2 with C = 10 is ample.
      CHECK(std::abs(fd_u - f.fu(x, u)) <= 10 * h * h);
      CHECK(std::abs(fd_x - f.fx(x, u)) <= 10 * h * h);
      CHECK(std::abs(fd_uu - f.fuu(x, u)) <= 10 * h * h);
      CHECK(std::abs(fd_xu - f.fxu(x, u)) <= 10 * h * h);
    }
  }
}
