#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fronttrack/validation.hpp"
#include "support.hpp"

using namespace fronttrack;

namespace {

// Shock between constant states u_l, u_r of Burgers moving at speed s from 0.
FunctionSolution burgers_shock(double u_l, double u_r) {
  const double s = 0.5 * (u_l + u_r);
  return FunctionSolution([=](double x, double t) { return x < s * t ? u_l : u_r; },
                          [=](double x) { return x < 0 ? u_l : u_r; },
                          [=](double x, double t) -> std::int64_t { return x < s * t ? 0 : 1; });
}

// Entropy-pair jump integral along x = s t.
double shock_residual(double u_l, double u_r, double k, const TestFunction& phi) {
  const double s = 0.5 * (u_l + u_r);
  auto eta = [&](double u) { return std::abs(u - k); };
  auto q = [&](double u) { return (u > k ? 1.0 : u < k ? -1.0 : 0.0) * (0.5 * u * u - 0.5 * k * k); };
  const double jump = (q(u_l) - q(u_r)) - s * (eta(u_l) - eta(u_r));
  const Interval ts = phi.t_support();
  return jump * ft_test::simpson([&](double t) { return phi.phi(s * t, t); }, std::max(0.0, ts.lo), ts.hi, 4000);
}

FrontField single_front(double delta, std::int64_t zl, std::int64_t zr, double x) {
  FrontField f;
  f.delta = delta;
  f.z_leftmost = zl;
  f.fronts.push_back(Front{f.next_id++, x, zl, zr, zl > zr ? FrontKind::shock : FrontKind::fan_front, 0.0, -1});
  return f;
}

}  // namespace

TEST_CASE("bump examples") {
  CHECK(bump(0) == 1.0);
  CHECK(bump(1) == 0.0);
  CHECK(bump(-1.5) == 0.0);
  CHECK(bump_derivative(0) == 0.0);
  TestFunction phi{0.5, 2.0, 1.0, 0.5};
  CHECK(phi.phi(0.5, 1.0) == 1.0);
  CHECK(phi.phi(2.5, 1.0) == 0.0);
  CounterRng rng(1, 9);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-1.4, 2.4);
    const double t = rng.uniform(0.55, 1.45);
    CHECK(phi.phi_x(x, t) ==
          doctest::Approx(ft_test::central_difference([&](double y) { return phi.phi(y, t); }, x, 1e-6)).scale(1.0).epsilon(1e-6));
    CHECK(phi.phi_t(x, t) ==
          doctest::Approx(ft_test::central_difference([&](double s) { return phi.phi(x, s); }, t, 1e-6)).scale(1.0).epsilon(1e-6));
  }
}

TEST_CASE("stationary profile has zero entropy residual") {
  const Flux m = ft_test::modulated();
  const StationaryProfile p(m, GLevel(0.4));
  const FunctionSolution sol([&](double x, double) { return p.u(x); }, [&](double x) { return p.u(x); });
  const QuadSpec quad{{-4, 4}, {0, 2}, 512, 256};
  const EntropyQuadrature eq(sol, exact_entropy_flux(m), quad);
  for (const auto& [k, phi] : entropy_battery_pairs(5, 20, eq.sup_abs_u(), quad)) {
    const ResidualResult r = eq.residual(k, phi);
    CHECK(std::abs(r.residual) <= r.tol_quad + 1e-9);
  }
}

TEST_CASE("Burgers shock residual matches its closed form") {
  const Flux b = ft_test::burgers();
  const QuadSpec quad{{-2, 3}, {0, 2}, 1024, 512};
  const FunctionSolution admissible = burgers_shock(1, 0);
  const FunctionSolution anti = burgers_shock(0, 1);
  const EntropyQuadrature qa(admissible, exact_entropy_flux(b), quad);
  const EntropyQuadrature qn(anti, exact_entropy_flux(b), quad);
  const TestFunction phi{0.5, 0.8, 1.0, 0.6};
  for (double k : {0.5, 0.25, 0.8, -0.3, 1.4}) {
    INFO("k = ", k);
    const ResidualResult ra = qa.residual(k, phi);
    CHECK(std::abs(ra.residual - shock_residual(1, 0, k, phi)) <= ra.tol_quad);
    CHECK(ra.residual >= -ra.tol_quad);
    const ResidualResult rn = qn.residual(k, phi);
    CHECK(std::abs(rn.residual - shock_residual(0, 1, k, phi)) <= rn.tol_quad);
  }
  const ResidualResult bad = qn.residual(0.5, phi);
  CHECK(bad.residual < -bad.tol_quad);
  CHECK(shock_residual(1, 0, 0.5, phi) > 0);
}

TEST_CASE("initial term is exercised by test functions straddling t = 0") {
  const Flux b = ft_test::burgers();
  const QuadSpec quad{{-2, 3}, {0, 2}, 1024, 512};
  const FunctionSolution sol = burgers_shock(1, 0);
  const EntropyQuadrature eq(sol, exact_entropy_flux(b), quad);
  const TestFunction phi{0.2, 0.8, 0.0, 0.6};
  for (double k : {0.5, 0.1, 0.9}) {
    const ResidualResult r = eq.residual(k, phi);
    CHECK(std::abs(r.residual - shock_residual(1, 0, k, phi)) <= r.tol_quad);
  }
  CHECK_THROWS(eq.residual(0.5, TestFunction{2.9, 0.5, 1.0, 0.5}));
  CHECK_THROWS(eq.residual(0.5, TestFunction{0.0, 0.5, 1.8, 0.5}));
}

TEST_CASE("an anti-entropic front is detected in tracker output") {
  const double d = 0.1;
  TrackerOptions o;
  o.enforce_admissibility = false;
  const FrontTracker tr(ft_test::burgers(), d, o);
  const FrontField f0 = single_front(d, 0, 5, 0.0);
  CHECK_THROWS_AS(f0.validate(true), InvariantBreach);
  CHECK_NOTHROW(f0.validate(false));
  const FrontTrackingSolution sol(tr, f0);
  const QuadSpec quad{{-2, 3}, {0, 2}, 1024, 512};
  const ResidualResult r = kruzkov_residual(sol, tr.flux(), 0.5, TestFunction{0.5, 0.8, 1.0, 0.6}, quad);
  CHECK(r.residual < -r.tol_quad);
  CHECK(r.residual == doctest::Approx(shock_residual(0, 1, 0.5, TestFunction{0.5, 0.8, 1.0, 0.6})).epsilon(0.02));
}

TEST_CASE("property: tracker output satisfies the approximate entropy inequalities") {
  const Flux m = ft_test::modulated();
  const double d = 0.05;
  const FrontTracker tr(m, d);
  const ApproxFlux af(m, d);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    CounterRng rng(seed, 77);
    const double c = rng.uniform(-1, 1);
    const double amp = rng.uniform(0.3, 1.0);
    auto u0 = [&](double x) { return amp * std::exp(-x * x) * std::cos(2 * x + c); };
    const FrontField f0 = initial_fronts(quantize_initial(m, u0, d, {-3, 3}, 240));
    const FrontTrackingSolution sol(tr, f0);
    const QuadSpec quad{{-4, 4}, {0, 1.5}, 512, 384};
    const EntropyQuadrature eq(sol, approx_entropy_flux(af), quad);
    for (const auto& [k, phi] : entropy_battery_pairs(seed, 30, eq.sup_abs_u(), quad)) {
      const ResidualResult r = eq.residual(k, phi);
      CHECK(r.residual >= -r.tol_quad);
    }
  }
}

TEST_CASE("battery pairs respect the box and split around t = 0") {
  const QuadSpec quad{{-2, 2}, {0, 1}, 256, 256};
  const auto pairs = entropy_battery_pairs(3, 40, 1.0, quad);
  REQUIRE(pairs.size() == 40);
  int straddle = 0;
  for (const auto& [k, phi] : pairs) {
    CHECK(std::abs(k) <= 1.1);
    CHECK(phi.x_support().lo > -2);
    CHECK(phi.x_support().hi < 2);
    CHECK(phi.t_support().hi < 1);
    straddle += phi.t_support().lo < 0 ? 1 : 0;
  }
  CHECK(straddle == 20);
  const auto again = entropy_battery_pairs(3, 40, 1.0, quad);
  CHECK(again[17].first == pairs[17].first);
}

TEST_CASE("characteristics conserve f") {
  const CharacteristicResult b = characteristic_check(ft_test::burgers(), 0.5, 0.7, 2.0, 100);
  CHECK(b.drift == 0.0);
  CHECK(b.y_end == doctest::Approx(0.5 + 0.7 * 2.0).epsilon(1e-14));
  CHECK(b.u_end == 0.7);

  const Flux m = ft_test::modulated();
  CHECK(characteristic_check(m, 0.1, 0.9, 5.0, 10000).drift <= 1e-10);
  // Fourth-order integrator: halving the step divides the drift by about 16.
  const double coarse = characteristic_check(m, 0.1, 0.9, 5.0, 100).drift;
  const double fine = characteristic_check(m, 0.1, 0.9, 5.0, 200).drift;
  CHECK(coarse / fine > 8);
  CHECK_THROWS(characteristic_check(m, 0.0, 1.0, 5.0, 100, {-1, 1}));
}

TEST_CASE("rarefaction oracle reproduces the Burgers fan") {
  const RarefactionOracle r(ft_test::burgers(), 0.0, GLevel(0.0), GLevel(0.5), 1.0);
  CHECK(r(-1.0) == 0.0);
  CHECK(r(0.3) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r(0.8) == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(r(2.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS(RarefactionOracle(ft_test::burgers(), 0.0, GLevel(0.5), GLevel(0.0), 1.0));
}

TEST_CASE("finite-volume reference examples") {
  const Flux b = ft_test::burgers();
  const FVGrid c = fv_reference(b, [](double) { return 0.7; }, {0, 1}, 50, 1.0);
  for (double u : c.u) CHECK(u == 0.7);
  CHECK(c.t == 1.0);

  auto step = [](double x) { return x < 0 ? 1.0 : 0.0; };
  auto exact = [](double x) { return x < 0.5 ? 1.0 : 0.0; };
  const FVGrid s400 = fv_reference(b, step, {-2, 3}, 400, 1.0);
  const FVGrid s800 = fv_reference(b, step, {-2, 3}, 800, 1.0);
  const double e400 = l1_distance([&](double x) { return s400.sample(x); }, exact, {-1, 2}, 6000);
  const double e800 = l1_distance([&](double x) { return s800.sample(x); }, exact, {-1, 2}, 6000);
  CHECK(e400 <= 4 * s400.dx);
  CHECK(e800 < e400);

  // Compact data stays inside: mass is conserved.
  auto hump = [](double x) { return std::abs(x) < 1 ? 1 - x * x : 0.0; };
  const FVGrid h = fv_reference(ft_test::modulated(), hump, {-4, 6}, 500, 1.5);
  double mass = 0;
  for (double u : h.u) mass += u * h.dx;
  CHECK(mass == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
  double mass0 = 0;
  for (int i = 0; i < 500; ++i) mass0 += hump(h.x_center(i)) * h.dx;
  CHECK(std::abs(mass - mass0) <= 1e-12);

  CHECK_THROWS(fv_reference(b, step, {-1, 1}, 10, 1.0, 0.6));
  CHECK_THROWS(fv_reference(b, step, {-1, 1}, 0, 1.0));
}

TEST_CASE("l1 distance examples") {
  CHECK(l1_distance([](double x) { return std::abs(x); }, [](double) { return 0.0; }, {-1, 1}, 100) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l1_distance([](double) { return 1.0; }, [](double) { return 1.0; }, {0, 3}, 7) == 0.0);
  CHECK_THROWS(l1_distance([](double) { return 1.0; }, [](double) { return 1.0; }, {0, 3}, 0));
}

TEST_CASE("solution inside the cone ignores data outside it") {
  const FrontTracker tr(ft_test::burgers(), 0.02);
  auto u0 = [](double x) { return 0.9 * std::exp(-x * x) * std::sin(3 * x); };
  auto v0 = [&](double x) { return std::abs(x) > 2.6 ? u0(x) + 0.8 * std::cos(x) : u0(x); };
  // |u| <= 1.7 so |f_u| <= 1.7; R + L T = 1 + 1.7 * 0.9 < 2.6.
  const DependenceResult r = domain_of_dependence_check(tr, u0, v0, {-6, 6}, 600, 0.9, 1.0, 1.7);
  // Events outside the cone split everyone's time steps, so equality holds to rounding.
  CHECK(r.u_l1 <= 1e-12);
  CHECK(r.g_l1 <= 1e-12);
  CHECK(r.cone.hi == doctest::Approx(2.53));
  // And data inside the cone does matter.
  auto w0 = [&](double x) { return std::abs(x) < 2.0 ? u0(x) + 0.3 : u0(x); };
  CHECK(domain_of_dependence_check(tr, u0, w0, {-6, 6}, 600, 0.9, 1.0, 1.7).g_l1 > 0.1);
}

TEST_CASE("flux convergence examples") {
  const double d1[] = {0.02};
  const auto b = flux_convergence_check(ft_test::burgers(), d1, {-1, 1}, 1.0);
  REQUIRE(b.size() == 1);
  CHECK(b[0].bound_f == doctest::Approx(0.424).epsilon(1e-9));
  CHECK(b[0].err_f <= b[0].bound_f);
  CHECK(b[0].err_fx == 0.0);

  const double ds[] = {0.2, 0.1, 0.05, 0.02, 0.01};
  const auto m = flux_convergence_check(ft_test::modulated(), ds, {-4, 4}, 1.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    INFO("delta = ", m[i].delta);
    CHECK(m[i].err_f <= m[i].bound_f);
    CHECK(m[i].err_fx <= m[i].bound_fx);
    if (i > 0) CHECK(m[i].err_f < m[i - 1].err_f);
  }
}

TEST_CASE("inversion bound holds on the level grid") {
  const double ds[] = {0.2, 0.05, 0.01};
  for (const Flux& f : {ft_test::burgers(), ft_test::modulated()}) {
    for (const InversionRow& row : inversion_bound_check(f, ds, {-4, 4}, 1.5)) {
      CHECK(row.pairs > 0);
      CHECK(row.worst_slack >= 0.0);
    }
  }
}

TEST_CASE("time Lipschitz example") {
  // One shock of height 0.5 at speed 0.5 sweeps 0.25 h of g per unit h.
  const FrontTracker tr(ft_test::burgers(), 0.1);
  const FrontField f0 = single_front(0.1, 5, 0, 0.0);
  for (const LipschitzSample& s : time_lipschitz_check(tr, f0, 2.0, 1.0, 4, 10)) {
    CHECK(s.l1 == doctest::Approx(0.25 * s.h).epsilon(1e-9).scale(1.0));
    CHECK(s.bound == doctest::Approx(0.5 * s.h + 1e-8));
  }
}

TEST_CASE("front tracking solution samples levels and labels") {
  const FrontTracker tr(ft_test::burgers(), 0.1);
  const FrontTrackingSolution sol(tr, single_front(0.1, 5, 0, 0.0));
  const std::vector<double> xs{-1.0, 0.4, 0.6, 2.0};
  std::vector<double> u(4);
  std::vector<std::int64_t> lab(4);
  sol.sample_row(1.0, xs, u, lab);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(u[2] == 0.0);
  CHECK(lab == std::vector<std::int64_t>{5, 5, 0, 0});
  CHECK(sol.at(1.0).fronts[0].position == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sol.initial(-0.1) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("validation report aggregates") {
  ValidationReport r;
  CHECK(r.passed());
  r.add({"a", 1, 2, true, {}});
  CHECK(r.passed());
  r.add({"b", 3, 2, false, {}});
  CHECK_FALSE(r.passed());
}
