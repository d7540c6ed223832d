#include <doctest.h>

#include <cmath>

#include "fronttrack/stationary.hpp"
#include "support.hpp"

using namespace fronttrack;

TEST_CASE("g_of examples") {
  const Flux b = ft_test::burgers();
  CHECK(g_of(b, 0, 1) == 0.5);
  CHECK(g_of(b, 0, -1) == -0.5);
  CHECK(g_of(b, 3, 0) == 0.0);
  CHECK(g_of(ft_test::modulated(), 1.2, 0.0) == 0.0);
}

TEST_CASE("stationary profile examples") {
  const StationaryProfile p(ft_test::burgers(), GLevel(0.5));
  for (double x : {-3.0, 0.0, 2.5}) CHECK(p.u(x) == doctest::Approx(1.0).epsilon(1e-13));

  const StationaryProfile zero(ft_test::modulated(), GLevel(0.0));
  CHECK(zero.u(1.0) == 0.0);
  CHECK(zero.dx(1.0) == 0.0);

  FluxParams two;
  two.mean = 2.0;
  const StationaryProfile c(make_builtin_flux(FluxFamily::modulated_burgers, two), GLevel(1.0));
  CHECK(c.u(0.7) == doctest::Approx(1.0).epsilon(1e-13));

  const StationaryProfile neg(ft_test::burgers(), GLevel(-0.5));
  CHECK(neg.u(0.0) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("modulated profile matches its closed form") {
  // a(x) U^2 / 2 = |g|  =>  U = sgn(g) sqrt(2 |g| / a(x)).
  const Flux m = ft_test::modulated();
  CounterRng rng(1, 1);
  for (int i = 0; i < 200; ++i) {
    const double g = rng.uniform(-2, 2);
    const double x = rng.uniform(-6, 6);
    const double exact = (g > 0 ? 1 : -1) * std::sqrt(2 * std::abs(g) / (1 + 0.5 * std::sin(x)));
    CHECK(invert_level(m, x, g) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("uncertified flux is refused") {
  const Flux raw = make_expr_flux("u^2/2");
  CHECK_THROWS_AS(invert_level(raw, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(StationaryProfile(raw, GLevel(0.5)), std::invalid_argument);
  CHECK(StationaryProfile(raw, GLevel(0.0)).u(1.0) == 0.0);
}

TEST_CASE("bracket failure reports x when alpha overstates convexity") {
  // Declared alpha larger than the true f_uu makes the bracket too small.
  const Flux lying = ft_test::burgers().with_alpha(4.0);
  try {
    invert_level(lying, 1.25, 2.0);
    FAIL("expected BracketError");
  } catch (const BracketError& e) {
    CHECK(e.x() == 1.25);
    CHECK(e.level() == 2.0);
  }
}

TEST_CASE("inversion gap bound examples") {
  const Flux b = ft_test::burgers();
  CHECK(inversion_gap_bound(0.5, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(std::abs(invert_level(b, 0, 0.5) - invert_level(b, 0, 0.0)) == doctest::Approx(1.0));
  CHECK(inversion_gap_bound(0.3, 0.3, 1.0) == 0.0);
  CHECK(inversion_gap_bound(0.5, -0.5, 1.0) == doctest::Approx(2.0));
  CHECK(std::abs(invert_level(b, 0, 0.5) - invert_level(b, 0, -0.5)) == doctest::Approx(2.0));
  CHECK_THROWS(inversion_gap_bound(1, 0, 0));
}

TEST_CASE("property: inversion residual, monotonicity, round trip") {
  CounterRng rng(2024, 5);
  for (const Flux& f : {ft_test::burgers(), ft_test::modulated()}) {
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(-8, 8);
      const double g = rng.uniform(-3, 3);
      const double u = invert_level(f, x, g);
      CHECK(std::abs(f.f(x, u) - std::abs(g)) <= kTolInv * std::max(1.0, std::abs(g)));
      CHECK((g > 0) == (u > 0));
      CHECK(std::abs(g_of(f, x, u) - g) <= kTolInv * std::max(1.0, std::abs(g)));
      const double g2 = g + rng.uniform(1e-6, 0.5);
      CHECK(invert_level(f, x, g2) > u);
    }
  }
}

TEST_CASE("property: profile derivative is the implicit derivative") {
  const Flux m = ft_test::modulated();
  CounterRng rng(6, 0);
  for (int i = 0; i < 200; ++i) {
    const double g = rng.uniform(-2, 2);
    if (std::abs(g) < 1e-3) continue;
    const StationaryProfile p(m, GLevel(g), false);
    const double x = rng.uniform(-5, 5);
    const double fd = ft_test::central_difference([&](double y) { return p.u(y); }, x, 1e-5);
    CHECK(p.dx(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("property: uniform inversion bound on random level pairs") {
  const Flux m = ft_test::modulated();
  const std::vector<double> xs = linspace(-2 * 3.14159, 2 * 3.14159, 201);
  CounterRng rng(77, 0);
  for (int i = 0; i < 300; ++i) {
    const double g1 = rng.uniform(-2, 2);
    const double g2 = rng.uniform(-2, 2);
    double gap = 0;
    for (double x : xs) gap = std::max(gap, std::abs(invert_level(m, x, g1) - invert_level(m, x, g2)));
    CHECK(gap <= inversion_gap_bound(g1, g2, m.alpha()) + 10 * kTolInv);
  }
}

TEST_CASE("memo is transparent") {
  const Flux m = ft_test::modulated();
  const StationaryProfile with(m, GLevel(0.7), true);
  const StationaryProfile without(m, GLevel(0.7), false);
  CounterRng rng(8, 0);
  for (int i = 0; i < 5000; ++i) {
    const double x = std::round(rng.uniform(-3, 3) * 64) / 64;  // force repeats
    CHECK(with.u(x) == without.u(x));
  }
}

TEST_CASE("level bank and extents") {
  const LevelBank bank(ft_test::burgers(), 0.1);
  CHECK(bank.u(0, 3.0) == 0.0);
  CHECK(bank.u(5, 3.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(bank.u(-5, 3.0) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(&bank.profile(5) == &bank.profile(5));
  const ProfileExtent e = profile_extent(StationaryProfile(ft_test::modulated(), GLevel(0.5)), {-4, 4}, 401);
  CHECK(e.min_abs_u == doctest::Approx(std::sqrt(1.0 / 1.5)).epsilon(1e-3));
  CHECK(e.max_abs_u == doctest::Approx(std::sqrt(1.0 / 0.5)).epsilon(1e-3));
}
