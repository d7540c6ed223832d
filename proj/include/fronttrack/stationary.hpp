#pragma once

// Stationary solutions and the sign-flux coordinate g(x, u) = sgn(u) f(x, u).
//
// For every level G the equation g(x, U) = G has exactly one solution U[G](x)
// per x; x -> U[G](x) is a classical stationary solution, and the front
// tracker represents the whole solution as a piecewise-constant field of
// levels glued along fronts.

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

#include "fronttrack/flux.hpp"

namespace fronttrack {

// A level of g. Positive levels select the positive stationary branch,
// negative ones the negative branch, zero the zero solution.
struct GLevel {
  double value = 0.0;

  constexpr GLevel() = default;
  constexpr explicit GLevel(double v) : value(v) {}

  friend constexpr bool operator==(GLevel a, GLevel b) { return a.value == b.value; }
  friend constexpr auto operator<=>(GLevel a, GLevel b) { return a.value <=> b.value; }
};

inline constexpr double kTolInv = 1e-12;

double g_of(const Flux& flux, double x, double u);

class BracketError : public std::runtime_error {
 public:
  BracketError(double x, double level);
  double x() const noexcept { return x_; }
  double level() const noexcept { return level_; }

 private:
  double x_;
  double level_;
};

// Solves f(x, U) = |level| on the branch sgn(U) = sgn(level). The bracket
// [0, 1.01 sqrt(2 |level| / alpha)] is guaranteed by f >= alpha u^2 / 2;
// safeguarded Newton runs inside it until the residual is below
// tol_rel * max(1, |level|).
double invert_level(const Flux& flux, double x, double level, double tol_rel = kTolInv);

// x -> U[level](x), with a memo of solved (x, U) pairs. The memo is shared by
// copies and guarded by a mutex; results are identical with it disabled.
class StationaryProfile {
 public:
  StationaryProfile(Flux flux, GLevel level, bool memoize = true);

  GLevel level() const noexcept { return level_; }
  const Flux& flux() const noexcept { return flux_; }

  double u(double x) const;
  // Implicit derivative -f_x / f_u along the profile; zero for the zero level.
  double dx(double x) const;

 private:
  struct Memo;

  Flux flux_;
  GLevel level_;
  std::shared_ptr<Memo> memo_;
};

StationaryProfile stationary_profile(const Flux& flux, GLevel level, bool memoize = true);

// Uniform bound on sup_x |U[g1](x) - U[g2](x)|.
double inversion_gap_bound(double g1, double g2, double alpha);

struct ProfileExtent {
  double min_abs_u = 0.0;
  double max_abs_u = 0.0;
  double x_at_min = 0.0;
};

// Sampled range of |U| over a window (diagnostic only).
ProfileExtent profile_extent(const StationaryProfile& profile, Interval window, int samples);

// Profiles for the quantised levels delta * z, created on demand. Lookups are
// thread-safe and returned references stay valid for the bank's lifetime.
class LevelBank {
 public:
  LevelBank(Flux flux, double delta);
  LevelBank(const LevelBank&) = delete;
  LevelBank& operator=(const LevelBank&) = delete;

  const StationaryProfile& profile(std::int64_t z) const;
  double u(std::int64_t z, double x) const { return z == 0 ? 0.0 : profile(z).u(x); }
  double dx(std::int64_t z, double x) const { return z == 0 ? 0.0 : profile(z).dx(x); }

  double delta() const noexcept { return delta_; }
  const Flux& flux() const noexcept { return flux_; }

 private:
  Flux flux_;
  double delta_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::int64_t, std::unique_ptr<StationaryProfile>> profiles_;
};

}  // namespace fronttrack
