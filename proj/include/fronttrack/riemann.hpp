#pragma once

// Generalised Riemann problem between two stationary profiles, and the
// piecewise-linear approximate flux f^delta for which front-tracking output
// is an exact entropy solution.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fronttrack/flux.hpp"
#include "fronttrack/stationary.hpp"

namespace fronttrack {

enum class WaveKind { shock, fan, null };

std::string to_string(WaveKind kind);

// shock iff g_l > g_r, fan iff g_l < g_r.
WaveKind classify(double g_l, double g_r);

inline constexpr double kEpsDen = 1e-9;

class DegenerateFrontError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rankine-Hugoniot quotient (f_l - f_r) / (u_l - u_r). Throws when
// |u_l - u_r| < kEpsDen * max(1, |u_l|, |u_r|).
double rh_speed(double f_l, double f_r, double u_l, double u_r);

// Speed of a front separating levels g_L | g_R at position y.
double front_speed(const Flux& flux, GLevel g_left, GLevel g_right, double y);

struct RiemannFan {
  std::vector<GLevel> levels;
  WaveKind kind = WaveKind::null;

  std::size_t front_count() const noexcept { return levels.size() < 2 ? 0 : levels.size() - 1; }
};

// Levels g_l, g_l + delta, ..., g_r (last gap in (0, delta]) for g_l < g_r;
// the two endpoint levels for a shock; a single level when equal.
RiemannFan build_fan(GLevel g_l, GLevel g_r, double delta);

// Integer form used by the tracker: consecutive levels z_l, ..., z_r.
std::vector<std::int64_t> fan_levels(std::int64_t z_l, std::int64_t z_r);

// f^delta: for fixed x, the piecewise-linear interpolant of f(x, .) through
// the states U[delta z](x), z in Z. It equals f wherever g(x, u) is on the
// delta grid.
class ApproxFlux {
 public:
  ApproxFlux(Flux base, double delta);

  double eval(double x, double u) const;
  // Same value written with the interpolation anchored at the upper level.
  double eval_upper_anchor(double x, double u) const;
  // Exact x-derivative of the interpolant. On a grid level the right
  // derivative is returned.
  double dx(double x, double u) const;

  // Grid cell of g(x, u): the z with g in [delta z, delta (z + 1)).
  std::int64_t cell(double x, double u) const;

  const Flux& base() const noexcept { return bank_.flux(); }
  double delta() const noexcept { return bank_.delta(); }
  const LevelBank& bank() const noexcept { return bank_; }

 private:
  // delta * |z|: the value of f on level z.
  double level_flux(std::int64_t z) const { return bank_.delta() * static_cast<double>(z < 0 ? -z : z); }

  LevelBank bank_;
};

double approx_flux_eval(const ApproxFlux& af, double x, double u);
double approx_flux_dx(const ApproxFlux& af, double x, double u);

}  // namespace fronttrack
