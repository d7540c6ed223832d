#include "fronttrack/riemann.hpp"

#include <cmath>
#include <sstream>

namespace fronttrack {

std::string to_string(WaveKind kind) {
  switch (kind) {
    case WaveKind::shock: return "shock";
    case WaveKind::fan: return "fan";
    case WaveKind::null: return "null";
  }
  return "?";
}

WaveKind classify(double g_l, double g_r) {
  if (g_l > g_r) return WaveKind::shock;
  if (g_l < g_r) return WaveKind::fan;
  return WaveKind::null;
}

double rh_speed(double f_l, double f_r, double u_l, double u_r) {
  const double den = u_l - u_r;
  const double scale = std::max({1.0, std::abs(u_l), std::abs(u_r)});
  if (!(std::abs(den) >= kEpsDen * scale)) {
    std::ostringstream msg;
    msg << "degenerate front: |u_l - u_r| = " << std::abs(den) << " (u_l = " << u_l << ", u_r = " << u_r << ")";
    throw DegenerateFrontError(msg.str());
  }
  return (f_l - f_r) / den;
}

double front_speed(const Flux& flux, GLevel g_left, GLevel g_right, double y) {
  if (g_left == g_right) throw DegenerateFrontError("front_speed: equal levels");
  const double u_l = invert_level(flux, y, g_left.value);
  const double u_r = invert_level(flux, y, g_right.value);
  return rh_speed(std::abs(g_left.value), std::abs(g_right.value), u_l, u_r);
}

RiemannFan build_fan(GLevel g_l, GLevel g_r, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("build_fan: delta must be positive");
  RiemannFan fan;
  fan.kind = classify(g_l.value, g_r.value);
  fan.levels.push_back(g_l);
  if (fan.kind == WaveKind::null) return fan;
  if (fan.kind == WaveKind::fan) {
    // Relative slack so that a gap that is a multiple of delta up to rounding
    // does not spawn an extra sliver front.
    const double steps = (g_r.value - g_l.value) / delta;
    const auto n_fronts = static_cast<std::int64_t>(std::ceil(steps * (1.0 - 1e-12)));
    for (std::int64_t i = 1; i < n_fronts; ++i) fan.levels.emplace_back(g_l.value + delta * static_cast<double>(i));
  }
  fan.levels.push_back(g_r);
  return fan;
}

std::vector<std::int64_t> fan_levels(std::int64_t z_l, std::int64_t z_r) {
  std::vector<std::int64_t> out;
  if (z_l < z_r) {
    out.reserve(static_cast<std::size_t>(z_r - z_l + 1));
    for (std::int64_t z = z_l; z <= z_r; ++z) out.push_back(z);
  } else {
    out.push_back(z_l);
    if (z_r != z_l) out.push_back(z_r);
  }
  return out;
}

ApproxFlux::ApproxFlux(Flux base, double delta) : bank_(std::move(base), delta) {}

std::int64_t ApproxFlux::cell(double x, double u) const {
  const double g = g_of(bank_.flux(), x, u);
  auto z = static_cast<std::int64_t>(std::floor(g / bank_.delta()));
  // Rounding in g/delta can misplace u by one cell; the profiles decide.
  const double lo = bank_.u(z, x);
  if (u < lo) return z - 1;
  if (u >= bank_.u(z + 1, x)) return z + 1;
  return z;
}

double ApproxFlux::eval(double x, double u) const {
  const std::int64_t z = cell(x, u);
  const double u_lo = bank_.u(z, x);
  if (u == u_lo) return level_flux(z);
  const double u_hi = bank_.u(z + 1, x);
  const double slope = (level_flux(z + 1) - level_flux(z)) / (u_hi - u_lo);
  return level_flux(z) + slope * (u - u_lo);
}

double ApproxFlux::eval_upper_anchor(double x, double u) const {
  const std::int64_t z = cell(x, u);
  const double u_lo = bank_.u(z, x);
  const double u_hi = bank_.u(z + 1, x);
  const double slope = (level_flux(z + 1) - level_flux(z)) / (u_hi - u_lo);
  return level_flux(z + 1) + slope * (u - u_hi);
}

double ApproxFlux::dx(double x, double u) const {
  const std::int64_t z = cell(x, u);
  const double u_lo = bank_.u(z, x);
  if (u == u_lo) {
    // On a grid level: f^delta(x + h, u) - f(x, u) ~ -U_z'(x) h times the
    // slope of the segment that g(x + h, u) enters for h > 0.
    const double du = bank_.dx(z, x);
    if (du == 0.0) return 0.0;
    const double gx = (u > 0.0 ? 1.0 : -1.0) * bank_.flux().fx(x, u);
    const std::int64_t side = gx > 0.0 ? 1 : (gx < 0.0 ? -1 : (du < 0.0 ? 1 : -1));
    const double u_nb = bank_.u(z + side, x);
    const double slope = (level_flux(z + side) - level_flux(z)) / (u_nb - u_lo);
    return -du * slope;
  }
  const double u_hi = bank_.u(z + 1, x);
  const double du_lo = bank_.dx(z, x);
  const double du_hi = bank_.dx(z + 1, x);
  const double df = level_flux(z + 1) - level_flux(z);
  const double den = u_hi - u_lo;
  return df * (-du_lo * den - (u - u_lo) * (du_hi - du_lo)) / (den * den);
}

double approx_flux_eval(const ApproxFlux& af, double x, double u) { return af.eval(x, u); }
double approx_flux_dx(const ApproxFlux& af, double x, double u) { return af.dx(x, u); }

}  // namespace fronttrack
