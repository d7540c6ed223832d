#pragma once

// Front tracking for u_t + f(x, u)_x = 0.
//
// The solution is stored as levels of g on the grid delta * Z (as integers z),
// constant between fronts: g = delta * z_k on [front k-1, front k), with the
// state recovered pointwise as u = U[delta z](x). Fronts move by the
// Rankine-Hugoniot ODE; whenever fronts meet they are replaced by a single
// front (or annihilate), so the front count never grows after t = 0.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fronttrack/flux.hpp"
#include "fronttrack/riemann.hpp"
#include "fronttrack/stationary.hpp"

namespace fronttrack {

enum class FrontKind { shock, fan_front };

std::string to_string(FrontKind kind);

struct Front {
  std::int64_t id = 0;
  double position = 0.0;
  std::int64_t z_left = 0;
  std::int64_t z_right = 0;
  FrontKind kind = FrontKind::shock;
  double birth_time = 0.0;
  // Fan emission group; siblings share it and start co-located.
  std::int64_t group = -1;

  GLevel g_left(double delta) const { return GLevel(delta * static_cast<double>(z_left)); }
  GLevel g_right(double delta) const { return GLevel(delta * static_cast<double>(z_right)); }
};

class InvariantBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WindowExit : public std::runtime_error {
 public:
  WindowExit(double position, double time, Interval domain);
  double position() const noexcept { return position_; }
  double time() const noexcept { return time_; }

 private:
  double position_;
  double time_;
};

struct FrontField {
  double time = 0.0;
  std::vector<Front> fronts;
  std::int64_t z_leftmost = 0;
  double delta = 0.0;
  std::int64_t next_id = 0;

  GLevel g_leftmost() const { return GLevel(delta * static_cast<double>(z_leftmost)); }
  std::int64_t z_rightmost() const { return fronts.empty() ? z_leftmost : fronts.back().z_right; }

  // Throws InvariantBreach naming the first violated invariant: ordered
  // positions (co-location only for just-emitted fan siblings), chained
  // levels, non-trivial jumps and, when `admissible`, upward jumps <= delta.
  void validate(bool admissible = true) const;
};

struct Event {
  double time = 0.0;
  double position = 0.0;
  std::vector<std::int64_t> consumed;
  std::optional<std::int64_t> produced;
  // Total variation of g in units of delta, and in g units.
  std::int64_t tv_before_units = 0;
  std::int64_t tv_after_units = 0;
  double tv_before = 0.0;
  double tv_after = 0.0;
  // Contact with (numerically) equal speeds.
  bool grazing = false;
};

struct EventLog {
  std::vector<Event> events;

  void append(const EventLog& other) { events.insert(events.end(), other.events.begin(), other.events.end()); }
};

enum class Boundary { zero, extend };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

// Initial data rounded to the delta grid: levels[i] holds on
// [breaks[i-1], breaks[i]) with levels.front() extending to -inf and
// levels.back() to +inf.
struct QuantizedData {
  double delta = 0.0;
  Interval window;
  std::vector<double> breaks;
  std::vector<std::int64_t> levels;
  double cell_width = 0.0;
  // L1(window) bound on |G_delta - G0|: delta/2 * |window| + modulus_term,
  // where modulus_term sums the sampled oscillation of G0 per cell times the
  // cell width.
  double modulus_term = 0.0;
  double l1_bound = 0.0;

  std::int64_t level_at(double x) const;
  double g_at(double x) const { return delta * static_cast<double>(level_at(x)); }
  std::size_t jump_count() const { return breaks.size(); }
};

using Sampler = std::function<double(double)>;

// Samples G0 = g(x, u0(x)) at cell midpoints, rounds to the nearest multiple
// of delta (ties toward zero) and merges equal neighbours. With
// Boundary::zero the level is 0 outside the window (compact support); with
// Boundary::extend the edge cells' levels continue to +-infinity.
QuantizedData quantize_initial(const Flux& flux, const Sampler& u0, double delta, Interval window, int cells,
                               Boundary boundary = Boundary::zero);

// Solves the Riemann problem at every jump: a downward jump becomes one
// shock, an upward jump a delta-fan of unit-level fronts emitted from the
// same point.
FrontField initial_fronts(const QuantizedData& data);

struct TrackerOptions {
  double h_ode = 1e-3;
  double tol_event = 1e-11;
  double tol_pos = 1e-10;
  Interval domain{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  // Abort on a merged upward jump larger than delta. Disabled only to evolve
  // deliberately inadmissible data.
  bool enforce_admissibility = true;
};

// Replaces the adjacent fronts `ids` (left to right) by one front carrying
// the outermost levels, located at rho and born at tau; returns nothing if
// the outer levels coincide.
std::optional<Front> resolve_collision(FrontField& field, std::span<const std::int64_t> ids, double rho, double tau,
                                       bool enforce_admissibility = true);

std::int64_t sample_z(const FrontField& field, double x);
double sample_g(const FrontField& field, double x);
std::int64_t tv_units(const FrontField& field);
double tv_g(const FrontField& field);

// Exact L1 distance between the g fields of two front fields over `window`.
double l1_g_distance(const FrontField& a, const FrontField& b, Interval window);

class FrontTracker {
 public:
  FrontTracker(Flux flux, double delta, TrackerOptions options = {});

  std::pair<FrontField, EventLog> advance(FrontField field, double t_target) const;
  void advance_in_place(FrontField& field, double t_target, EventLog& log) const;

  double speed(const Front& front, double y) const;
  double sample_u(const FrontField& field, double x) const;

  // Largest |U| over the field's levels, sampled on the window.
  double sup_norm(const FrontField& field, Interval window, int samples = 257) const;

  const Flux& flux() const noexcept { return bank_.flux(); }
  double delta() const noexcept { return bank_.delta(); }
  const LevelBank& bank() const noexcept { return bank_; }
  const TrackerOptions& options() const noexcept { return options_; }

 private:
  struct Motion;

  void resolve_contacts(FrontField& field, EventLog& log) const;
  void check_domain(const FrontField& field) const;

  LevelBank bank_;
  TrackerOptions options_;
};

}  // namespace fronttrack
