#include "fronttrack/stationary.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace fronttrack {

namespace {

std::string bracket_message(double x, double level) {
  std::ostringstream s;
  s << "no stationary state for level " << level << " at x = " << x
    << " (level exceeds the flux range certified by alpha)";
  return s.str();
}

}  // namespace

BracketError::BracketError(double x, double level)
    : std::runtime_error(bracket_message(x, level)), x_(x), level_(level) {}

double g_of(const Flux& flux, double x, double u) {
  if (u > 0.0) return flux.f(x, u);
  if (u < 0.0) return -flux.f(x, u);
  return 0.0;
}

double invert_level(const Flux& flux, double x, double level, double tol_rel) {
  if (level == 0.0) return 0.0;
  if (!std::isfinite(level)) throw std::invalid_argument("invert_level: non-finite level");
  const double alpha = flux.alpha();
  if (!(alpha > 0.0)) throw std::invalid_argument("invert_level: flux has no certified alpha (run the audit)");

  const double target = std::abs(level);
  const double s = level > 0.0 ? 1.0 : -1.0;
  const double tol = tol_rel * std::max(1.0, target);
  const double hi0 = std::sqrt(2.0 * target / alpha) * 1.01;

  // phi(v) = f(x, s v) - |level| is increasing and convex on v >= 0.
  auto phi = [&](double v) { return flux.f(x, s * v) - target; };
  auto dphi = [&](double v) { return s * flux.fu(x, s * v); };

  double lo = 0.0;
  double hi = hi0;
  bool hi_checked = false;

  // Exact for fluxes quadratic in u.
  double v = 0.5 * hi;
  const double c = flux.fuu(x, 0.0);
  if (c > 0.0 && std::isfinite(c)) {
    const double guess = std::sqrt(2.0 * target / c);
    if (guess > lo && guess < hi) v = guess;
  }

  for (int iter = 0; iter < 200; ++iter) {
    const double r = phi(v);
    if (!std::isfinite(r)) throw std::domain_error("invert_level: flux not finite during inversion");
    if (std::abs(r) <= tol) return s * v;
    if (r > 0.0) {
      hi = v;
      hi_checked = true;
    } else {
      lo = v;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double d = dphi(v);
    const double newton = v - r / d;
    v = (d > 0.0 && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }

  if (!hi_checked && phi(hi0) < 0.0) throw BracketError(x, level);
  // Bracket collapsed to machine precision; the residual is rounding-limited.
  return s * 0.5 * (lo + hi);
}

struct StationaryProfile::Memo {
  static constexpr std::size_t kSlots = 2048;
  struct Slot {
    double x = std::numeric_limits<double>::quiet_NaN();
    double u = 0.0;
  };
  std::mutex mutex;
  std::array<Slot, kSlots> slots{};

  static std::size_t index(double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    bits ^= bits >> 33;
    bits *= 0xff51afd7ed558ccdULL;
    bits ^= bits >> 33;
    return static_cast<std::size_t>(bits % kSlots);
  }
};

StationaryProfile::StationaryProfile(Flux flux, GLevel level, bool memoize)
    : flux_(std::move(flux)), level_(level) {
  if (!std::isfinite(level.value)) throw std::invalid_argument("StationaryProfile: non-finite level");
  if (level.value != 0.0 && !(flux_.alpha() > 0.0)) {
    throw std::invalid_argument("StationaryProfile: flux has no certified alpha (run the audit)");
  }
  if (memoize && level.value != 0.0) memo_ = std::make_shared<Memo>();
}

double StationaryProfile::u(double x) const {
  if (level_.value == 0.0) return 0.0;
  if (!memo_) return invert_level(flux_, x, level_.value);
  const std::size_t i = Memo::index(x);
  {
    std::lock_guard lock(memo_->mutex);
    const auto& slot = memo_->slots[i];
    if (slot.x == x) return slot.u;
  }
  const double u = invert_level(flux_, x, level_.value);
  std::lock_guard lock(memo_->mutex);
  memo_->slots[i] = Memo::Slot{x, u};
  return u;
}

double StationaryProfile::dx(double x) const {
  if (level_.value == 0.0) return 0.0;
  const double u = this->u(x);
  return -flux_.fx(x, u) / flux_.fu(x, u);
}

StationaryProfile stationary_profile(const Flux& flux, GLevel level, bool memoize) {
  return StationaryProfile(flux, level, memoize);
}

double inversion_gap_bound(double g1, double g2, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("inversion_gap_bound: alpha must be positive");
  if ((g1 > 0.0 && g2 < 0.0) || (g1 < 0.0 && g2 > 0.0)) {
    return std::sqrt(2.0 / alpha) * (std::sqrt(std::abs(g1)) + std::sqrt(std::abs(g2)));
  }
  return std::sqrt(2.0 * std::abs(g1 - g2) / alpha);
}

ProfileExtent profile_extent(const StationaryProfile& profile, Interval window, int samples) {
  ProfileExtent e;
  e.min_abs_u = std::numeric_limits<double>::infinity();
  for (double x : linspace(window.lo, window.hi, std::max(samples, 2))) {
    const double a = std::abs(profile.u(x));
    if (a < e.min_abs_u) {
      e.min_abs_u = a;
      e.x_at_min = x;
    }
    e.max_abs_u = std::max(e.max_abs_u, a);
  }
  return e;
}

LevelBank::LevelBank(Flux flux, double delta) : flux_(std::move(flux)), delta_(delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("LevelBank: delta must be positive");
}

const StationaryProfile& LevelBank::profile(std::int64_t z) const {
  std::lock_guard lock(mutex_);
  auto it = profiles_.find(z);
  if (it == profiles_.end()) {
    it = profiles_.emplace(z, std::make_unique<StationaryProfile>(flux_, GLevel(delta_ * static_cast<double>(z))))
             .first;
  }
  return *it->second;
}

}  // namespace fronttrack
