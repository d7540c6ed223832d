#include "fronttrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fronttrack {

namespace {

std::int64_t round_ties_toward_zero(double q) {
  return static_cast<std::int64_t>(q > 0.0 ? std::ceil(q - 0.5) : std::floor(q + 0.5));
}

std::int64_t abs_diff(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

std::string dump(const FrontField& field) {
  std::ostringstream s;
  s.precision(17);
  s << "t = " << field.time << ", delta = " << field.delta << ", z_leftmost = " << field.z_leftmost << "\n";
  for (const Front& f : field.fronts) {
    s << "  #" << f.id << " y = " << f.position << " z " << f.z_left << " -> " << f.z_right << " "
      << to_string(f.kind) << " born " << f.birth_time << " group " << f.group << "\n";
  }
  return s.str();
}

std::string window_exit_message(double position, double time, Interval domain) {
  std::ostringstream s;
  s.precision(17);
  s << "front left the working window [" << domain.lo << ", " << domain.hi << "] at x = " << position
    << ", t = " << time;
  return s.str();
}

}  // namespace

std::string to_string(FrontKind kind) { return kind == FrontKind::shock ? "shock" : "fan_front"; }

std::string to_string(Boundary b) { return b == Boundary::zero ? "zero" : "extend"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "zero") return Boundary::zero;
  if (name == "extend") return Boundary::extend;
  throw std::invalid_argument("unknown boundary mode '" + name + "' (expected zero or extend)");
}

WindowExit::WindowExit(double position, double time, Interval domain)
    : std::runtime_error(window_exit_message(position, time, domain)), position_(position), time_(time) {}

void FrontField::validate(bool admissible) const {
  auto fail = [&](const std::string& what) { throw InvariantBreach(what + "\n" + dump(*this)); };
  std::int64_t z = z_leftmost;
  for (std::size_t k = 0; k < fronts.size(); ++k) {
    const Front& f = fronts[k];
    if (!std::isfinite(f.position)) fail("non-finite front position");
    if (f.z_left != z) fail("level chain broken at front #" + std::to_string(f.id));
    if (f.z_left == f.z_right) fail("trivial front #" + std::to_string(f.id));
    if (admissible && f.z_right - f.z_left > 1) fail("upward jump larger than delta at front #" + std::to_string(f.id));
    if ((f.kind == FrontKind::shock) != (f.z_left > f.z_right)) fail("kind mismatch at front #" + std::to_string(f.id));
    if (k > 0) {
      const Front& p = fronts[k - 1];
      if (f.position < p.position) fail("fronts out of order at #" + std::to_string(f.id));
      if (f.position == p.position) {
        const bool newborn_siblings = p.group >= 0 && p.group == f.group && f.birth_time == time;
        if (!newborn_siblings) fail("co-located fronts #" + std::to_string(p.id) + ", #" + std::to_string(f.id));
      }
    }
    z = f.z_right;
  }
}

std::int64_t QuantizedData::level_at(double x) const {
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  return levels[static_cast<std::size_t>(it - breaks.begin())];
}

QuantizedData quantize_initial(const Flux& flux, const Sampler& u0, double delta, Interval window, int cells,
                               Boundary boundary) {
  if (!(delta > 0.0)) throw std::invalid_argument("quantize_initial: delta must be positive");
  if (!(window.hi > window.lo)) throw std::invalid_argument("quantize_initial: empty window");
  if (cells < 1) throw std::invalid_argument("quantize_initial: need at least one cell");

  QuantizedData q;
  q.delta = delta;
  q.window = window;
  q.cell_width = window.length() / cells;
  const double h = q.cell_width;

  auto sample_g = [&](double x) {
    const double u = u0(x);
    if (!std::isfinite(u)) {
      std::ostringstream s;
      s.precision(17);
      s << "initial data is not finite at x = " << x;
      throw std::invalid_argument(s.str());
    }
    return g_of(flux, x, u);
  };

  constexpr int kSub = 8;
  std::vector<std::int64_t> z(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    const double left = window.lo + h * i;
    const double mid = left + 0.5 * h;
    const double gm = sample_g(mid);
    z[static_cast<std::size_t>(i)] = round_ties_toward_zero(gm / delta);
    double lo = gm;
    double hi = gm;
    for (int j = 0; j <= kSub; ++j) {
      const double gs = sample_g(left + h * j / kSub);
      lo = std::min(lo, gs);
      hi = std::max(hi, gs);
    }
    q.modulus_term += (hi - lo) * h;
  }
  q.l1_bound = 0.5 * delta * window.length() + q.modulus_term;

  const std::int64_t outside_left = boundary == Boundary::zero ? 0 : z.front();
  const std::int64_t outside_right = boundary == Boundary::zero ? 0 : z.back();
  q.levels.push_back(outside_left);
  auto push = [&](double at, std::int64_t level) {
    if (level == q.levels.back()) return;
    q.breaks.push_back(at);
    q.levels.push_back(level);
  };
  for (int i = 0; i < cells; ++i) push(i == 0 ? window.lo : window.lo + h * i, z[static_cast<std::size_t>(i)]);
  push(window.hi, outside_right);
  return q;
}

FrontField initial_fronts(const QuantizedData& data) {
  FrontField field;
  field.delta = data.delta;
  field.z_leftmost = data.levels.front();
  for (std::size_t i = 0; i < data.breaks.size(); ++i) {
    const std::int64_t zl = data.levels[i];
    const std::int64_t zr = data.levels[i + 1];
    const double x = data.breaks[i];
    if (zl > zr) {
      field.fronts.push_back(Front{field.next_id++, x, zl, zr, FrontKind::shock, 0.0, -1});
      continue;
    }
    const auto group = static_cast<std::int64_t>(i);
    const std::vector<std::int64_t> levels = fan_levels(zl, zr);
    for (std::size_t j = 0; j + 1 < levels.size(); ++j) {
      field.fronts.push_back(Front{field.next_id++, x, levels[j], levels[j + 1], FrontKind::fan_front, 0.0, group});
    }
  }
  return field;
}

std::optional<Front> resolve_collision(FrontField& field, std::span<const std::int64_t> ids, double rho, double tau,
                                       bool enforce_admissibility) {
  if (ids.size() < 2) throw std::invalid_argument("resolve_collision: need at least two fronts");
  auto first = std::find_if(field.fronts.begin(), field.fronts.end(),
                            [&](const Front& f) { return f.id == ids.front(); });
  if (first == field.fronts.end() || static_cast<std::size_t>(field.fronts.end() - first) < ids.size()) {
    throw std::invalid_argument("resolve_collision: unknown front id");
  }
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (first[static_cast<std::ptrdiff_t>(j)].id != ids[j]) {
      throw std::invalid_argument("resolve_collision: fronts are not adjacent in order");
    }
  }
  const auto last = first + static_cast<std::ptrdiff_t>(ids.size());
  const std::int64_t zl = first->z_left;
  const std::int64_t zr = (last - 1)->z_right;
  if (enforce_admissibility && zr - zl > 1) {
    std::ostringstream s;
    s.precision(17);
    s << "collision at x = " << rho << ", t = " << tau << " produced an upward jump of " << (zr - zl)
      << " levels (at most one is admissible)";
    throw InvariantBreach(s.str() + "\n" + dump(field));
  }
  const auto at = field.fronts.erase(first, last);
  if (zl == zr) return std::nullopt;
  Front merged{field.next_id++, rho, zl, zr, zl > zr ? FrontKind::shock : FrontKind::fan_front, tau, -1};
  field.fronts.insert(at, merged);
  return merged;
}

std::int64_t sample_z(const FrontField& field, double x) {
  const auto it = std::upper_bound(field.fronts.begin(), field.fronts.end(), x,
                                   [](double v, const Front& f) { return v < f.position; });
  if (it == field.fronts.begin()) return field.z_leftmost;
  return std::prev(it)->z_right;
}

double sample_g(const FrontField& field, double x) { return field.delta * static_cast<double>(sample_z(field, x)); }

std::int64_t tv_units(const FrontField& field) {
  std::int64_t tv = 0;
  for (const Front& f : field.fronts) tv += abs_diff(f.z_left, f.z_right);
  return tv;
}

double tv_g(const FrontField& field) { return field.delta * static_cast<double>(tv_units(field)); }

double l1_g_distance(const FrontField& a, const FrontField& b, Interval window) {
  std::vector<double> cuts{window.lo, window.hi};
  for (const auto* field : {&a, &b}) {
    for (const Front& f : field->fronts) {
      if (f.position > window.lo && f.position < window.hi) cuts.push_back(f.position);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double w = cuts[i + 1] - cuts[i];
    if (w <= 0.0) continue;
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    total += std::abs(sample_g(a, mid) - sample_g(b, mid)) * w;
  }
  return total;
}

// Per-step cache of the two profiles a front moves between.
struct FrontTracker::Motion {
  const StationaryProfile* left;
  const StationaryProfile* right;
  double f_left;
  double f_right;

  double speed(double y) const { return rh_speed(f_left, f_right, left->u(y), right->u(y)); }
};

FrontTracker::FrontTracker(Flux flux, double delta, TrackerOptions options)
    : bank_(std::move(flux), delta), options_(options) {
  if (!(options_.h_ode > 0.0)) throw std::invalid_argument("FrontTracker: h_ode must be positive");
}

double FrontTracker::speed(const Front& front, double y) const {
  const double d = bank_.delta();
  return rh_speed(d * static_cast<double>(std::abs(front.z_left)), d * static_cast<double>(std::abs(front.z_right)),
                  bank_.u(front.z_left, y), bank_.u(front.z_right, y));
}

double FrontTracker::sample_u(const FrontField& field, double x) const { return bank_.u(sample_z(field, x), x); }

double FrontTracker::sup_norm(const FrontField& field, Interval window, int samples) const {
  double m = 0.0;
  std::int64_t z = field.z_leftmost;
  m = std::max({m, std::abs(bank_.u(z, window.lo)), std::abs(bank_.u(z, window.hi))});
  for (const Front& f : field.fronts) {
    for (std::int64_t level : {f.z_left, f.z_right}) {
      for (double x : linspace(window.lo, window.hi, samples)) m = std::max(m, std::abs(bank_.u(level, x)));
    }
  }
  if (field.fronts.empty()) {
    for (double x : linspace(window.lo, window.hi, samples)) m = std::max(m, std::abs(bank_.u(z, x)));
  }
  return m;
}

void FrontTracker::check_domain(const FrontField& field) const {
  for (const Front& f : field.fronts) {
    if (!options_.domain.contains(f.position)) throw WindowExit(f.position, field.time, options_.domain);
  }
}

std::pair<FrontField, EventLog> FrontTracker::advance(FrontField field, double t_target) const {
  EventLog log;
  advance_in_place(field, t_target, log);
  return {std::move(field), std::move(log)};
}

void FrontTracker::resolve_contacts(FrontField& field, EventLog& log) const {
  // Each pass merges every cluster of touching fronts; a merge can bring its
  // product into contact with a neighbour, hence the loop.
  for (;;) {
    auto& fr = field.fronts;
    if (fr.size() < 2) return;
    std::vector<double> v(fr.size());
    for (std::size_t k = 0; k < fr.size(); ++k) v[k] = speed(fr[k], fr[k].position);

    auto contact = [&](std::size_t k) {
      const double gap = fr[k + 1].position - fr[k].position;
      if (gap < 0.0) return true;
      if (gap > options_.tol_pos) return false;
      const double scale = 1.0 + std::max(std::abs(v[k]), std::abs(v[k + 1]));
      return v[k] - v[k + 1] >= -1e-12 * scale;
    };

    struct Cluster {
      std::vector<std::int64_t> ids;
      double rho;
      bool grazing;
    };
    std::vector<Cluster> clusters;
    for (std::size_t k = 0; k + 1 < fr.size();) {
      if (!contact(k)) {
        ++k;
        continue;
      }
      std::size_t end = k + 1;
      while (end + 1 < fr.size() && contact(end)) ++end;
      Cluster c;
      double sum = 0.0;
      double closing = 0.0;
      for (std::size_t j = k; j <= end; ++j) {
        c.ids.push_back(fr[j].id);
        sum += fr[j].position;
        if (j < end) closing = std::max(closing, v[j] - v[j + 1]);
      }
      c.rho = sum / static_cast<double>(end - k + 1);
      c.grazing = closing < 1e-9 * (1.0 + std::abs(v[k]));
      clusters.push_back(std::move(c));
      k = end + 1;
    }
    if (clusters.empty()) return;

    for (const Cluster& c : clusters) {
      Event e;
      e.time = field.time;
      e.position = c.rho;
      e.consumed = c.ids;
      e.grazing = c.grazing;
      e.tv_before_units = tv_units(field);
      const auto produced = resolve_collision(field, c.ids, c.rho, field.time, options_.enforce_admissibility);
      if (produced) e.produced = produced->id;
      e.tv_after_units = tv_units(field);
      e.tv_before = field.delta * static_cast<double>(e.tv_before_units);
      e.tv_after = field.delta * static_cast<double>(e.tv_after_units);
      if (e.tv_after_units > e.tv_before_units) {
        throw InvariantBreach("total variation increased at a collision\n" + dump(field));
      }
      log.events.push_back(std::move(e));
    }
    // Merged fronts take the cluster mean; keep the order monotone.
    for (std::size_t k = 1; k < fr.size(); ++k) {
      if (fr[k].position < fr[k - 1].position) fr[k].position = fr[k - 1].position;
    }
  }
}

void FrontTracker::advance_in_place(FrontField& field, double t_target, EventLog& log) const {
  if (!(t_target >= field.time)) throw std::invalid_argument("advance: target time precedes the field time");
  if (field.delta != bank_.delta()) throw std::invalid_argument("advance: field and tracker disagree on delta");
  const double h_ode = options_.h_ode;

  while (field.time < t_target) {
    resolve_contacts(field, log);
    auto& fr = field.fronts;
    const double t0 = field.time;
    if (fr.empty()) {
      field.time = t_target;
      break;
    }

    // Steps land on the global grid k * h_ode so that results do not depend
    // on where previous events fell.
    double t1 = (std::floor(t0 / h_ode) + 1.0) * h_ode;
    if (t1 - t0 < 1e-9 * h_ode) t1 += h_ode;
    t1 = std::min(t1, t_target);
    const double h = t1 - t0;

    const std::size_t n = fr.size();
    std::vector<Motion> motion(n);
    std::vector<double> y0(n), v0(n);
    const double d = bank_.delta();
    for (std::size_t k = 0; k < n; ++k) {
      motion[k] = Motion{&bank_.profile(fr[k].z_left), &bank_.profile(fr[k].z_right),
                         d * static_cast<double>(std::abs(fr[k].z_left)),
                         d * static_cast<double>(std::abs(fr[k].z_right))};
      y0[k] = fr[k].position;
      v0[k] = motion[k].speed(y0[k]);
    }

    auto rk4 = [&](std::size_t k, double tau) {
      const Motion& m = motion[k];
      const double y = y0[k];
      const double k1 = v0[k];
      const double k2 = m.speed(y + 0.5 * tau * k1);
      const double k3 = m.speed(y + 0.5 * tau * k2);
      const double k4 = m.speed(y + tau * k3);
      const double out = y + tau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(out)) {
        std::ostringstream s;
        s << "ODE step failure for front #" << fr[k].id << " at t = " << t0;
        throw std::runtime_error(s.str());
      }
      return out;
    };

    // Co-located pairs that are separating (fan siblings) are not crossings.
    auto crossed = [&](std::size_t k, double ya, double yb) {
      const double gap = yb - ya;
      return gap < 0.0 || (gap == 0.0 && v0[k] >= v0[k + 1]);
    };

    std::vector<double> y1(n);
    for (std::size_t k = 0; k < n; ++k) y1[k] = rk4(k, h);
    std::vector<std::size_t> pairs;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (crossed(k, y1[k], y1[k + 1])) pairs.push_back(k);
    }

    if (pairs.empty()) {
      for (std::size_t k = 0; k < n; ++k) fr[k].position = y1[k];
      field.time = t1;
      check_domain(field);
      continue;
    }

    double lo = 0.0;
    double hi = h;
    std::vector<double> y_mid(n);
    std::vector<char> done(n);
    while (hi - lo > options_.tol_event) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      std::fill(done.begin(), done.end(), 0);
      bool any = false;
      for (std::size_t k : pairs) {
        for (std::size_t j : {k, k + 1}) {
          if (!done[j]) {
            y_mid[j] = rk4(j, mid);
            done[j] = 1;
          }
        }
        if (crossed(k, y_mid[k], y_mid[k + 1])) {
          any = true;
          break;
        }
      }
      (any ? hi : lo) = mid;
    }

    for (std::size_t k = 0; k < n; ++k) fr[k].position = hi == h ? y1[k] : rk4(k, hi);
    field.time = hi == h ? t1 : t0 + hi;
    check_domain(field);
    resolve_contacts(field, log);
  }
  field.time = t_target;
}

}  // namespace fronttrack
