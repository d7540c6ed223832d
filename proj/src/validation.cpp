#include "fronttrack/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fronttrack/rng.hpp"

namespace fronttrack {

namespace {

std::vector<double> midpoints(Interval box, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double h = box.length() / n;
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = box.lo + (i + 0.5) * h;
  return out;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double bump(double s) {
  if (!(std::abs(s) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_derivative(double s) {
  if (!(std::abs(s) < 1.0)) return 0.0;
  const double d = 1.0 - s * s;
  return bump(s) * (-2.0 * s / (d * d));
}

double TestFunction::phi(double x, double t) const {
  return bump((x - x_center) / x_radius) * bump((t - t_center) / t_radius);
}

double TestFunction::phi_t(double x, double t) const {
  return bump((x - x_center) / x_radius) * bump_derivative((t - t_center) / t_radius) / t_radius;
}

double TestFunction::phi_x(double x, double t) const {
  return bump_derivative((x - x_center) / x_radius) / x_radius * bump((t - t_center) / t_radius);
}

FunctionSolution::FunctionSolution(std::function<double(double, double)> u, std::function<double(double)> u0,
                                   std::function<std::int64_t(double, double)> label)
    : u_(std::move(u)), u0_(std::move(u0)), label_(std::move(label)) {}

void FunctionSolution::sample_row(double t, std::span<const double> xs, std::span<double> u,
                                  std::span<std::int64_t> labels) const {
  for (std::size_t j = 0; j < xs.size(); ++j) {
    u[j] = t == 0.0 ? u0_(xs[j]) : u_(xs[j], t);
    labels[j] = label_ ? label_(xs[j], t) : 0;
  }
}

FrontTrackingSolution::FrontTrackingSolution(const FrontTracker& tracker, FrontField initial)
    : tracker_(tracker), initial_(std::move(initial)), cursor_(initial_) {}

double FrontTrackingSolution::initial(double x) const { return tracker_.sample_u(initial_, x); }

const FrontField& FrontTrackingSolution::at(double t) const {
  if (t < cursor_.time) cursor_ = initial_;
  EventLog ignored;
  tracker_.advance_in_place(cursor_, t, ignored);
  return cursor_;
}

void FrontTrackingSolution::sample_row(double t, std::span<const double> xs, std::span<double> u,
                                       std::span<std::int64_t> labels) const {
  const FrontField& field = at(t);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const std::int64_t z = sample_z(field, xs[j]);
    labels[j] = z;
    u[j] = tracker_.bank().u(z, xs[j]);
  }
}

EntropyFlux exact_entropy_flux(const Flux& flux) {
  return {[flux](double x, double u) { return flux.f(x, u); }, [flux](double x, double u) { return flux.fx(x, u); }};
}

EntropyFlux approx_entropy_flux(const ApproxFlux& af) {
  return {[&af](double x, double u) { return af.eval(x, u); }, [&af](double x, double u) { return af.dx(x, u); }};
}

EntropyQuadrature::EntropyQuadrature(const SpaceTimeSolution& solution, EntropyFlux flux, QuadSpec quad)
    : flux_(std::move(flux)), quad_(quad) {
  if (quad_.nx < 3 || quad_.nt < 3) throw std::invalid_argument("EntropyQuadrature: grid too small");
  if (!(quad_.x_box.hi > quad_.x_box.lo) || !(quad_.t_box.hi > quad_.t_box.lo) || quad_.t_box.lo != 0.0) {
    throw std::invalid_argument("EntropyQuadrature: box must be non-degenerate and start at t = 0");
  }
  xs_ = midpoints(quad_.x_box, quad_.nx);
  ts_ = midpoints(quad_.t_box, quad_.nt);
  const auto nx = static_cast<std::size_t>(quad_.nx);
  // Row 0 holds the initial data; rows 1..nt the midpoint times.
  u_.resize(nx * (ts_.size() + 1));
  labels_.resize(u_.size());
  f_u_.resize(u_.size());
  for (std::size_t i = 0; i <= ts_.size(); ++i) {
    const double t = i == 0 ? 0.0 : ts_[i - 1];
    std::span<double> row(u_.data() + i * nx, nx);
    std::span<std::int64_t> lab(labels_.data() + i * nx, nx);
    solution.sample_row(t, xs_, row, lab);
    for (std::size_t j = 0; j < nx; ++j) {
      f_u_[i * nx + j] = flux_.f(xs_[j], row[j]);
      sup_u_ = std::max(sup_u_, std::abs(row[j]));
    }
  }
  u0_.assign(u_.begin(), u_.begin() + static_cast<std::ptrdiff_t>(nx));
}

ResidualResult EntropyQuadrature::residual(double k, const TestFunction& phi) const {
  const Interval xs = phi.x_support();
  const Interval ts = phi.t_support();
  if (!(xs.lo > quad_.x_box.lo && xs.hi < quad_.x_box.hi && ts.hi < quad_.t_box.hi)) {
    throw std::invalid_argument("kruzkov residual: test function support escapes the quadrature box");
  }
  const auto nx = static_cast<std::size_t>(quad_.nx);
  const double hx = quad_.x_box.length() / quad_.nx;
  const double ht = quad_.t_box.length() / quad_.nt;

  std::vector<double> fk(nx), fxk(nx);
  std::size_t j_lo = nx, j_hi = 0;
  for (std::size_t j = 0; j < nx; ++j) {
    if (xs_[j] <= xs.lo || xs_[j] >= xs.hi) continue;
    j_lo = std::min(j_lo, j);
    j_hi = std::max(j_hi, j);
    fk[j] = flux_.f(xs_[j], k);
    fxk[j] = flux_.fx(xs_[j], k);
  }

  ResidualResult out;
  out.k = k;
  out.phi = phi;
  if (j_lo > j_hi) return out;
  // One spare sample on each side so differences reach the support edge.
  const std::size_t a = j_lo == 0 ? 0 : j_lo - 1;
  const std::size_t b = std::min(nx - 1, j_hi + 1);

  // Integrand and its "piece" key; a key change marks a discontinuity.
  auto key = [&](std::size_t idx) {
    return std::pair{labels_[idx], sgn(u_[idx] - k)};
  };
  std::vector<double> cur(nx), prev(nx), prev2(nx);
  std::vector<std::pair<std::int64_t, double>> kcur(nx), kprev(nx), kprev2(nx);

  double sum = 0.0;
  double tol = 0.0;
  auto row_terms = [&](std::vector<double>& I, std::vector<std::pair<std::int64_t, double>>& keys, double h) {
    double s = 0.0;
    double err = 0.0;
    for (std::size_t j = a; j <= b; ++j) s += I[j];
    for (std::size_t j = a; j < b; ++j) {
      if (keys[j] != keys[j + 1]) err += 0.5 * std::abs(I[j + 1] - I[j]);
      if (j > a && keys[j - 1] == keys[j] && keys[j] == keys[j + 1]) {
        err += std::abs(I[j + 1] - 2.0 * I[j] + I[j - 1]) / 24.0;
      }
    }
    return std::pair{s * h, err * h};
  };

  // Initial-data term.
  {
    for (std::size_t j = a; j <= b; ++j) {
      cur[j] = std::abs(u0_[j] - k) * phi.phi(xs_[j], 0.0);
      kcur[j] = key(j);
    }
    const auto [s, e] = row_terms(cur, kcur, hx);
    sum += s;
    tol += e;
  }

  int rows_seen = 0;
  for (std::size_t i = 0; i < ts_.size(); ++i) {
    const double t = ts_[i];
    if (t >= ts.hi) break;
    if (t <= ts.lo && rows_seen == 0) {
      // Rows before the support only matter as the stencil for the time
      // second difference, which vanishes there.
      continue;
    }
    const std::size_t base = (i + 1) * nx;
    for (std::size_t j = a; j <= b; ++j) {
      const double x = xs_[j];
      const double u = u_[base + j];
      const double s = sgn(u - k);
      cur[j] = std::abs(u - k) * phi.phi_t(x, t) + s * (f_u_[base + j] - fk[j]) * phi.phi_x(x, t) -
               s * fxk[j] * phi.phi(x, t);
      kcur[j] = key(base + j);
    }
    const auto [s, e] = row_terms(cur, kcur, hx);
    sum += s * ht;
    tol += e * ht;
    if (rows_seen >= 2) {
      for (std::size_t j = a; j <= b; ++j) {
        if (kprev2[j] == kprev[j] && kprev[j] == kcur[j]) {
          tol += std::abs(cur[j] - 2.0 * prev[j] + prev2[j]) / 24.0 * hx * ht;
        }
      }
    }
    std::swap(prev2, prev);
    std::swap(prev, cur);
    std::swap(kprev2, kprev);
    std::swap(kprev, kcur);
    ++rows_seen;
  }
  out.residual = sum;
  out.tol_quad = tol;
  return out;
}

ResidualResult kruzkov_residual(const SpaceTimeSolution& solution, const Flux& flux, double k,
                                const TestFunction& phi, const QuadSpec& quad) {
  return EntropyQuadrature(solution, exact_entropy_flux(flux), quad).residual(k, phi);
}

ResidualResult approx_kruzkov_residual(const SpaceTimeSolution& solution, const ApproxFlux& af, double k,
                                       const TestFunction& phi, const QuadSpec& quad) {
  return EntropyQuadrature(solution, approx_entropy_flux(af), quad).residual(k, phi);
}

std::vector<std::pair<double, TestFunction>> entropy_battery_pairs(std::uint64_t seed, int count, double u_bound,
                                                                   const QuadSpec& quad) {
  CounterRng rng(seed, 0xe17);
  const double kb = u_bound > 0.0 ? 1.1 * u_bound : 1.0;
  const double lx = quad.x_box.length();
  const double T = quad.t_box.hi;
  const double margin = 2.0 * lx / quad.nx;
  std::vector<std::pair<double, TestFunction>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    TestFunction phi;
    const double k = rng.uniform(-kb, kb);
    phi.x_radius = rng.uniform(0.1, 0.35) * lx;
    phi.x_center = rng.uniform(quad.x_box.lo + phi.x_radius + margin, quad.x_box.hi - phi.x_radius - margin);
    phi.t_radius = rng.uniform(0.2, 0.45) * T;
    if (i % 2 == 0) {
      phi.t_center = rng.uniform(-0.5, 0.5) * phi.t_radius;
    } else {
      phi.t_center = rng.uniform(phi.t_radius, T - phi.t_radius - 2.0 * T / quad.nt);
    }
    out.emplace_back(k, phi);
  }
  return out;
}

CharacteristicResult characteristic_check(const Flux& flux, double x0, double u0, double T, int steps,
                                          Interval window) {
  if (steps < 1) throw std::invalid_argument("characteristic_check: need at least one step");
  const double h = T / steps;
  const double f0 = flux.f(x0, u0);
  double y = x0;
  double z = u0;
  CharacteristicResult r;
  auto rhs = [&](double yy, double zz) { return std::pair{flux.fu(yy, zz), -flux.fx(yy, zz)}; };
  for (int n = 0; n < steps; ++n) {
    const auto [a1, b1] = rhs(y, z);
    const auto [a2, b2] = rhs(y + 0.5 * h * a1, z + 0.5 * h * b1);
    const auto [a3, b3] = rhs(y + 0.5 * h * a2, z + 0.5 * h * b2);
    const auto [a4, b4] = rhs(y + h * a3, z + h * b3);
    y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    z += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    if (!window.contains(y)) {
      std::ostringstream s;
      s << "characteristic left the window at t = " << (n + 1) * h << ", x = " << y;
      throw std::runtime_error(s.str());
    }
    r.drift = std::max(r.drift, std::abs(flux.f(y, z) - f0));
  }
  r.y_end = y;
  r.u_end = z;
  return r;
}

RarefactionOracle::RarefactionOracle(const Flux& flux, double x_bar, GLevel g_l, GLevel g_r, double T, int rays,
                                     int steps)
    : flux_(flux), g_l_(g_l), g_r_(g_r) {
  if (!(g_l < g_r)) throw std::invalid_argument("RarefactionOracle: needs g_l < g_r");
  if (rays < 2) throw std::invalid_argument("RarefactionOracle: need at least two rays");
  const double u_l = invert_level(flux, x_bar, g_l.value);
  const double u_r = invert_level(flux, x_bar, g_r.value);
  for (int i = 0; i < rays; ++i) {
    const double z0 = u_l + (u_r - u_l) * i / (rays - 1);
    const CharacteristicResult c = characteristic_check(flux, x_bar, z0, T, steps);
    y_.push_back(c.y_end);
    z_.push_back(c.u_end);
  }
}

double RarefactionOracle::operator()(double x) const {
  if (x <= y_.front()) return invert_level(flux_, x, g_l_.value);
  if (x >= y_.back()) return invert_level(flux_, x, g_r_.value);
  const auto it = std::upper_bound(y_.begin(), y_.end(), x);
  const auto i = static_cast<std::size_t>(it - y_.begin());
  const double w = (x - y_[i - 1]) / (y_[i] - y_[i - 1]);
  return z_[i - 1] + w * (z_[i] - z_[i - 1]);
}

double FVGrid::sample(double x) const {
  auto i = static_cast<long>(std::floor((x - window.lo) / dx));
  i = std::clamp(i, 0L, static_cast<long>(cells) - 1);
  return u[static_cast<std::size_t>(i)];
}

FVGrid fv_reference(const Flux& flux, const Sampler& u0, Interval window, int cells, double T, double cfl) {
  if (!(cfl > 0.0 && cfl <= 0.45)) throw std::invalid_argument("fv_reference: cfl must lie in (0, 0.45]");
  if (cells < 1 || !(window.hi > window.lo)) throw std::invalid_argument("fv_reference: bad grid");
  FVGrid g;
  g.window = window;
  g.cells = cells;
  g.dx = window.length() / cells;
  g.cfl = cfl;
  g.u.resize(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) g.u[static_cast<std::size_t>(i)] = u0(g.x_center(i));

  const auto n = static_cast<std::size_t>(cells);
  std::vector<double> flux_at(n + 1);
  std::vector<double> x_if(n + 1);
  for (std::size_t i = 0; i <= n; ++i) x_if[i] = window.lo + g.dx * static_cast<double>(i);

  while (g.t < T) {
    double vmax = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      const double ul = g.u[i == 0 ? 0 : i - 1];
      const double ur = g.u[i == n ? n - 1 : i];
      vmax = std::max({vmax, std::abs(flux.fu(x_if[i], ul)), std::abs(flux.fu(x_if[i], ur))});
      flux_at[i] = ul <= ur ? flux.f(x_if[i], std::clamp(0.0, ul, ur))
                            : std::max(flux.f(x_if[i], ul), flux.f(x_if[i], ur));
    }
    if (!std::isfinite(vmax)) throw std::runtime_error("fv_reference: non-finite wave speed");
    if (vmax == 0.0) {
      g.t = T;
      break;
    }
    double dt = cfl * g.dx / vmax;
    if (g.t + dt > T) dt = T - g.t;
    if (vmax * dt > cfl * g.dx * (1.0 + 1e-12)) throw std::runtime_error("fv_reference: CFL violated");
    const double r = dt / g.dx;
    for (std::size_t i = 0; i < n; ++i) g.u[i] -= r * (flux_at[i + 1] - flux_at[i]);
    g.t += dt;
    ++g.steps;
  }
  return g;
}

double l1_distance(const Sampler& a, const Sampler& b, Interval window, int resolution) {
  if (resolution < 1) throw std::invalid_argument("l1_distance: resolution must be positive");
  const double h = window.length() / resolution;
  double total = 0.0;
  for (int i = 0; i < resolution; ++i) {
    const double x = window.lo + (i + 0.5) * h;
    total += std::abs(a(x) - b(x));
  }
  return total * h;
}

DependenceResult domain_of_dependence_check(const FrontTracker& tracker, const Sampler& u0, const Sampler& v0,
                                            Interval window, int cells, double T, double R, double L,
                                            Boundary boundary) {
  DependenceResult r;
  r.L = L;
  r.cone = {-R - L * T, R + L * T};
  const double delta = tracker.delta();
  FrontField a = initial_fronts(quantize_initial(tracker.flux(), u0, delta, window, cells, boundary));
  FrontField b = initial_fronts(quantize_initial(tracker.flux(), v0, delta, window, cells, boundary));
  EventLog la, lb;
  tracker.advance_in_place(a, T, la);
  tracker.advance_in_place(b, T, lb);
  const Interval inner{-R, R};
  r.g_l1 = l1_g_distance(a, b, inner);
  r.u_l1 = l1_distance([&](double x) { return tracker.sample_u(a, x); },
                       [&](double x) { return tracker.sample_u(b, x); }, inner, 4096);
  return r;
}

std::vector<FluxConvergenceRow> flux_convergence_check(const Flux& flux, std::span<const double> deltas,
                                                       Interval x_box, double M, int nx, int nu) {
  const double alpha = flux.alpha();
  if (!(alpha > 0.0)) throw std::invalid_argument("flux_convergence_check: flux has no certified alpha");
  const std::vector<double> xg = linspace(x_box.lo, x_box.hi, nx);
  const std::vector<double> ug = linspace(-M, M, nu);
  const AssumptionReport audit = audit_assumptions(flux, x_box, {-M - 1.0, M + 1.0});

  std::vector<FluxConvergenceRow> rows;
  for (double delta : deltas) {
    const ApproxFlux af(flux, delta);
    FluxConvergenceRow row;
    row.delta = delta;
    double sup_dU = 0.0;
    for (double x : xg) {
      for (double u : ug) {
        row.err_f = std::max(row.err_f, std::abs(af.eval(x, u) - flux.f(x, u)));
        row.err_fx = std::max(row.err_fx, std::abs(af.dx(x, u) - flux.fx(x, u)));
        const std::int64_t z = af.cell(x, u);
        sup_dU = std::max({sup_dU, std::abs(af.bank().dx(z, x)), std::abs(af.bank().dx(z + 1, x))});
      }
    }
    const SpeedEnvelope env(flux, {-(M + delta), M + delta}, xg);
    const double root = std::sqrt(2.0 * delta / alpha);
    row.bound_f = root * (1.0 + env.lipschitz_L(M + delta)) + delta;
    row.bound_fx = root * (audit.max_abs_fxu + 3.0 * audit.max_fuu * sup_dU);
    rows.push_back(row);
  }
  return rows;
}

std::vector<InversionRow> inversion_bound_check(const Flux& flux, std::span<const double> deltas, Interval x_box,
                                                double M, int nx) {
  const double alpha = flux.alpha();
  if (!(alpha > 0.0)) throw std::invalid_argument("inversion_bound_check: flux has no certified alpha");
  const std::vector<double> xg = linspace(x_box.lo, x_box.hi, nx);
  // Level range whose profiles stay within |U| <= M everywhere on the box.
  double g_hi = std::numeric_limits<double>::infinity();
  double g_lo = -std::numeric_limits<double>::infinity();
  for (double x : xg) {
    g_hi = std::min(g_hi, flux.f(x, M));
    g_lo = std::max(g_lo, -flux.f(x, -M));
  }
  std::vector<InversionRow> rows;
  for (double delta : deltas) {
    const LevelBank bank(flux, delta);
    InversionRow row;
    row.delta = delta;
    row.worst_slack = std::numeric_limits<double>::infinity();
    const auto z_lo = static_cast<std::int64_t>(std::ceil(g_lo / delta));
    const auto z_hi = static_cast<std::int64_t>(std::floor(g_hi / delta));
    auto check = [&](std::int64_t z1, std::int64_t z2) {
      double gap = 0.0;
      for (double x : xg) gap = std::max(gap, std::abs(bank.u(z1, x) - bank.u(z2, x)));
      const double bound = inversion_gap_bound(delta * static_cast<double>(z1), delta * static_cast<double>(z2),
                                               alpha) + 10.0 * kTolInv;
      row.worst_slack = std::min(row.worst_slack, bound - gap);
      row.worst_gap = std::max(row.worst_gap, gap);
      ++row.pairs;
    };
    for (std::int64_t z = z_lo; z < z_hi; ++z) check(z, z + 1);
    for (std::int64_t z = 1; z <= std::min(-z_lo, z_hi); ++z) check(-z, z);
    rows.push_back(row);
  }
  return rows;
}

std::vector<LipschitzSample> time_lipschitz_check(const FrontTracker& tracker, const FrontField& initial, double T,
                                                  double L, std::uint64_t seed, int count, double slack) {
  CounterRng rng(seed, 0x11b);
  const double tv0 = tv_g(initial);
  std::vector<LipschitzSample> out;
  for (int i = 0; i < count; ++i) {
    LipschitzSample s;
    s.t = rng.uniform(0.0, 0.9 * T);
    s.h = rng.uniform(0.0, std::min(0.25 * T, T - s.t));
    FrontField a = initial;
    EventLog log;
    tracker.advance_in_place(a, s.t, log);
    FrontField b = a;
    tracker.advance_in_place(b, s.t + s.h, log);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const FrontField* f : {&a, &b}) {
      for (const Front& fr : f->fronts) {
        lo = std::min(lo, fr.position);
        hi = std::max(hi, fr.position);
      }
    }
    s.l1 = lo <= hi ? l1_g_distance(a, b, {lo - 1.0, hi + 1.0}) : 0.0;
    s.bound = L * tv0 * s.h + slack;
    out.push_back(s);
  }
  return out;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

}  // namespace fronttrack
