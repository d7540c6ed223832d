#include "fronttrack/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fronttrack {

namespace {

class HomogeneousBurgers final : public detail::FluxModel {
 public:
  double f(double, double u) const override { return 0.5 * u * u; }
  double fu(double, double u) const override { return u; }
  double fx(double, double) const override { return 0.0; }
  double fuu(double, double) const override { return 1.0; }
  double fxu(double, double) const override { return 0.0; }
  std::string describe() const override { return "u^2/2"; }
};

class ModulatedBurgers final : public detail::FluxModel {
 public:
  explicit ModulatedBurgers(const FluxParams& p)
      : mean_(p.mean), amplitude_(p.amplitude), k_(p.wavenumber), phase_(p.phase) {}

  double a(double x) const { return mean_ + amplitude_ * std::sin(k_ * x + phase_); }
  double da(double x) const { return amplitude_ * k_ * std::cos(k_ * x + phase_); }

  double f(double x, double u) const override { return 0.5 * a(x) * u * u; }
  double fu(double x, double u) const override { return a(x) * u; }
  double fx(double x, double u) const override { return 0.5 * da(x) * u * u; }
  double fuu(double x, double) const override { return a(x); }
  double fxu(double x, double u) const override { return da(x) * u; }

  std::string describe() const override {
    std::ostringstream s;
    s << "(" << mean_ << " + " << amplitude_ << "*sin(" << k_ << "*x + " << phase_ << "))*u^2/2";
    return s.str();
  }

 private:
  double mean_, amplitude_, k_, phase_;
};

class ExprFlux final : public detail::FluxModel {
 public:
  explicit ExprFlux(dsl::FluxExpr f)
      : f_(std::move(f)),
        fu_(f_.differentiate(dsl::Variable::u)),
        fx_(f_.differentiate(dsl::Variable::x)),
        fuu_(fu_.differentiate(dsl::Variable::u)),
        fxu_(fu_.differentiate(dsl::Variable::x)) {}

  double f(double x, double u) const override { return f_.evaluate(x, u); }
  double fu(double x, double u) const override { return fu_.evaluate(x, u); }
  double fx(double x, double u) const override { return fx_.evaluate(x, u); }
  double fuu(double x, double u) const override { return fuu_.evaluate(x, u); }
  double fxu(double x, double u) const override { return fxu_.evaluate(x, u); }
  std::string describe() const override { return f_.to_string(); }

 private:
  dsl::FluxExpr f_, fu_, fx_, fuu_, fxu_;
};

}  // namespace

std::string to_string(FluxFamily family) {
  switch (family) {
    case FluxFamily::homogeneous_burgers: return "homogeneous_burgers";
    case FluxFamily::modulated_burgers: return "modulated_burgers";
    case FluxFamily::custom_expr: return "custom_expr";
  }
  return "unknown";
}

FluxFamily flux_family_from_string(const std::string& name) {
  if (name == "homogeneous_burgers" || name == "burgers") return FluxFamily::homogeneous_burgers;
  if (name == "modulated_burgers") return FluxFamily::modulated_burgers;
  if (name == "custom_expr" || name == "expr") return FluxFamily::custom_expr;
  throw std::invalid_argument("unknown flux family '" + name + "'");
}

std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::S0: return "S0";
    case Assumption::C2: return "C2";
    case Assumption::UC: return "UC";
    case Assumption::FSP: return "FSP";
  }
  return "?";
}

Flux::Flux(std::shared_ptr<const detail::FluxModel> model, FluxFamily family, double alpha)
    : model_(std::move(model)), family_(family), alpha_(alpha) {
  if (!model_) throw std::invalid_argument("Flux: null model");
}

Flux Flux::with_alpha(double alpha) const { return Flux(model_, family_, alpha); }

Flux make_builtin_flux(FluxFamily family, const FluxParams& params) {
  switch (family) {
    case FluxFamily::homogeneous_burgers:
      return Flux(std::make_shared<HomogeneousBurgers>(), family, 1.0);
    case FluxFamily::modulated_burgers: {
      const double a_min = params.mean - std::abs(params.amplitude);
      if (!std::isfinite(params.mean) || !std::isfinite(params.amplitude) || !std::isfinite(params.wavenumber) ||
          !std::isfinite(params.phase)) {
        throw std::invalid_argument("modulated_burgers: non-finite parameter");
      }
      if (!(a_min > 0.0)) {
        std::ostringstream msg;
        msg << "modulated_burgers: a_min = mean - |amplitude| = " << a_min << " must be positive";
        throw std::invalid_argument(msg.str());
      }
      return Flux(std::make_shared<ModulatedBurgers>(params), family, a_min);
    }
    case FluxFamily::custom_expr:
      if (params.expr.empty()) throw std::invalid_argument("custom_expr: empty expression");
      return make_expr_flux(params.expr);
  }
  throw std::invalid_argument("unknown flux family");
}

Flux make_expr_flux(const dsl::FluxExpr& expr) {
  for (auto v : expr.free_variables()) {
    if (v != dsl::Variable::x && v != dsl::Variable::u) throw std::invalid_argument("flux expression: bad variable");
  }
  return Flux(std::make_shared<ExprFlux>(expr), FluxFamily::custom_expr, 0.0);
}

Flux make_expr_flux(const std::string& src) { return make_expr_flux(dsl::parse(src)); }

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be positive");
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + step * i;
  v.back() = hi;
  return v;
}

AssumptionReport audit_assumptions(const Flux& flux, Interval x_box, Interval u_box, AuditGrid grid) {
  if (!(x_box.hi > x_box.lo) || !(u_box.hi > u_box.lo)) throw std::invalid_argument("audit: degenerate box");
  if (grid.nx < 16 || grid.nu < 16) throw std::invalid_argument("audit: need at least 16 samples per axis");

  AssumptionReport rep;
  rep.x_box = x_box;
  rep.u_box = u_box;
  rep.tol_s0 = flux.exact() ? kTolAuditExact : kTolAuditExpr;
  rep.safety_factor = flux.exact() ? 1.0 : kExprAlphaSafety;

  const auto xs = linspace(x_box.lo, x_box.hi, grid.nx);
  auto us = linspace(u_box.lo, u_box.hi, grid.nu);
  rep.sample_counts.x_samples = grid.nx;
  rep.sample_counts.u_samples = grid.nu;

  // Worst witness per assumption.
  struct Worst {
    bool hit = false;
    Violation v;
    double severity = -1.0;
  };
  Worst worst[4];
  auto record = [&](Assumption a, double x, double u, double observed, double severity) {
    Worst& w = worst[static_cast<int>(a)];
    if (!w.hit || severity > w.severity) {
      w.hit = true;
      w.severity = severity;
      w.v = Violation{a, x, u, observed};
    }
  };

  int evals = 0;
  for (double x : xs) {
    const double f0 = flux.f(x, 0.0);
    const double fu0 = flux.fu(x, 0.0);
    evals += 2;
    const double dev = std::max(std::abs(f0), std::abs(fu0));
    if (!(dev <= rep.tol_s0)) record(Assumption::S0, x, 0.0, std::abs(f0) >= std::abs(fu0) ? f0 : fu0, dev);
  }

  double min_fuu = std::numeric_limits<double>::infinity();
  double max_fuu = -std::numeric_limits<double>::infinity();
  const double h = 1e-4;
  const double alpha_floor = flux.exact() ? flux.alpha() * (1.0 - 1e-12) : 0.0;
  for (double u : us) {
    double theta = 0.0;
    for (double x : xs) {
      const double f = flux.f(x, u);
      const double fu = flux.fu(x, u);
      const double fx = flux.fx(x, u);
      const double fuu = flux.fuu(x, u);
      const double fxu = flux.fxu(x, u);
      evals += 5;
      if (!std::isfinite(f) || !std::isfinite(fu) || !std::isfinite(fx) || !std::isfinite(fuu) ||
          !std::isfinite(fxu)) {
        record(Assumption::C2, x, u, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::max());
        continue;
      }
      // Derivative consistency against central differences.
      const double fd_u = (flux.f(x, u + h) - flux.f(x, u - h)) / (2 * h);
      const double fd_x = (flux.f(x + h, u) - flux.f(x - h, u)) / (2 * h);
      evals += 4;
      const double scale = 1.0 + std::abs(f) + std::abs(fu) + std::abs(fx) + std::abs(fuu);
      const double mismatch = std::max(std::abs(fd_u - fu), std::abs(fd_x - fx));
      if (mismatch > 1e-6 * scale) record(Assumption::C2, x, u, mismatch, mismatch / scale);

      min_fuu = std::min(min_fuu, fuu);
      max_fuu = std::max(max_fuu, fuu);
      rep.max_abs_fxu = std::max(rep.max_abs_fxu, std::abs(fxu));
      rep.max_abs_fx = std::max(rep.max_abs_fx, std::abs(fx));
      if (!(fuu > alpha_floor) || fuu <= 0.0) record(Assumption::UC, x, u, fuu, alpha_floor - fuu);
      theta = std::max(theta, std::abs(fu));
    }
    if (!std::isfinite(theta)) record(Assumption::FSP, 0.0, u, theta, std::numeric_limits<double>::max());
    rep.max_abs_fu = std::max(rep.max_abs_fu, theta);
  }

  rep.min_fuu = min_fuu;
  rep.max_fuu = max_fuu;
  rep.certified_alpha = min_fuu > 0.0 ? min_fuu * rep.safety_factor : 0.0;
  if (flux.exact()) rep.certified_alpha = std::min(rep.certified_alpha, std::max(flux.alpha(), 0.0));
  rep.sample_counts.evaluations = evals;

  for (const Worst& w : worst) {
    if (w.hit) rep.violations.push_back(w.v);
  }
  rep.passed = rep.violations.empty();
  return rep;
}

Flux certify(const Flux& flux, const AssumptionReport& report) {
  if (!report.passed) throw std::invalid_argument("certify: audit reported violations");
  if (!(report.certified_alpha > 0.0)) throw std::invalid_argument("certify: non-positive alpha");
  if (flux.exact()) return flux;
  return flux.with_alpha(report.certified_alpha);
}

SpeedEnvelope::SpeedEnvelope(Flux flux, std::vector<double> v_grid, std::vector<double> x_grid)
    : flux_(std::move(flux)), v_grid_(std::move(v_grid)), x_grid_(std::move(x_grid)) {
  if (v_grid_.empty() || x_grid_.empty()) throw std::invalid_argument("speed_envelope: empty grid");
  std::sort(v_grid_.begin(), v_grid_.end());
  v_grid_.erase(std::unique(v_grid_.begin(), v_grid_.end()), v_grid_.end());
  theta_.reserve(v_grid_.size());
  for (double v : v_grid_) {
    double t = direct(v);
    if (!std::isfinite(t)) throw std::domain_error("speed_envelope: theta is not finite");
    theta_.push_back(t);
  }
}

double SpeedEnvelope::direct(double v) const {
  double t = 0.0;
  for (double x : x_grid_) t = std::max(t, std::abs(flux_.fu(x, v)));
  return t;
}

double SpeedEnvelope::theta(double v) const {
  if (v < v_grid_.front() || v > v_grid_.back()) return direct(v);
  auto it = std::lower_bound(v_grid_.begin(), v_grid_.end(), v);
  const auto i = static_cast<std::size_t>(it - v_grid_.begin());
  if (*it == v) return theta_[i];
  const double w = (v - v_grid_[i - 1]) / (v_grid_[i] - v_grid_[i - 1]);
  return (1.0 - w) * theta_[i - 1] + w * theta_[i];
}

double SpeedEnvelope::lipschitz_L(double u_bound) const {
  const double m = std::abs(u_bound);
  return std::max(theta(m), theta(-m));
}

SpeedEnvelope speed_envelope(const Flux& flux, std::vector<double> v_grid, std::vector<double> x_grid) {
  return SpeedEnvelope(flux, std::move(v_grid), std::move(x_grid));
}

}  // namespace fronttrack
