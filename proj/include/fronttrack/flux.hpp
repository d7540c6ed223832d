#pragma once

// Heterogeneous flux f(x, u) for u_t + f(x, u)_x = 0, the built-in families,
// and the sampling audit of the structural assumptions the solver relies on:
//
//   S0   f(x, 0) = f_u(x, 0) = 0 for every x
//   C2   f is twice continuously differentiable
//   UC   f_uu >= alpha > 0
//   FSP  theta(v) = sup_x |f_u(x, v)| is finite and continuous
//
// S0 and UC together give f(x, u) >= alpha u^2 / 2.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fronttrack/expr.hpp"

namespace fronttrack {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

enum class FluxFamily { homogeneous_burgers, modulated_burgers, custom_expr };

std::string to_string(FluxFamily family);
FluxFamily flux_family_from_string(const std::string& name);

// Parameters for the built-in families. Modulated Burgers uses
// f(x, u) = a(x) u^2 / 2 with a(x) = mean + amplitude * sin(wavenumber * x + phase).
struct FluxParams {
  double mean = 1.0;
  double amplitude = 0.0;
  double wavenumber = 1.0;
  double phase = 0.0;
  std::string expr;  // custom_expr only
};

namespace detail {

class FluxModel {
 public:
  virtual ~FluxModel() = default;
  virtual double f(double x, double u) const = 0;
  virtual double fu(double x, double u) const = 0;
  virtual double fx(double x, double u) const = 0;
  virtual double fuu(double x, double u) const = 0;
  virtual double fxu(double x, double u) const = 0;
  virtual std::string describe() const = 0;
};

}  // namespace detail

// Immutable handle to a flux model plus its certified convexity constant.
// Copies share the model; concurrent evaluation is safe.
class Flux {
 public:
  Flux(std::shared_ptr<const detail::FluxModel> model, FluxFamily family, double alpha);

  double f(double x, double u) const { return model_->f(x, u); }
  double fu(double x, double u) const { return model_->fu(x, u); }
  double fx(double x, double u) const { return model_->fx(x, u); }
  double fuu(double x, double u) const { return model_->fuu(x, u); }
  double fxu(double x, double u) const { return model_->fxu(x, u); }

  // Lower bound on f_uu. Zero means "not yet certified" (expression fluxes
  // before an audit); the stationary solver refuses such fluxes.
  double alpha() const noexcept { return alpha_; }
  FluxFamily family() const noexcept { return family_; }
  // Built-in families evaluate closed-form derivatives.
  bool exact() const noexcept { return family_ != FluxFamily::custom_expr; }
  std::string describe() const { return model_->describe(); }

  Flux with_alpha(double alpha) const;

 private:
  std::shared_ptr<const detail::FluxModel> model_;
  FluxFamily family_;
  double alpha_;
};

Flux make_builtin_flux(FluxFamily family, const FluxParams& params = {});
Flux make_expr_flux(const dsl::FluxExpr& expr);
Flux make_expr_flux(const std::string& src);

enum class Assumption { S0, C2, UC, FSP };
std::string to_string(Assumption a);

struct Violation {
  Assumption assumption;
  double x = 0.0;
  double u = 0.0;
  double observed = 0.0;
};

struct SampleCounts {
  int x_samples = 0;
  int u_samples = 0;
  int evaluations = 0;
};

struct AssumptionReport {
  bool passed = true;
  std::vector<Violation> violations;
  double certified_alpha = 0.0;
  // Sampled extrema over the box; the error estimates for the approximate
  // flux need upper bounds the assumptions themselves do not provide.
  double min_fuu = 0.0;
  double max_fuu = 0.0;
  double max_abs_fxu = 0.0;
  double max_abs_fx = 0.0;
  double max_abs_fu = 0.0;
  double safety_factor = 1.0;
  double tol_s0 = 0.0;
  Interval x_box;
  Interval u_box;
  SampleCounts sample_counts;
};

struct AuditGrid {
  int nx = 64;
  int nu = 64;
};

inline constexpr double kTolAuditExact = 1e-10;
inline constexpr double kTolAuditExpr = 1e-7;
inline constexpr double kExprAlphaSafety = 0.99;

AssumptionReport audit_assumptions(const Flux& flux, Interval x_box, Interval u_box, AuditGrid grid = {});

// Returns `flux` with alpha taken from a passed report. Throws if the
// report failed.
Flux certify(const Flux& flux, const AssumptionReport& report);

// theta(v) = max over the x grid of |f_u(x, v)|, tabulated on a v grid and
// linearly interpolated inside it. Outside the tabulated range theta is
// evaluated directly over the x grid.
class SpeedEnvelope {
 public:
  SpeedEnvelope(Flux flux, std::vector<double> v_grid, std::vector<double> x_grid);

  double theta(double v) const;
  double lipschitz_L(double u_bound) const;

  std::span<const double> v_grid() const noexcept { return v_grid_; }
  std::span<const double> values() const noexcept { return theta_; }

 private:
  double direct(double v) const;

  Flux flux_;
  std::vector<double> v_grid_;
  std::vector<double> x_grid_;
  std::vector<double> theta_;
};

SpeedEnvelope speed_envelope(const Flux& flux, std::vector<double> v_grid, std::vector<double> x_grid);

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace fronttrack
