#pragma once

// Checks of the solver against the estimates it is supposed to satisfy, and
// an independent finite-volume scheme to compare against.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fronttrack/flux.hpp"
#include "fronttrack/riemann.hpp"
#include "fronttrack/tracker.hpp"

namespace fronttrack {

// phi(x, t) = b((x - xc) / rx) * b((t - tc) / rt), b(s) = exp(1 - 1 / (1 - s^2))
// on |s| < 1: smooth, non-negative, peak value 1.
struct TestFunction {
  double x_center = 0.0;
  double x_radius = 1.0;
  double t_center = 0.0;
  double t_radius = 1.0;

  double phi(double x, double t) const;
  double phi_t(double x, double t) const;
  double phi_x(double x, double t) const;
  Interval x_support() const { return {x_center - x_radius, x_center + x_radius}; }
  Interval t_support() const { return {t_center - t_radius, t_center + t_radius}; }
};

double bump(double s);
double bump_derivative(double s);

// Space-time solution queried one time row at a time. Rows are requested in
// increasing t by the quadratures below. `labels` identifies the smooth
// piece each sample lies in (equal labels: no discontinuity in between).
class SpaceTimeSolution {
 public:
  virtual ~SpaceTimeSolution() = default;
  virtual double initial(double x) const = 0;
  virtual void sample_row(double t, std::span<const double> xs, std::span<double> u,
                          std::span<std::int64_t> labels) const = 0;
};

// Closed-form solution. `label(x, t)` may mark its smooth pieces; without it
// the solution is treated as smooth.
class FunctionSolution final : public SpaceTimeSolution {
 public:
  FunctionSolution(std::function<double(double, double)> u, std::function<double(double)> u0,
                   std::function<std::int64_t(double, double)> label = {});
  double initial(double x) const override { return u0_(x); }
  void sample_row(double t, std::span<const double> xs, std::span<double> u,
                  std::span<std::int64_t> labels) const override;

 private:
  std::function<double(double, double)> u_;
  std::function<double(double)> u0_;
  std::function<std::int64_t(double, double)> label_;
};

// Front-tracking output evolved on demand from an initial field. Labels are
// the g levels. Not safe for concurrent use (it keeps an advancing cursor).
class FrontTrackingSolution final : public SpaceTimeSolution {
 public:
  FrontTrackingSolution(const FrontTracker& tracker, FrontField initial);
  double initial(double x) const override;
  void sample_row(double t, std::span<const double> xs, std::span<double> u,
                  std::span<std::int64_t> labels) const override;
  const FrontField& at(double t) const;

 private:
  const FrontTracker& tracker_;
  FrontField initial_;
  mutable FrontField cursor_;
};

struct QuadSpec {
  Interval x_box;
  Interval t_box;
  int nx = 512;
  int nt = 512;
};

// Flux pair entering an entropy inequality: F and its x-derivative.
struct EntropyFlux {
  std::function<double(double, double)> f;
  std::function<double(double, double)> fx;
};

EntropyFlux exact_entropy_flux(const Flux& flux);
EntropyFlux approx_entropy_flux(const ApproxFlux& af);

struct ResidualResult {
  double residual = 0.0;
  // Estimated midpoint-rule error: half a cell times the sampled jump of the
  // integrand wherever a row crosses a discontinuity, plus the second
  // difference term on smooth stretches.
  double tol_quad = 0.0;
  double k = 0.0;
  TestFunction phi;
};

// Solution sampled once on the midpoint grid; residuals for many (k, phi)
// pairs reuse the samples and the tabulated F(x, u).
class EntropyQuadrature {
 public:
  EntropyQuadrature(const SpaceTimeSolution& solution, EntropyFlux flux, QuadSpec quad);

  ResidualResult residual(double k, const TestFunction& phi) const;
  const QuadSpec& quad() const noexcept { return quad_; }
  double sup_abs_u() const noexcept { return sup_u_; }

 private:
  EntropyFlux flux_;
  QuadSpec quad_;
  std::vector<double> xs_, ts_;
  std::vector<double> u_;
  std::vector<std::int64_t> labels_;
  std::vector<double> f_u_;
  std::vector<double> u0_;
  double sup_u_ = 0.0;
};

// R = int int |u-k| phi_t + sgn(u-k)(f(x,u)-f(x,k)) phi_x - sgn(u-k) f_x(x,k) phi
//     + int |u0-k| phi(x, 0);   R >= 0 for entropy solutions.
ResidualResult kruzkov_residual(const SpaceTimeSolution& solution, const Flux& flux, double k,
                                const TestFunction& phi, const QuadSpec& quad);
ResidualResult approx_kruzkov_residual(const SpaceTimeSolution& solution, const ApproxFlux& af, double k,
                                       const TestFunction& phi, const QuadSpec& quad);

// Random (k, phi) pairs: k within the solution range padded by 10%, phi
// supported inside the x box and below its upper time, half of them
// straddling t = 0 so the initial-data term is exercised.
std::vector<std::pair<double, TestFunction>> entropy_battery_pairs(std::uint64_t seed, int count, double u_bound,
                                                                   const QuadSpec& quad);

struct CharacteristicResult {
  double drift = 0.0;
  double y_end = 0.0;
  double u_end = 0.0;
};

// RK4 on y' = f_u(y, z), z' = -f_x(y, z); returns the largest |f(y, z) - f(x0, u0)|.
CharacteristicResult characteristic_check(const Flux& flux, double x0, double u0, double T, int steps,
                                          Interval window = {-1e300, 1e300});

// Exact rarefaction from a generalised Riemann problem at x_bar: characteristics
// launched from x_bar with z(0) spanning [u_l, u_r]. Returns u(x, T) by linear
// interpolation between rays, the outer states elsewhere.
class RarefactionOracle {
 public:
  RarefactionOracle(const Flux& flux, double x_bar, GLevel g_l, GLevel g_r, double T, int rays = 64,
                    int steps = 2000);
  double operator()(double x) const;

 private:
  Flux flux_;
  GLevel g_l_, g_r_;
  std::vector<double> y_, z_;
};

struct FVGrid {
  Interval window;
  int cells = 0;
  double dx = 0.0;
  std::vector<double> u;
  double t = 0.0;
  double cfl = 0.0;
  std::int64_t steps = 0;

  double sample(double x) const;
  double x_center(int i) const { return window.lo + (i + 0.5) * dx; }
};

// First-order Godunov with the flux frozen at each interface.
FVGrid fv_reference(const Flux& flux, const Sampler& u0, Interval window, int cells, double T, double cfl = 0.45);

double l1_distance(const Sampler& a, const Sampler& b, Interval window, int resolution);

struct DependenceResult {
  double u_l1 = 0.0;
  double g_l1 = 0.0;
  double L = 0.0;
  Interval cone;
};

// Evolves u0 and v0 (equal on the cone [-R - L T, R + L T]) and compares the
// results on [-R, R] at time T.
DependenceResult domain_of_dependence_check(const FrontTracker& tracker, const Sampler& u0, const Sampler& v0,
                                            Interval window, int cells, double T, double R, double L,
                                            Boundary boundary = Boundary::zero);

struct FluxConvergenceRow {
  double delta = 0.0;
  double err_f = 0.0;
  double bound_f = 0.0;
  double err_fx = 0.0;
  double bound_fx = 0.0;
};

// Sup errors of f^delta and f^delta_x against f, f_x over x_box x [-M, M],
// with the bounds
//   sqrt(2 delta / alpha) (1 + max theta(+-(M + delta))) + delta
//   sqrt(2 delta / alpha) (|f_xu| + 3 |f_uu| sup |dU/dx|)
// where the upper bounds on f_xu, f_uu come from the audit of the box.
std::vector<FluxConvergenceRow> flux_convergence_check(const Flux& flux, std::span<const double> deltas,
                                                       Interval x_box, double M, int nx = 64, int nu = 129);

struct InversionRow {
  double delta = 0.0;
  double worst_slack = 0.0;  // min over pairs of bound - measured gap
  double worst_gap = 0.0;
  int pairs = 0;
};

// Uniform bound on sup_x |U[g1] - U[g2]| for adjacent levels on the delta
// grid and for opposite-sign pairs, over levels with |U| <= M.
std::vector<InversionRow> inversion_bound_check(const Flux& flux, std::span<const double> deltas, Interval x_box,
                                                double M, int nx = 129);

struct LipschitzSample {
  double t = 0.0;
  double h = 0.0;
  double l1 = 0.0;
  double bound = 0.0;
};

// int |g(., t + h) - g(., t)| dx against L TV(G0) h at random (t, h) pairs.
std::vector<LipschitzSample> time_lipschitz_check(const FrontTracker& tracker, const FrontField& initial, double T,
                                                  double L, std::uint64_t seed, int count, double slack = 1e-8);

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
  std::map<std::string, std::string> params;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  void add(CheckResult c) { checks.push_back(std::move(c)); }
};

}  // namespace fronttrack
