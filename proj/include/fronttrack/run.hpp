#pragma once

// Config-driven experiments: INI-style run configs, the run pipeline
// (audit, quantize, track, sample, check) and the CSV/JSON artifact writers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fronttrack/flux.hpp"
#include "fronttrack/tracker.hpp"
#include "fronttrack/validation.hpp"

namespace fronttrack {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct InitialSpec {
  // zero | step | piecewise | bump | sine | expr
  std::string profile = "zero";
  double left = 0.0;
  double right = 0.0;
  double at = 0.0;
  std::vector<double> values;
  std::vector<double> breaks;
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
  double wavenumber = 1.0;
  std::string expr;
  Boundary boundary = Boundary::zero;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 0;

  FluxFamily family = FluxFamily::homogeneous_burgers;
  FluxParams flux;

  InitialSpec initial;

  double delta = 0.1;
  Interval window{-1.0, 1.0};
  int cells = 400;
  // Tracking domain; when absent the window is padded by L * t_end + 1.
  bool has_domain = false;
  Interval domain;

  double t_end = 1.0;
  std::vector<double> outputs;

  std::vector<std::string> checks;
  int entropy_pairs = 20;
  int quad_points = 256;
  int fv_cells = 2000;
  double fv_cfl = 0.45;
  int lipschitz_samples = 20;
  int characteristic_steps = 10000;

  TrackerOptions tracker;
  double tol_fv_relative = 0.02;
  double tol_characteristic = 1e-10;
  double tol_lipschitz = 1e-8;

  int resolution = 401;

  // Flat "section.key = value" echo of everything above, in key order.
  std::map<std::string, std::string> echo() const;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text);

Sampler make_initial_sampler(const InitialSpec& spec);
Flux make_flux(const RunConfig& config);

struct RunResult {
  int exit_code = 0;
  std::string error;
  std::string manifest_json;
  FrontField initial;
  FrontField final;
  EventLog log;
  ValidationReport report;
  std::vector<std::filesystem::path> artifacts;
};

// Executes the pipeline and writes artifacts to `out_dir` (created if
// needed). Exit code 0 on success, 1 when a check fails, the audit rejects
// the flux or an invariant is breached.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

void emit_profile(const FrontTracker& tracker, const FrontField& field, Interval window, int resolution,
                  std::ostream& out);
void emit_events(const EventLog& log, std::ostream& out);
void emit_fronts(const FrontField& field, std::ostream& out);

// Shortest round-trip decimal form.
std::string format_double(double v);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fronttrack
