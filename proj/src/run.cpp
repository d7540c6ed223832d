#include "fronttrack/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

namespace fronttrack {

namespace pt = boost::property_tree;
using json = nlohmann::ordered_json;

namespace {

std::string config_message(const std::string& field, const std::string& message, int line) {
  std::ostringstream s;
  if (line > 0) s << "line " << line << ": ";
  if (!field.empty()) s << field << ": ";
  s << message;
  return s.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Known keys per section; anything else is a typo worth reporting.
const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"name", "seed"}},
      {"flux", {"family", "mean", "amplitude", "wavenumber", "phase", "expr"}},
      {"initial",
       {"profile", "left", "right", "at", "values", "breaks", "amplitude", "center", "width", "wavenumber", "expr",
        "boundary"}},
      {"grid", {"delta", "window", "cells", "domain"}},
      {"time", {"t_end", "outputs", "h_ode"}},
      {"checks",
       {"list", "entropy_pairs", "quad_points", "fv_cells", "fv_cfl", "lipschitz_samples", "characteristic_steps"}},
      {"tolerances", {"tol_event", "tol_pos", "fv_relative", "characteristic", "lipschitz"}},
      {"output", {"resolution"}},
  };
  return keys;
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> names{"tvd",       "admissibility", "entropy",          "lipschitz",
                                           "characteristic", "fv",      "flux_convergence", "inversion"};
  return names;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::map<std::string, int> lines) : tree_(tree), lines_(std::move(lines)) {}

  int line(const std::string& field) const {
    const auto it = lines_.find(field);
    return it == lines_.end() ? 0 : it->second;
  }

  std::optional<std::string> raw(const std::string& field) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(field, '.'))) return trim(*v);
    return std::nullopt;
  }

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw ConfigError(field, message, line(field));
  }

  double number(const std::string& field, const std::string& text) const {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) fail(field, "expected a number, got '" + text + "'");
    return v;
  }

  void get(const std::string& field, double& out) const {
    if (auto v = raw(field)) out = number(field, *v);
  }

  void get(const std::string& field, int& out) const {
    if (auto v = raw(field)) {
      const double d = number(field, *v);
      if (d != std::floor(d) || std::abs(d) > 1e9) fail(field, "expected an integer, got '" + *v + "'");
      out = static_cast<int>(d);
    }
  }

  void get(const std::string& field, std::uint64_t& out) const {
    if (auto v = raw(field)) {
      const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
      if (ec != std::errc() || ptr != v->data() + v->size()) fail(field, "expected a non-negative integer");
    }
  }

  void get(const std::string& field, std::string& out) const {
    if (auto v = raw(field)) out = *v;
  }

  std::vector<std::string> items(const std::string& text) const {
    std::vector<std::string> out;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  void get(const std::string& field, std::vector<double>& out) const {
    if (auto v = raw(field)) {
      out.clear();
      for (const auto& item : items(*v)) out.push_back(number(field, item));
    }
  }

  void get(const std::string& field, std::vector<std::string>& out) const {
    if (auto v = raw(field)) out = items(*v);
  }

  void get(const std::string& field, Interval& out) const {
    if (auto v = raw(field)) {
      const auto parts = items(*v);
      if (parts.size() != 2) fail(field, "expected 'lo, hi'");
      out = {number(field, parts[0]), number(field, parts[1])};
      if (!(out.hi > out.lo)) fail(field, "interval must satisfy lo < hi");
    }
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, int> lines_;
};

std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    lines.emplace(section + "." + trim(line.substr(0, eq)), n);
  }
  return lines;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message, int line)
    : std::runtime_error(config_message(field, message, line)), field_(std::move(field)), line_(line) {}

RunConfig parse_config_string(const std::string& text) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("", e.message(), static_cast<int>(e.line()));
    }
  }
  const Reader r(tree, key_lines(text));

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) r.fail(section, "key outside of any section");
      r.fail(section, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) r.fail(section + "." + key, "unknown key");
    }
  }

  RunConfig c;
  r.get("run.name", c.name);
  r.get("run.seed", c.seed);

  std::string family = to_string(c.family);
  r.get("flux.family", family);
  try {
    c.family = flux_family_from_string(family);
  } catch (const std::exception& e) {
    r.fail("flux.family", e.what());
  }
  r.get("flux.mean", c.flux.mean);
  r.get("flux.amplitude", c.flux.amplitude);
  r.get("flux.wavenumber", c.flux.wavenumber);
  r.get("flux.phase", c.flux.phase);
  r.get("flux.expr", c.flux.expr);
  if (c.family == FluxFamily::custom_expr && c.flux.expr.empty()) r.fail("flux.expr", "required for custom_expr");
  try {
    (void)make_builtin_flux(c.family, c.flux);
  } catch (const dsl::ParseError& e) {
    r.fail("flux.expr", e.what());
  } catch (const std::exception& e) {
    r.fail("flux", e.what());
  }

  InitialSpec& ini = c.initial;
  r.get("initial.profile", ini.profile);
  r.get("initial.left", ini.left);
  r.get("initial.right", ini.right);
  r.get("initial.at", ini.at);
  r.get("initial.values", ini.values);
  r.get("initial.breaks", ini.breaks);
  r.get("initial.amplitude", ini.amplitude);
  r.get("initial.center", ini.center);
  r.get("initial.width", ini.width);
  r.get("initial.wavenumber", ini.wavenumber);
  r.get("initial.expr", ini.expr);
  std::string boundary = to_string(ini.boundary);
  r.get("initial.boundary", boundary);
  try {
    ini.boundary = boundary_from_string(boundary);
  } catch (const std::exception& e) {
    r.fail("initial.boundary", e.what());
  }
  static const std::set<std::string> profiles{"zero", "step", "piecewise", "bump", "sine", "expr"};
  if (!profiles.contains(ini.profile)) r.fail("initial.profile", "unknown profile '" + ini.profile + "'");
  if (ini.profile == "piecewise") {
    if (ini.values.size() != ini.breaks.size() + 1) r.fail("initial.values", "needs one more value than breaks");
    if (!std::is_sorted(ini.breaks.begin(), ini.breaks.end())) r.fail("initial.breaks", "must be increasing");
  }
  if (ini.profile == "bump" && !(ini.width > 0.0)) r.fail("initial.width", "must be positive");
  if (ini.profile == "expr") {
    if (ini.expr.empty()) r.fail("initial.expr", "required for profile = expr");
    try {
      const auto e = dsl::parse(ini.expr);
      if (e.free_variables().contains(dsl::Variable::u)) r.fail("initial.expr", "may only depend on x");
    } catch (const dsl::ParseError& e) {
      r.fail("initial.expr", e.what());
    }
  }

  r.get("grid.delta", c.delta);
  if (!(c.delta > 0.0)) r.fail("grid.delta", "must be positive");
  r.get("grid.window", c.window);
  r.get("grid.cells", c.cells);
  if (c.cells < 1) r.fail("grid.cells", "must be positive");
  if (r.raw("grid.domain")) {
    r.get("grid.domain", c.domain);
    c.has_domain = true;
    if (c.domain.lo > c.window.lo || c.domain.hi < c.window.hi) r.fail("grid.domain", "must contain the window");
  }

  r.get("time.t_end", c.t_end);
  if (!(c.t_end >= 0.0)) r.fail("time.t_end", "must be non-negative");
  r.get("time.outputs", c.outputs);
  if (c.outputs.empty()) c.outputs = {0.0, c.t_end};
  if (!std::is_sorted(c.outputs.begin(), c.outputs.end())) r.fail("time.outputs", "must be sorted");
  if (c.outputs.front() < 0.0 || c.outputs.back() > c.t_end) r.fail("time.outputs", "must lie in [0, t_end]");
  r.get("time.h_ode", c.tracker.h_ode);
  if (!(c.tracker.h_ode > 0.0)) r.fail("time.h_ode", "must be positive");

  r.get("checks.list", c.checks);
  for (const auto& name : c.checks) {
    if (!known_checks().contains(name)) r.fail("checks.list", "unknown check '" + name + "'");
  }
  r.get("checks.entropy_pairs", c.entropy_pairs);
  r.get("checks.quad_points", c.quad_points);
  if (c.quad_points < 16) r.fail("checks.quad_points", "must be at least 16");
  r.get("checks.fv_cells", c.fv_cells);
  r.get("checks.fv_cfl", c.fv_cfl);
  if (!(c.fv_cfl > 0.0 && c.fv_cfl <= 0.45)) r.fail("checks.fv_cfl", "must lie in (0, 0.45]");
  r.get("checks.lipschitz_samples", c.lipschitz_samples);
  r.get("checks.characteristic_steps", c.characteristic_steps);

  r.get("tolerances.tol_event", c.tracker.tol_event);
  r.get("tolerances.tol_pos", c.tracker.tol_pos);
  r.get("tolerances.fv_relative", c.tol_fv_relative);
  r.get("tolerances.characteristic", c.tol_characteristic);
  r.get("tolerances.lipschitz", c.tol_lipschitz);

  r.get("output.resolution", c.resolution);
  if (c.resolution < 2) r.fail("output.resolution", "must be at least 2");
  return c;
}

RunConfig parse_config(std::istream& in) {
  std::stringstream s;
  s << in.rdbuf();
  return parse_config_string(s.str());
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  return parse_config(in);
}

std::map<std::string, std::string> RunConfig::echo() const {
  auto list = [](const auto& values) {
    std::string out;
    for (const auto& v : values) {
      if (!out.empty()) out += ", ";
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
        out += format_double(v);
      } else {
        out += v;
      }
    }
    return out;
  };
  auto interval = [](Interval i) { return format_double(i.lo) + ", " + format_double(i.hi); };
  std::map<std::string, std::string> e{
      {"run.name", name},
      {"run.seed", std::to_string(seed)},
      {"flux.family", to_string(family)},
      {"flux.mean", format_double(flux.mean)},
      {"flux.amplitude", format_double(flux.amplitude)},
      {"flux.wavenumber", format_double(flux.wavenumber)},
      {"flux.phase", format_double(flux.phase)},
      {"flux.expr", flux.expr},
      {"initial.profile", initial.profile},
      {"initial.left", format_double(initial.left)},
      {"initial.right", format_double(initial.right)},
      {"initial.at", format_double(initial.at)},
      {"initial.values", list(initial.values)},
      {"initial.breaks", list(initial.breaks)},
      {"initial.amplitude", format_double(initial.amplitude)},
      {"initial.center", format_double(initial.center)},
      {"initial.width", format_double(initial.width)},
      {"initial.wavenumber", format_double(initial.wavenumber)},
      {"initial.expr", initial.expr},
      {"initial.boundary", to_string(initial.boundary)},
      {"grid.delta", format_double(delta)},
      {"grid.window", interval(window)},
      {"grid.cells", std::to_string(cells)},
      {"grid.domain", has_domain ? interval(domain) : ""},
      {"time.t_end", format_double(t_end)},
      {"time.outputs", list(outputs)},
      {"time.h_ode", format_double(tracker.h_ode)},
      {"checks.list", list(checks)},
      {"checks.entropy_pairs", std::to_string(entropy_pairs)},
      {"checks.quad_points", std::to_string(quad_points)},
      {"checks.fv_cells", std::to_string(fv_cells)},
      {"checks.fv_cfl", format_double(fv_cfl)},
      {"checks.lipschitz_samples", std::to_string(lipschitz_samples)},
      {"checks.characteristic_steps", std::to_string(characteristic_steps)},
      {"tolerances.tol_event", format_double(tracker.tol_event)},
      {"tolerances.tol_pos", format_double(tracker.tol_pos)},
      {"tolerances.fv_relative", format_double(tol_fv_relative)},
      {"tolerances.characteristic", format_double(tol_characteristic)},
      {"tolerances.lipschitz", format_double(tol_lipschitz)},
      {"output.resolution", std::to_string(resolution)},
  };
  return e;
}

Sampler make_initial_sampler(const InitialSpec& s) {
  if (s.profile == "zero") return [](double) { return 0.0; };
  if (s.profile == "step") {
    return [l = s.left, r = s.right, at = s.at](double x) { return x < at ? l : r; };
  }
  if (s.profile == "piecewise") {
    return [values = s.values, breaks = s.breaks](double x) {
      const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
      return values[static_cast<std::size_t>(it - breaks.begin())];
    };
  }
  if (s.profile == "bump") {
    return [a = s.amplitude, c = s.center, w = s.width](double x) { return a * bump((x - c) / w); };
  }
  if (s.profile == "sine") {
    return [a = s.amplitude, k = s.wavenumber](double x) { return a * std::sin(k * x); };
  }
  if (s.profile == "expr") {
    return [e = dsl::parse(s.expr)](double x) { return e.evaluate(x, 0.0); };
  }
  throw std::invalid_argument("unknown initial profile '" + s.profile + "'");
}

Flux make_flux(const RunConfig& config) { return make_builtin_flux(config.family, config.flux); }

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void emit_profile(const FrontTracker& tracker, const FrontField& field, Interval window, int resolution,
                  std::ostream& out) {
  out << "x,u,g\n";
  for (double x : linspace(window.lo, window.hi, resolution)) {
    const std::int64_t z = sample_z(field, x);
    out << format_double(x) << ',' << format_double(tracker.bank().u(z, x)) << ','
        << format_double(field.delta * static_cast<double>(z)) << '\n';
  }
}

void emit_events(const EventLog& log, std::ostream& out) {
  out << "t,x,consumed_ids,produced_id,tv_before,tv_after\n";
  for (const Event& e : log.events) {
    out << format_double(e.time) << ',' << format_double(e.position) << ',';
    for (std::size_t i = 0; i < e.consumed.size(); ++i) out << (i ? ";" : "") << e.consumed[i];
    out << ',';
    if (e.produced) out << *e.produced;
    out << ',' << format_double(e.tv_before) << ',' << format_double(e.tv_after) << '\n';
  }
}

void emit_fronts(const FrontField& field, std::ostream& out) {
  out << "id,position,z_left,z_right,g_left,g_right,kind,birth_time\n";
  for (const Front& f : field.fronts) {
    out << f.id << ',' << format_double(f.position) << ',' << f.z_left << ',' << f.z_right << ','
        << format_double(f.g_left(field.delta).value) << ',' << format_double(f.g_right(field.delta).value) << ','
        << to_string(f.kind) << ',' << format_double(f.birth_time) << '\n';
  }
}

namespace {

json audit_json(const AssumptionReport& a) {
  json violations = json::array();
  for (const Violation& v : a.violations) {
    violations.push_back({{"assumption", to_string(v.assumption)}, {"x", v.x}, {"u", v.u}, {"observed", v.observed}});
  }
  return {{"passed", a.passed},
          {"violations", violations},
          {"certified_alpha", a.certified_alpha},
          {"min_fuu", a.min_fuu},
          {"max_fuu", a.max_fuu},
          {"max_abs_fxu", a.max_abs_fxu},
          {"max_abs_fx", a.max_abs_fx},
          {"max_abs_fu", a.max_abs_fu},
          {"safety_factor", a.safety_factor},
          {"tol_s0", a.tol_s0},
          {"x_box", {a.x_box.lo, a.x_box.hi}},
          {"u_box", {a.u_box.lo, a.u_box.hi}},
          {"sample_counts",
           {{"x", a.sample_counts.x_samples},
            {"u", a.sample_counts.u_samples},
            {"evaluations", a.sample_counts.evaluations}}}};
}

CheckResult make_check(std::string name, double measured, double bound, bool passed,
                       std::map<std::string, std::string> params = {}) {
  return CheckResult{std::move(name), measured, bound, passed, std::move(params)};
}

void write_file(const std::filesystem::path& path, const std::string& text, RunResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  result.artifacts.push_back(path);
}

struct Context {
  const RunConfig& config;
  const Flux& flux;
  const Sampler& u0;
  const FrontTracker& tracker;
  const FrontField& initial;
  const FrontField& final;
  const EventLog& log;
  double sup_u;
  double L;
};

CheckResult run_check(const std::string& name, const Context& ctx) {
  const RunConfig& c = ctx.config;
  if (name == "tvd") {
    std::int64_t worst = 0;
    std::int64_t prev = tv_units(ctx.initial);
    for (const Event& e : ctx.log.events) {
      worst = std::max({worst, e.tv_after_units - e.tv_before_units, e.tv_after_units - prev});
      prev = e.tv_after_units;
    }
    worst = std::max(worst, tv_units(ctx.final) - tv_units(ctx.initial));
    return make_check(name, static_cast<double>(worst) * c.delta, 0.0, worst <= 0,
                      {{"measure", "largest increase of TV(g) across events"}});
  }
  if (name == "admissibility") {
    std::int64_t worst = 0;
    for (const FrontField* f : {&ctx.initial, &ctx.final}) {
      for (const Front& fr : f->fronts) worst = std::max(worst, fr.z_right - fr.z_left);
    }
    const auto events = static_cast<std::int64_t>(ctx.log.events.size());
    const auto fronts0 = static_cast<std::int64_t>(ctx.initial.fronts.size());
    const bool ok = worst <= 1 && (fronts0 == 0 ? events == 0 : events <= fronts0 - 1);
    return make_check(name, static_cast<double>(worst) * c.delta, c.delta, ok,
                      {{"measure", "largest upward jump of g"},
                       {"events", std::to_string(events)},
                       {"initial_fronts", std::to_string(fronts0)}});
  }
  if (name == "entropy") {
    const QuadSpec quad{c.window, {0.0, std::max(c.t_end, 1e-12)}, c.quad_points, c.quad_points};
    const FrontTrackingSolution sol(ctx.tracker, ctx.initial);
    const ApproxFlux af(ctx.flux, c.delta);
    const EntropyQuadrature q(sol, approx_entropy_flux(af), quad);
    double worst = std::numeric_limits<double>::infinity();
    double tol_max = 0.0;
    for (const auto& [k, phi] : entropy_battery_pairs(c.seed, c.entropy_pairs, q.sup_abs_u(), quad)) {
      const ResidualResult r = q.residual(k, phi);
      worst = std::min(worst, r.residual + r.tol_quad);
      tol_max = std::max(tol_max, r.tol_quad);
    }
    if (c.entropy_pairs == 0) worst = 0.0;
    return make_check(name, worst, 0.0, worst >= 0.0,
                      {{"measure", "min over pairs of residual + tol_quad"},
                       {"pairs", std::to_string(c.entropy_pairs)},
                       {"max_tol_quad", format_double(tol_max)}});
  }
  if (name == "lipschitz") {
    double worst = -std::numeric_limits<double>::infinity();
    for (const LipschitzSample& s :
         time_lipschitz_check(ctx.tracker, ctx.initial, c.t_end, ctx.L, c.seed, c.lipschitz_samples, c.tol_lipschitz)) {
      worst = std::max(worst, s.l1 - s.bound);
    }
    if (c.lipschitz_samples == 0 || c.t_end == 0.0) worst = 0.0;
    return make_check(name, worst, 0.0, worst <= 0.0,
                      {{"measure", "max of L1(g(t+h) - g(t)) - (L TV(G0) h + tol)"}, {"L", format_double(ctx.L)}});
  }
  if (name == "characteristic") {
    const double x0 = 0.5 * (c.window.lo + c.window.hi);
    const double u0 = ctx.u0(x0);
    const double T = c.t_end > 0.0 ? c.t_end : 1.0;
    const CharacteristicResult r = characteristic_check(ctx.flux, x0, u0, T, c.characteristic_steps);
    return make_check(name, r.drift, c.tol_characteristic, r.drift <= c.tol_characteristic,
                      {{"x0", format_double(x0)}, {"u0", format_double(u0)}, {"steps",
                       std::to_string(c.characteristic_steps)}});
  }
  if (name == "fv") {
    const FVGrid fv = fv_reference(ctx.flux, ctx.u0, c.window, c.fv_cells, c.t_end, c.fv_cfl);
    const auto& tracker = ctx.tracker;
    const auto& field = ctx.final;
    const double dist = l1_distance([&](double x) { return tracker.sample_u(field, x); },
                                    [&](double x) { return fv.sample(x); }, c.window, 4 * c.fv_cells);
    const double norm0 = l1_distance(ctx.u0, [](double) { return 0.0; }, c.window, 4 * c.fv_cells);
    const double bound = c.tol_fv_relative * norm0;
    return make_check(name, dist, bound, dist <= bound,
                      {{"fv_cells", std::to_string(c.fv_cells)}, {"u0_l1", format_double(norm0)}});
  }
  if (name == "flux_convergence") {
    const std::vector<double> deltas{4.0 * c.delta, 2.0 * c.delta, c.delta};
    const double M = std::max(ctx.sup_u, 0.1);
    double worst = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const FluxConvergenceRow& row : flux_convergence_check(ctx.flux, deltas, c.window, M)) {
      worst = std::max(worst, row.err_f - row.bound_f);
      monotone = monotone && row.err_f <= prev;
      prev = row.err_f;
    }
    return make_check(name, worst, 0.0, worst <= 0.0 && monotone,
                      {{"measure", "max of sup|f^delta - f| - bound over the delta sweep"},
                       {"monotone", monotone ? "true" : "false"}});
  }
  if (name == "inversion") {
    const std::vector<double> deltas{4.0 * c.delta, 2.0 * c.delta, c.delta};
    double worst = std::numeric_limits<double>::infinity();
    for (const InversionRow& row : inversion_bound_check(ctx.flux, deltas, c.window, std::max(ctx.sup_u, 0.1))) {
      worst = std::min(worst, row.worst_slack);
    }
    return make_check(name, worst, 0.0, worst >= 0.0, {{"measure", "min of bound - sup gap over level pairs"}});
  }
  throw std::invalid_argument("unknown check '" + name + "'");
}

}  // namespace

RunResult run(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto started = std::chrono::steady_clock::now();
  RunResult result;
  json manifest;
  manifest["name"] = config.name;
  manifest["version"] = kVersion;
  json echo = json::object();
  for (const auto& [k, v] : config.echo()) echo[k] = v;
  manifest["config"] = echo;

  std::filesystem::create_directories(out_dir);
  std::string status = "ok";

  try {
    const Sampler u0 = make_initial_sampler(config.initial);
    Flux flux = make_flux(config);

    double sup_u0 = 0.0;
    for (double x : linspace(config.window.lo, config.window.hi, 4 * config.cells + 1)) {
      sup_u0 = std::max(sup_u0, std::abs(u0(x)));
    }
    const Interval x_box = config.has_domain ? config.domain : config.window;
    const double ub = std::max(1.0, 1.25 * sup_u0);
    const AssumptionReport audit = audit_assumptions(flux, x_box, {-ub, ub});
    manifest["audit"] = audit_json(audit);
    if (!audit.passed) {
      status = "audit_failed";
      throw std::runtime_error("flux failed the assumption audit");
    }
    flux = certify(flux, audit);

    const QuantizedData q = quantize_initial(flux, u0, config.delta, config.window, config.cells,
                                             config.initial.boundary);
    result.initial = initial_fronts(q);
    result.initial.validate();

    // Speed bound for the domain padding; the tracker's own envelope check
    // below uses the quantized field.
    TrackerOptions options = config.tracker;
    const FrontTracker probe(flux, config.delta, options);
    const double sup_u = probe.sup_norm(result.initial, x_box);
    const std::vector<double> xg = linspace(x_box.lo, x_box.hi, 257);
    const SpeedEnvelope env(flux, {-sup_u, sup_u}, xg);
    const double L = env.lipschitz_L(sup_u);
    options.domain = config.has_domain
                         ? config.domain
                         : Interval{config.window.lo - L * config.t_end - 1.0, config.window.hi + L * config.t_end + 1.0};
    const FrontTracker tracker(flux, config.delta, options);

    manifest["quantization"] = {{"jumps", q.jump_count()},
                                {"modulus_term", q.modulus_term},
                                {"l1_bound", q.l1_bound},
                                {"boundary", to_string(config.initial.boundary)}};
    manifest["sup_norm"] = sup_u;
    manifest["lipschitz_L"] = L;
    manifest["domain"] = {options.domain.lo, options.domain.hi};
    manifest["initial_front_count"] = result.initial.fronts.size();
    manifest["initial_tv"] = tv_g(result.initial);

    FrontField field = result.initial;
    json outputs = json::array();
    for (std::size_t k = 0; k < config.outputs.size(); ++k) {
      tracker.advance_in_place(field, config.outputs[k], result.log);
      field.validate();
      std::ostringstream csv;
      emit_profile(tracker, field, config.window, config.resolution, csv);
      const std::string file = "profile_" + std::to_string(k) + ".csv";
      write_file(out_dir / file, csv.str(), result);
      outputs.push_back({{"t", config.outputs[k]}, {"file", file}, {"fronts", field.fronts.size()}});
    }
    tracker.advance_in_place(field, config.t_end, result.log);
    field.validate();
    result.final = field;
    manifest["outputs"] = outputs;

    std::size_t grazing = 0;
    for (const Event& e : result.log.events) grazing += e.grazing ? 1 : 0;
    manifest["event_count"] = result.log.events.size();
    manifest["grazing_events"] = grazing;
    manifest["final_front_count"] = field.fronts.size();
    manifest["final_tv"] = tv_g(field);
    if (!field.fronts.empty()) {
      manifest["final_front_span"] = {field.fronts.front().position, field.fronts.back().position};
    }

    const Context ctx{config, flux, u0, tracker, result.initial, result.final, result.log, sup_u, L};
    for (const std::string& name : config.checks) result.report.add(run_check(name, ctx));
  } catch (const InvariantBreach& e) {
    status = "invariant_breach";
    result.error = e.what();
  } catch (const WindowExit& e) {
    status = "window_exit";
    result.error = e.what();
  } catch (const std::exception& e) {
    if (status == "ok") status = "error";
    result.error = e.what();
  }

  json checks = json::array();
  for (const CheckResult& c : result.report.checks) {
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    checks.push_back(
        {{"name", c.name}, {"measured", c.measured}, {"bound", c.bound}, {"passed", c.passed}, {"params", params}});
  }
  manifest["checks"] = checks;
  if (status == "ok" && !result.report.passed()) status = "check_failed";
  manifest["status"] = status;
  if (!result.error.empty()) manifest["error"] = result.error;
  result.exit_code = status == "ok" ? 0 : 1;

  if (status != "audit_failed" && result.error.empty()) {
    std::ostringstream ev;
    emit_events(result.log, ev);
    write_file(out_dir / "events.csv", ev.str(), result);
    std::ostringstream fr;
    emit_fronts(result.final, fr);
    write_file(out_dir / "fronts.csv", fr.str(), result);
  }

  json artifacts = json::array();
  for (const auto& p : result.artifacts) artifacts.push_back(p.filename().string());
  manifest["artifacts"] = artifacts;
  manifest["wall_time"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.manifest_json = manifest.dump(2) + "\n";
  write_file(out_dir / "manifest.json", result.manifest_json, result);
  return result;
}

}  // namespace fronttrack
