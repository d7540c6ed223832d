#include <glob.h>

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fronttrack/run.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string summary;
};

Outcome run_one(const fs::path& config_path, const fs::path& out_dir, bool verbose) {
  Outcome o;
  fronttrack::RunConfig config;
  try {
    config = fronttrack::parse_config_file(config_path);
  } catch (const fronttrack::ConfigError& e) {
    o.code = 2;
    o.summary = config_path.string() + ": config error: " + e.what();
    return o;
  }
  const fronttrack::RunResult r = fronttrack::run(config, out_dir);
  o.code = r.exit_code;
  o.summary = config_path.string() + ": " + (r.exit_code == 0 ? "ok" : "FAILED") + " (" +
              std::to_string(r.initial.fronts.size()) + " fronts, " + std::to_string(r.log.events.size()) +
              " events) -> " + out_dir.string();
  if (!r.error.empty()) o.summary += "\n  " + r.error;
  if (verbose) {
    for (const auto& c : r.report.checks) {
      o.summary += "\n  " + c.name + ": " + (c.passed ? "pass" : "FAIL") + " measured " +
                   fronttrack::format_double(c.measured) + " bound " + fronttrack::format_double(c.bound);
    }
  }
  return o;
}

std::vector<fs::path> expand(const std::string& pattern) {
  glob_t g{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Front tracking for scalar conservation laws with heterogeneous convex flux"};
  app.require_subcommand(1);
  std::string out_flag;
  bool verbose = false;
  app.add_option("--out", out_flag, "Output directory (default: $FRONTTRACK_OUT or ./out)");
  app.add_flag("-v,--verbose", verbose, "Print per-check results");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", config_path, "Config file")->required();

  std::string pattern;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every config matching a glob, concurrently");
  sweep_cmd->add_option("pattern", pattern, "Config glob, e.g. 'configs/*.ini'")->required();

  CLI11_PARSE(app, argc, argv);

  fs::path out = "out";
  if (const char* env = std::getenv("FRONTTRACK_OUT"); env != nullptr && *env != '\0') out = env;
  if (!out_flag.empty()) out = out_flag;

  if (*run_cmd) {
    const Outcome o = run_one(config_path, out, verbose);
    (o.code == 0 ? std::cout : std::cerr) << o.summary << "\n";
    return o.code;
  }

  const std::vector<fs::path> configs = expand(pattern);
  if (configs.empty()) {
    std::cerr << "no config matches '" << pattern << "'\n";
    return 2;
  }
  std::vector<std::future<Outcome>> jobs;
  for (const fs::path& p : configs) {
    jobs.push_back(std::async(std::launch::async, run_one, p, out / p.stem(), verbose));
  }
  int code = 0;
  for (auto& job : jobs) {
    const Outcome o = job.get();
    std::cout << o.summary << "\n";
    code = std::max(code, o.code);
  }
  return code;
}
