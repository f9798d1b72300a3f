#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nwsps/config.hpp"
#include "nwsps/error.hpp"
#include "nwsps/scenario.hpp"

namespace {

using namespace nwsps;
namespace fs = std::filesystem;

constexpr int kRuntimeFailure = 1;
constexpr int kConfigFailure = 2;

struct Common {
  std::string config;
  std::optional<std::int64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
};

config::Config load(const Common& c) {
  config::Config cfg = config::load_config(c.config);
  for (const auto& o : c.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw config::ConfigError("--set expects path=value, got '" + o + "'", "");
    const std::string path = o.substr(0, eq);
    const config::FieldSpec* spec = nullptr;
    for (const auto& f : config::schema(cfg.scenario()))
      if (f.path == path) spec = &f;
    if (!spec) throw config::ConfigError("scenario '" + cfg.scenario() + "' has no field '" + path + "'", path);
    cfg.set(path, config::parse_value(*spec, o.substr(eq + 1)));
  }
  if (c.seed) cfg.set("seed", *c.seed);
  return cfg;
}

int report_failure(const std::exception& e, const std::optional<fs::path>& dir) {
  const nlohmann::json err = scenario::error_json(e);
  if (dir) {
    try {
      scenario::write_json(*dir / "error.json", err);
    } catch (const std::exception&) {
    }
  }
  std::cerr << err.dump(2) << "\n";
  return dynamic_cast<const config::ConfigError*>(&e) ? kConfigFailure : kRuntimeFailure;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "Scenario config (YAML)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out", c.out, "Output directory (default: $NWSPS_OUTPUT_ROOT/<output_dir>)");
  cmd->add_option("--set", c.overrides, "Override a field, path=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nanowire single-photon source simulation runner"};
  app.require_subcommand(1);

  Common run_opts, validate_opts, sweep_opts;
  std::string param;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  add_common(run, run_opts);
  auto* validate = app.add_subcommand("validate", "Check a config and echo every resolved field");
  validate->add_option("config", validate_opts.config, "Scenario config (YAML)")->required()->check(CLI::ExistingFile);
  validate->add_option("--set", validate_opts.overrides, "Override a field, path=value (repeatable)");
  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a range of one parameter");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", param, "path=lo:hi:n or path=a,b,c")->required();
  sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (*validate) {
    try {
      std::cout << scenario::validation_report(load(validate_opts)).dump(2) << "\n";
      return 0;
    } catch (const std::exception& e) {
      return report_failure(e, std::nullopt);
    }
  }

  Common& opts = *run ? run_opts : sweep_opts;
  std::optional<fs::path> dir;
  try {
    const config::Config cfg = load(opts);
    dir = scenario::resolve_output_dir(cfg, opts.out);
    if (*run) {
      const nlohmann::json summary = scenario::run_scenario(cfg, *dir);
      std::cout << summary.at("headline").dump(2) << "\n";
    } else {
      const scenario::SweepSpec spec = scenario::parse_sweep(cfg, param);
      const nlohmann::json result = scenario::run_sweep(cfg, spec, *dir, jobs);
      int failed = 0;
      for (const auto& p : result.at("points")) failed += p.at("status") != "ok";
      std::cout << "sweep over " << spec.path << ": " << spec.values.size() << " points, " << failed << " failed\n";
      if (failed) return kRuntimeFailure;
    }
    std::cerr << "artifacts in " << dir->string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    return report_failure(e, dir);
  }
}
