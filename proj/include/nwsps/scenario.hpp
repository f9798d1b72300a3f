#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nwsps/config.hpp"

namespace nwsps::scenario {

// Environment variable naming the root under which output_dir is resolved.
inline constexpr const char* kOutputRootEnv = "NWSPS_OUTPUT_ROOT";

// --out wins; otherwise $NWSPS_OUTPUT_ROOT (or the working directory) joined
// with the config's output_dir.
std::filesystem::path resolve_output_dir(const config::Config& cfg, const std::string& out_flag);

// Runs the scenario, writes its artifacts into `out_dir` and returns the
// summary that was written to summary.json.
nlohmann::json run_scenario(const config::Config& cfg, const std::filesystem::path& out_dir);

// {scenario, valid, config_hash, fields, assumptions}
nlohmann::json validation_report(const config::Config& cfg);

// {error: {kind, message[, field, line, column]}}
nlohmann::json error_json(const std::exception& e);

// Pretty-printed, sorted keys, trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// "path=lo:hi:n" (n evenly spaced values) or "path=a,b,c".
struct SweepSpec {
  std::string path;
  std::vector<nlohmann::json> values;
};
SweepSpec parse_sweep(const config::Config& cfg, const std::string& text);

// One run per value in out_dir/point_<k>; up to `jobs` runs at a time.
// Failed points keep their error.json and are reported in sweep.json.
nlohmann::json run_sweep(const config::Config& cfg, const SweepSpec& sweep, const std::filesystem::path& out_dir,
                         int jobs);

}  // namespace nwsps::scenario
