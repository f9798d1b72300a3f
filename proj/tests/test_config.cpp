#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nwsps/config.hpp"
#include "nwsps/error.hpp"
#include "nwsps/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nwsps;
using namespace nwsps::config;

namespace {

const fs::path kConfigs = NWSPS_CONFIG_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "nwsps_config_tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConfigError parse_error(const std::string& yaml) {
  try {
    parse_config(yaml, "test.yaml");
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config was accepted");
  return ConfigError("", "");
}

}  // namespace

TEST_CASE("every shipped config is valid and covers every scenario kind") {
  std::set<std::string> kinds;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".yaml") continue;
    Config c = load_config(entry.path().string());
    CHECK(c.scenario() == entry.path().stem().string());
    kinds.insert(c.scenario());
    const json report = scenario::validation_report(c);
    CHECK(report.at("valid") == true);
    CHECK(report.at("fields").size() == schema(c.scenario()).size());
  }
  CHECK(kinds == std::set<std::string>(scenario_kinds().begin(), scenario_kinds().end()));
}

TEST_CASE("negative diameter is rejected naming the field and position") {
  const auto e = parse_error("scenario: modes\nwaveguide:\n  diameter: -1.0e-9\n");
  CHECK(e.field() == "waveguide.diameter");
  CHECK(std::string(e.what()).find("waveguide.diameter") != std::string::npos);
  CHECK(e.line() == 3);
  CHECK(e.column() == 13);
  const auto g = parse_error("scenario: passive\ngeometry:\n  wire_diameter: -1e-9\n");
  CHECK(g.field() == "geometry.wire_diameter");
}

TEST_CASE("overriding the lifetime is echoed as user-set, not an assumption") {
  const Config defaulted = parse_config("scenario: hbt\n");
  const json d = defaulted.echo().at("emitter.lifetime");
  CHECK(d.at("source") == "default");
  CHECK(d.at("assumption") == true);
  const auto& listed = defaulted.assumptions();
  CHECK(std::find(listed.begin(), listed.end(), "emitter.lifetime") != listed.end());

  const Config c = parse_config("scenario: hbt\nemitter:\n  lifetime: 10.0e-9\n");
  const json e = c.echo().at("emitter.lifetime");
  CHECK(e.at("value").get<double>() == 10e-9);
  CHECK(e.at("source") == "user");
  CHECK(e.at("assumption") == false);
  CHECK(c.user_set("emitter.lifetime"));
  const auto& left = c.assumptions();
  CHECK(std::find(left.begin(), left.end(), "emitter.lifetime") == left.end());
}

TEST_CASE("every echoed field carries value, source and assumption") {
  for (const auto& kind : scenario_kinds()) {
    const json echo = default_config(kind).echo();
    for (const auto& [path, f] : echo.items()) {
      CHECK(f.contains("value"));
      CHECK(f.contains("source"));
      CHECK(f.at("assumption").is_boolean());
    }
    // measured anchors are never flagged
    if (kind == "hbt") CHECK(echo.at("emitter.quantum_efficiency").at("assumption") == false);
    if (kind == "passive") CHECK(echo.at("geometry.wire_k").at("assumption") == true);
  }
}

TEST_CASE("unknown keys and bad types report line and column") {
  const auto u = parse_error("scenario: modes\nwaveguide:\n  diameter: 2.8e-7\n  radius: 1.4e-7\n");
  CHECK(u.field() == "waveguide.radius");
  CHECK(u.line() == 4);
  CHECK(u.column() == 3);
  CHECK(std::string(u.what()).find("unknown key") != std::string::npos);

  CHECK(parse_error("scenario: modes\nmystery: 1\n").field() == "mystery");
  const auto t = parse_error("scenario: modes\nwaveguide:\n  n_core: high\n");
  CHECK(t.field() == "waveguide.n_core");
  CHECK(std::string(t.what()).find("expects a number") != std::string::npos);
  CHECK(parse_error("scenario: hbt\npump:\n  pulses: 1.5\n").field() == "pump.pulses");
  CHECK(parse_error("scenario: hbt\ncontrols:\n  enabled: maybe\n").field() == "controls.enabled");
  CHECK(parse_error("scenario: passive\nbudget:\n  coupling_source: guess\n").field() == "budget.coupling_source");
  CHECK(parse_error("scenario: passive\nbudget: 3\n").field() == "budget");
  CHECK(parse_error("scenario: reverse\ncluster:\n  x_offsets: []\n").field() == "cluster.x_offsets");
  CHECK(parse_error("scenario: modes\nversion: 2\n").field() == "version");
}

TEST_CASE("parse failures, missing and unknown scenarios") {
  const auto p = parse_error("scenario: modes\nwaveguide: [1, 2\n");
  CHECK(p.line() > 0);
  CHECK(std::string(p.what()).find("parse error") != std::string::npos);
  CHECK(parse_error("seed: 3\n").field() == "scenario");
  const auto k = parse_error("scenario: laser\n");
  CHECK(k.field() == "scenario");
  CHECK(k.line() == 1);
  CHECK(parse_error("- a\n- b\n").field().empty());
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("range bounds are enforced in files and in overrides") {
  CHECK(parse_error("scenario: hbt\nbackground:\n  signal_fraction: 1.2\n").field() == "background.signal_fraction");
  CHECK(parse_error("scenario: passive\nwavelength: 1.0e-6\n").field() == "wavelength");
  Config c = default_config("hbt");
  CHECK_THROWS_AS(c.set("detector.efficiency", 0.0), ConfigError);
  CHECK_THROWS_AS(c.set("detector.efficiency", "high"), ConfigError);
  CHECK_THROWS_AS(c.set("no.such", 1.0), ConfigError);
  CHECK_THROWS_AS(c.set("scenario", "modes"), ConfigError);
  c.set("detector.efficiency", 0.5);
  CHECK(c.number("detector.efficiency") == 0.5);
  CHECK(c.user_set("detector.efficiency"));
  c.set("pump.pulses", 1000.0);
  CHECK(c.integer("pump.pulses") == 1000);
}

TEST_CASE("hash follows the resolved values but not the output location") {
  const Config a = parse_config("scenario: modes\n");
  const Config b = parse_config("scenario: modes\noutput_dir: elsewhere\n");
  const Config c = parse_config("scenario: modes\nseed: 2\n");
  const Config d = parse_config("scenario: modes\nwaveguide:\n  diameter: 2.8e-7\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  CHECK(a.hash() == d.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("command-line values parse into the field type") {
  const FieldSpec* diameter = nullptr;
  const FieldSpec* offsets = nullptr;
  for (const auto& f : schema("reverse"))
    if (f.path == "cluster.x_offsets") offsets = &f;
  for (const auto& f : schema("modes"))
    if (f.path == "waveguide.diameter") diameter = &f;
  REQUIRE(diameter);
  REQUIRE(offsets);
  CHECK(parse_value(*diameter, "2.5e-7").get<double>() == 2.5e-7);
  CHECK_THROWS_AS(parse_value(*diameter, "2.5e-7nm"), ConfigError);
  CHECK(parse_value(*offsets, "1e-8;2e-8").size() == 2);
}

TEST_CASE("output directory resolution") {
  const Config c = parse_config("scenario: modes\noutput_dir: out/m\n");
  CHECK(scenario::resolve_output_dir(c, "/tmp/explicit") == fs::path("/tmp/explicit"));
  ::setenv(scenario::kOutputRootEnv, "/tmp/root", 1);
  CHECK(scenario::resolve_output_dir(c, "") == fs::path("/tmp/root/out/m"));
  ::unsetenv(scenario::kOutputRootEnv);
  CHECK(scenario::resolve_output_dir(c, "") == fs::path("./out/m"));
}

TEST_CASE("repeated runs give byte-identical summaries and stamped artifacts") {
  for (const std::string kind : {"modes", "fit", "budget", "free_space"}) {
    Config c = load_config((kConfigs / (kind + ".yaml")).string());
    if (kind == "fit") c.set("synthetic.trials", 20.0);
    const fs::path a = scratch_dir(kind + "_a"), b = scratch_dir(kind + "_b");
    scenario::run_scenario(c, a);
    scenario::run_scenario(c, b);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string text = slurp(entry.path());
      if (entry.path().extension() == ".csv")
        CHECK(text.rfind("# config " + c.hash() + "\r\n", 0) == 0);
      if (entry.path().extension() == ".json") CHECK(json::parse(text).at("config_hash") == c.hash());
    }
  }
}

TEST_CASE("small hbt run is reproducible and seeds matter") {
  Config c = load_config((kConfigs / "hbt.yaml").string());
  c.set("pump.pulses", 200000.0);
  const fs::path a = scratch_dir("hbt_a"), b = scratch_dir("hbt_b"), s = scratch_dir("hbt_seed");
  const json sa = scenario::run_scenario(c, a);
  scenario::run_scenario(c, b);
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "histogram.csv") == slurp(b / "histogram.csv"));
  c.set("seed", 7.0);
  scenario::run_scenario(c, s);
  CHECK(slurp(a / "summary.json") != slurp(s / "summary.json"));
  CHECK(sa.at("headline").at("g2_0").at("target") == 0.2);
  CHECK(sa.at("headline").at("g2_0").at("provenance") == "monte-carlo");
}

TEST_CASE("anchored headline numbers carry target and provenance") {
  const fs::path dir = scratch_dir("budget_targets");
  const json s = scenario::run_scenario(load_config((kConfigs / "budget.yaml").string()), dir);
  for (const auto& [name, h] : s.at("headline").items()) {
    CHECK(h.contains("target"));
    CHECK(h.contains("provenance"));
  }
  CHECK(s.at("headline").at("eta_a").at("within_band") == true);
  CHECK(s.at("scenario") == "budget");
  CHECK(!s.contains("timestamp"));
}

TEST_CASE("module errors become structured error JSON") {
  Config c = default_config("fit");
  c.set("input.csv", "/nonexistent/decay.csv");
  try {
    scenario::run_scenario(c, scratch_dir("fit_error"));
    FAIL("missing input accepted");
  } catch (const std::exception& e) {
    const json j = scenario::error_json(e);
    CHECK(j.at("error").at("kind") == "invalid_argument");
    CHECK(j.at("error").at("message").get<std::string>().find("decay.csv") != std::string::npos);
  }
  // partial artifacts stay on disk
  CHECK(fs::exists(fs::temp_directory_path() / "nwsps_config_tests" / "fit_error" / "series_377.csv"));

  const json cj = scenario::error_json(ConfigError("bad", "a.b", 3, 4));
  CHECK(cj.at("error").at("kind") == "config_error");
  CHECK(cj.at("error").at("field") == "a.b");
  CHECK(cj.at("error").at("line") == 3);
  CHECK(cj.at("error").at("column") == 4);
}

TEST_CASE("sweep specifications") {
  const Config c = default_config("modes");
  const auto r = scenario::parse_sweep(c, "waveguide.diameter=200e-9:280e-9:3");
  CHECK(r.path == "waveguide.diameter");
  REQUIRE(r.values.size() == 3);
  CHECK(r.values[1].get<double>() == doctest::Approx(240e-9));
  const auto s = scenario::parse_sweep(c, "seed=1:4:4");
  CHECK(s.values.back().get<std::int64_t>() == 4);
  CHECK(scenario::parse_sweep(c, "waveguide.n_core = 2.0, 2.4").values.size() == 2);
  CHECK_THROWS_AS(scenario::parse_sweep(c, "waveguide.radius=1:2:2"), ConfigError);
  CHECK_THROWS_AS(scenario::parse_sweep(c, "waveguide.diameter=-1e-9,2e-7"), ConfigError);
  CHECK_THROWS_AS(scenario::parse_sweep(c, "waveguide.diameter=1:2"), InvalidArgument);
  CHECK_THROWS_AS(scenario::parse_sweep(c, "waveguide.diameter"), InvalidArgument);
  CHECK_THROWS_AS(scenario::parse_sweep(c, "output_dir=a,b"), ConfigError);
}

TEST_CASE("parallel sweeps match serial sweeps point by point") {
  const Config c = default_config("modes");
  const auto spec = scenario::parse_sweep(c, "waveguide.diameter=120e-9:280e-9:4");
  const fs::path serial = scratch_dir("sweep_serial"), parallel = scratch_dir("sweep_parallel");
  const json a = scenario::run_sweep(c, spec, serial, 1);
  const json b = scenario::run_sweep(c, spec, parallel, 3);
  CHECK(a == b);
  for (int k = 0; k < 4; ++k) {
    const std::string point = "point_" + std::to_string(k);
    CHECK(slurp(serial / point / "summary.json") == slurp(parallel / point / "summary.json"));
    CHECK(a.at("points")[k].at("status") == "ok");
  }
  // a thinner wire supports fewer modes
  CHECK(a.at("points")[0].at("headline").at("mode_count").at("value").get<double>() <
        a.at("points")[3].at("headline").at("mode_count").at("value").get<double>());
}
