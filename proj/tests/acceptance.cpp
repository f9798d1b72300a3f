// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nwsps/budget.hpp"
#include "nwsps/config.hpp"
#include "nwsps/fdtd/validation.hpp"
#include "nwsps/modes.hpp"
#include "nwsps/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nwsps;

namespace {

const fs::path kConfigs = NWSPS_CONFIG_DIR;
const fs::path kWork = fs::temp_directory_path() / "nwsps_acceptance";

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [FAIL]");
  }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Timed {
  json summary;
  double seconds = 0.0;
};

Timed run(const std::string& name, const std::string& subdir) {
  const auto cfg = config::load_config((kConfigs / (name + ".yaml")).string());
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.summary = scenario::run_scenario(cfg, kWork / subdir);
  t.seconds = seconds_since(t0);
  return t;
}

double headline(const Timed& t, const std::string& key) { return t.summary.at("headline").at(key).at("value"); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome antibunching() {
  Outcome o;
  const Timed t = run("hbt", "hbt");
  const double g2 = headline(t, "g2_0"), ideal = headline(t, "g2_0_ideal_emitter"),
               coherent = headline(t, "g2_0_coherent");
  o.check(std::abs(g2 - 0.20) <= 0.03, "g2(0) " + fmt(g2) + " in 0.20 +- 0.03");
  o.check(ideal < 0.01, "ideal " + fmt(ideal) + " < 0.01");
  o.check(std::abs(coherent - 1.0) <= 0.05, "coherent " + fmt(coherent) + " in 1 +- 0.05");
  o.check(t.seconds < 60.0, "runtime " + fmt(t.seconds, 3) + " s < 60 s");
  return o;
}

Outcome attenuation_fits() {
  Outcome o;
  const Timed t = run("fit", "fit");
  const double e377 = headline(t, "median_alpha_error_377"), e385 = headline(t, "median_alpha_error_385");
  const double order = headline(t, "ordering_fraction");
  const int trials = t.summary.at("details").at("trials");
  o.check(trials == 100, "trials " + std::to_string(trials));
  o.check(e377 < 0.10, "median error 377 " + fmt(e377) + " < 0.10");
  o.check(e385 < 0.10, "median error 385 " + fmt(e385) + " < 0.10");
  o.check(order * trials >= 99.0 - 1e-9, "ordering " + fmt(order * trials, 3) + "/100 >= 99");
  const double b377 = headline(t, "bulk_alpha_377_per_cm"), b385 = headline(t, "bulk_alpha_385_per_cm");
  // two significant figures, as quoted
  o.check(std::round(b377 / 100.0) == 84.0, "bulk alpha 377 " + fmt(b377) + " -> 8.4e3 /cm");
  o.check(std::round(b385 / 100.0) == 69.0, "bulk alpha 385 " + fmt(b385) + " -> 6.9e3 /cm");
  return o;
}

Outcome budget_arithmetic() {
  Outcome o;
  const double passive = budget::corrected_addressing(budget::relative_efficiency(0.7, 100.0), 0.07).value;
  const double active = budget::corrected_addressing(0.011, 0.35).value;
  o.check(std::round(passive * 1000.0) / 10.0 == 10.0, "0.7%/7% -> " + fmt(passive * 100.0, 6) + "%");
  o.check(std::round(active * 10000.0) / 100.0 == 3.14, "1.1%/35% -> " + fmt(active * 100.0, 6) + "%");
  const Timed t = run("budget", "budget");
  const double eta = headline(t, "eta_a"), ratio = headline(t, "eta_a_over_eta_free_space");
  o.check(eta >= 0.3e-4 && eta <= 0.9e-4, "eta_a " + fmt(eta) + " in [0.3, 0.9]e-4");
  o.check(std::abs(ratio - 0.54) <= 0.05, "eta_a/eta_fs " + fmt(ratio) + " within 0.54 +- 0.05");
  return o;
}

Outcome mode_analysis() {
  Outcome o;
  const Timed t = run("modes", "modes");
  const double v = headline(t, "v_number");
  const double count = headline(t, "mode_count");
  const double cutoff = headline(t, "single_mode_cutoff_diameter");
  const double worst = t.summary.at("details").at("max_residual");
  o.check(std::abs(v - 4.74) <= 0.01, "V " + fmt(v) + " in 4.74 +- 0.01");
  o.check(count > 1, "mode count " + fmt(count));
  o.check(std::abs(cutoff - 142e-9) <= 1e-9, "cutoff " + fmt(cutoff * 1e9) + " nm in 142 +- 1");
  o.check(worst < 1e-8, "max residual " + fmt(worst, 2) + " < 1e-8");
  return o;
}

Outcome fdtd_physics() {
  Outcome o;
  const double lambda = 405e-9;
  const double v = fdtd::vacuum_phase_velocity_ratio(lambda, 20.0);
  o.check(std::abs(v - 1.0) < 0.01, "v/c " + fmt(v, 6) + " within 1%");
  const double r = fdtd::half_space_reflectance(2.4, lambda, 20.0);
  o.check(std::abs(r - 0.1696) <= 0.005, "R " + fmt(r) + " in 0.1696 +- 0.005");
  const double pml = fdtd::cpml_return_fraction(lambda, 20.0);
  o.check(pml < 1e-4, "PML return " + fmt(pml, 2) + " < 1e-4");
  const double energy = fdtd::energy_balance_error(lambda, 20.0);
  o.check(energy < 0.02, "energy residual " + fmt(energy, 2) + " < 2%");
  const Timed t = run("passive", "passive");
  const double coupled = headline(t, "coupled_fraction");
  o.check(coupled >= 0.04 && coupled <= 0.10, "coupled " + fmt(coupled) + " in [0.04, 0.10]");
  const json& h = t.summary.at("headline");
  const bool has_ratio = h.contains("facet_on_off_ratio");
  const double ratio = has_ratio ? h.at("facet_on_off_ratio").at("value").get<double>() : 0.0;
  o.check(has_ratio && ratio > 10.0, "on/off " + fmt(ratio, 3) + " > 10");
  // all three passive scenes together inside the per-scene budget
  o.check(t.seconds < 600.0, "passive runtime " + fmt(t.seconds, 3) + " s for 3 scenes < 600 s");
  return o;
}

Outcome reverse_coupling() {
  Outcome o;
  const Timed t = run("reverse", "reverse");
  const double f = headline(t, "guided_fraction");
  o.check(f >= 0.05 && f <= 0.30, "guided fraction " + fmt(f) + " in [0.05, 0.30]");
  return o;
}

Outcome determinism() {
  Outcome o;
  for (const auto& kind : config::scenario_kinds()) {
    const fs::path first = kWork / kind / "summary.json";
    if (!fs::exists(first)) run(kind, kind);
    run(kind, kind + "_again");
    const bool same = slurp(first) == slurp(kWork / (kind + "_again") / "summary.json");
    o.check(same, kind);
  }
  return o;
}

}  // namespace

int main() {
  fs::remove_all(kWork);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"antibunching", antibunching},         {"attenuation fits", attenuation_fits},
      {"budget arithmetic", budget_arithmetic}, {"mode analysis", mode_analysis},
      {"fdtd physics", fdtd_physics},         {"reverse coupling", reverse_coupling},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %zu %s %s: %s\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
