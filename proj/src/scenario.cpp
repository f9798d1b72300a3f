#include "nwsps/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "nwsps/attenuation.hpp"
#include "nwsps/budget.hpp"
#include "nwsps/csv.hpp"
#include "nwsps/emitter.hpp"
#include "nwsps/error.hpp"
#include "nwsps/fdtd/io.hpp"
#include "nwsps/fdtd/scene.hpp"
#include "nwsps/hbt.hpp"
#include "nwsps/modes.hpp"

namespace nwsps::scenario {

namespace fs = std::filesystem;
using nlohmann::json;
using config::Config;

namespace {

// Collects artifacts and summary content for one run.
class Bundle {
public:
  Bundle(const Config& cfg, fs::path dir) : cfg_(cfg), dir_(std::move(dir)), header_("# config " + cfg.hash()) {
    fs::create_directories(dir_);
  }

  const std::string& header() const { return header_; }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    files_.insert(name);
    return out;
  }

  void json_file(const std::string& name, json j) {
    j["config_hash"] = cfg_.hash();
    write_json(dir_ / name, j);
    files_.insert(name);
  }

  void headline(const std::string& name, double value, const std::string& provenance, json target = nullptr,
                json band = nullptr) {
    json h{{"value", value}, {"provenance", provenance}};
    if (!target.is_null()) h["target"] = std::move(target);
    if (!band.is_null()) {
      h["band"] = band;
      // null bound = unbounded
      h["within_band"] = (band[0].is_null() || value >= band[0].get<double>()) &&
                         (band[1].is_null() || value <= band[1].get<double>());
    }
    headline_[name] = std::move(h);
  }

  json& details() { return details_; }
  void warn(const std::string& w) { warnings_.push_back(w); }

  json finish() {
    json s;
    s["scenario"] = cfg_.scenario();
    s["config_hash"] = cfg_.hash();
    s["seed"] = cfg_.integer("seed");
    s["assumptions"] = cfg_.assumptions();
    s["warnings"] = warnings_;
    s["headline"] = headline_;
    s["details"] = details_;
    files_.insert("summary.json");
    s["artifacts"] = std::vector<std::string>(files_.begin(), files_.end());
    write_json(dir_ / "summary.json", s);
    return s;
  }

private:
  const Config& cfg_;
  fs::path dir_;
  std::string header_;
  std::set<std::string> files_;
  json headline_ = json::object();
  json details_ = json::object();
  std::vector<std::string> warnings_;
};

json band(double lo, double hi) { return json::array({lo, hi}); }
json at_least(double lo) { return json::array({lo, nullptr}); }

std::uint64_t seed_of(const Config& cfg) { return static_cast<std::uint64_t>(cfg.integer("seed")); }

// ---- FDTD scenes ----

fdtd::SceneGeometry scene_geometry(const Config& cfg) {
  fdtd::SceneGeometry g;
  g.wire_length = cfg.number("geometry.wire_length");
  g.wire_diameter = cfg.number("geometry.wire_diameter");
  g.wire_index = {cfg.number("geometry.wire_n"), cfg.number("geometry.wire_k")};
  g.background_index = cfg.number("geometry.background_index");
  g.layered_substrate = cfg.flag("geometry.layered_substrate");
  g.substrate_index = cfg.number("geometry.substrate_index");
  g.pmma_index = cfg.number("geometry.pmma_index");
  g.pmma_thickness = cfg.number("geometry.pmma_thickness");
  g.cells_per_wavelength = cfg.number("resolution.cells_per_wavelength");
  g.pml_cells = static_cast<int>(cfg.integer("resolution.pml_cells"));
  return g;
}

fdtd::SteadyStateOptions steady_options(const Config& cfg) {
  fdtd::SteadyStateOptions o;
  o.tolerance = cfg.number("resolution.steady_tolerance");
  o.max_steps = cfg.integer("resolution.max_steps");
  return o;
}

fdtd::MonitorReport run_scene(const Config& cfg, const fdtd::SceneGeometry& g, Bundle& b, const std::string& label,
                              const std::function<void(fdtd::Scene&)>& tweak = {}) {
  fdtd::Scene scene = fdtd::build_scene(g, cfg.number("wavelength"));
  if (tweak) tweak(scene);
  for (const auto& w : scene.warnings) b.warn(label + ": " + w);
  fdtd::SceneRun run(std::move(scene));
  fdtd::MonitorReport r = run.run_until_steady(steady_options(cfg));
  if (!r.converged) b.warn(label + ": steady state not reached within " + std::to_string(r.steps) + " steps");
  auto out = b.open("monitors_" + label + ".csv");
  fdtd::write_monitors_csv(out, r, b.header());
  return r;
}

void write_fields(const Config& cfg, const fdtd::MonitorReport& r, Bundle& b) {
  if (r.maps.empty()) return;
  auto out = b.open(fdtd::field_file_name(r.maps.front().frequency));
  fdtd::write_field_csv(out, r.maps.front(), r.recorded_region, b.header(),
                        static_cast<int>(cfg.integer("output.field_stride")));
}

double box_outflow(const fdtd::MonitorReport& r, const std::string& prefix = "box") {
  return -r.flux(prefix + "_left") + r.flux(prefix + "_right") - r.flux(prefix + "_bottom") + r.flux(prefix + "_top");
}

// Small closed box of flux lines around the first source, named emit_*.
void add_emission_box(fdtd::Scene& scene, int half) {
  const double dx = scene.grid.dx;
  const int i = static_cast<int>(std::lround(scene.sources.front().center_x / dx));
  const int j = static_cast<int>(std::lround(scene.sources.front().center_y / dx));
  using fdtd::FluxNormal;
  scene.monitors.push_back({"emit_left", FluxNormal::x_normal, i - half, j - half, j + half, {}});
  scene.monitors.push_back({"emit_right", FluxNormal::x_normal, i + half, j - half, j + half, {}});
  scene.monitors.push_back({"emit_bottom", FluxNormal::y_normal, j - half, i - half, i + half, {}});
  scene.monitors.push_back({"emit_top", FluxNormal::y_normal, j + half, i - half, i + half, {}});
}

json run_summary(const fdtd::MonitorReport& r) {
  return {{"converged", r.converged}, {"steps", r.steps}, {"periods", r.periods}};
}

budget::ChainInputs chain_inputs(const Config& cfg, double pump_wavelength) {
  budget::ChainInputs in;
  in.coupling = cfg.number("budget.coupling");
  in.wire_k_405 = cfg.number("geometry.wire_k");
  in.wire_length = cfg.number("geometry.wire_length");
  in.pump_wavelength = pump_wavelength;
  in.wire_diameter = cfg.number("geometry.wire_diameter");
  in.sigma_eff = emitter::resonant_cross_section(cfg.number("budget.emitter_wavelength")) * cfg.number("budget.sigma_scale");
  in.facet_overlap = cfg.number("budget.facet_overlap");
  in.quantum_efficiency = cfg.number("budget.quantum_efficiency");
  in.collection = cfg.number("budget.collection");
  in.optics = cfg.number("budget.optics");
  in.detector = cfg.number("budget.detector");
  in.free_space_waist = cfg.number("budget.free_space_waist");
  in.mode_matching = cfg.number("budget.mode_matching");
  return in;
}

void chain_headlines(const budget::EfficiencyLedger& passive, const budget::EfficiencyLedger& free, Bundle& b) {
  b.headline("eta_a", passive.eta(), "calculated", 0.6e-4, band(0.3e-4, 0.9e-4));
  b.headline("eta_a_over_eta_free_space", passive.eta() / free.eta(), "calculated", 0.54, band(0.49, 0.59));
  b.json_file("ledger_passive.json", passive.to_json());
  b.json_file("ledger_free_space.json", free.to_json());
}

void run_passive(const Config& cfg, Bundle& b) {
  fdtd::SceneGeometry g = scene_geometry(cfg);
  fdtd::PlacedSource beam;
  beam.kind = fdtd::SourceKind::gaussian_beam;
  beam.anchor = fdtd::Anchor::input_facet;
  beam.offset_x = cfg.number("beam.offset_x");
  beam.offset_y = cfg.number("beam.height");
  beam.waist = cfg.number("beam.waist");
  g.sources = {beam};

  const fdtd::MonitorReport on = run_scene(cfg, g, b, "on_wire");
  write_fields(cfg, on, b);
  const fdtd::MonitorReport ref = run_scene(cfg, fdtd::vacuum_reference(g), b, "reference");
  fdtd::SceneGeometry off_g = g;
  off_g.sources.front().offset_x = cfg.number("beam.off_wire_offset");
  const fdtd::MonitorReport off = run_scene(cfg, off_g, b, "off_wire");

  const double incident = -ref.flux("incident");
  if (!(incident > 0.0)) throw NumericalError("reference run recorded no incident power");
  const double coupled = on.flux("coupled") / incident;
  const double facet_offset = cfg.number("emitter.facet_offset");
  const double i_on = fdtd::facet_intensity_at(facet_offset, on);
  const double i_off = fdtd::facet_intensity_at(facet_offset, off);

  b.headline("coupled_fraction", coupled, "fdtd-simulated", 0.07, band(0.04, 0.10));
  json& d = b.details();
  d["incident_power"] = incident;
  d["output_fraction"] = on.flux("output") / incident;
  d["guided_near_output_fraction"] = on.flux("reverse_guided") / incident;
  d["facet_intensity_on"] = i_on;
  d["facet_intensity_off"] = i_off;
  d["runs"] = {{"on_wire", run_summary(on)}, {"reference", run_summary(ref)}, {"off_wire", run_summary(off)}};
  if (i_off > 0.0)
    b.headline("facet_on_off_ratio", i_on / i_off, "fdtd-simulated", "> 10", at_least(10.0));
  else
    d["facet_on_off_ratio"] = "off-wire facet intensity is zero";

  const double direct = cfg.number("measured.direct_counts");
  const double relative = budget::relative_efficiency(cfg.number("measured.relative_efficiency") * direct, direct);
  const budget::Corrected corrected = budget::corrected_addressing(relative, cfg.number("budget.coupling"));
  b.headline("relative_efficiency", relative, "measured-paper", 0.007);
  b.headline("addressing_efficiency", corrected.value, "calculated", 0.10);
  d["addressing_unphysical"] = corrected.unphysical;

  const budget::ChainInputs in = chain_inputs(cfg, cfg.number("wavelength"));
  budget::EfficiencyLedger passive = budget::passive_ledger(in);
  if (cfg.text("budget.coupling_source") == "fdtd")
    passive = passive.with_value("coupling", coupled, budget::Provenance::fdtd_simulated);
  chain_headlines(passive, budget::free_space_ledger(in), b);
}

void run_active(const Config& cfg, Bundle& b) {
  fdtd::SceneGeometry g = scene_geometry(cfg);
  fdtd::PlacedSource dipole;
  dipole.kind = fdtd::SourceKind::line_dipole;
  dipole.anchor = fdtd::Anchor::input_facet;
  dipole.offset_x = cfg.number("source.offset_x");
  dipole.offset_y = cfg.number("source.offset_y");
  g.sources = {dipole};
  g.coupled_monitor_offset = cfg.number("monitor.guided_offset");

  const fdtd::MonitorReport r =
      run_scene(cfg, g, b, "active", [](fdtd::Scene& scene) { add_emission_box(scene, 4); });
  write_fields(cfg, r, b);
  // the wire absorbs, so the reference is the power leaving a small box around the dipole
  const double emitted = box_outflow(r, "emit");
  if (!(emitted > 0.0)) throw NumericalError("active run recorded no emitted power");
  json& d = b.details();
  d["run"] = run_summary(r);
  d["emitted_power"] = emitted;
  d["escaping_power"] = box_outflow(r);
  b.headline("guided_fraction", r.flux("coupled") / emitted, "fdtd-simulated");
  b.headline("output_fraction", r.flux("output") / emitted, "fdtd-simulated");

  const double length = cfg.number("geometry.wire_length");
  const double a377 = cfg.number("attenuation.alpha_377_per_cm") * 100.0;
  const double a385 = cfg.number("attenuation.alpha_385_per_cm") * 100.0;
  d["transmission_377"] = budget::propagation_transmission(a377, length);
  d["transmission_385"] = budget::propagation_transmission(a385, length);
  d["alpha_from_wire_k_per_cm"] =
      attenuation::bulk_alpha(cfg.number("geometry.wire_n"), cfg.number("geometry.wire_k"), cfg.number("wavelength")) /
      100.0;

  const double direct = cfg.number("measured.direct_counts");
  const double relative = budget::relative_efficiency(cfg.number("measured.relative_efficiency") * direct, direct);
  const double overlap = cfg.number("measured.spot_overlap");
  const budget::Corrected corrected = budget::corrected_addressing(relative, overlap);
  b.headline("relative_efficiency", relative, "measured-paper", 0.011);
  b.headline("addressing_efficiency", corrected.value, "calculated", 0.031);
  d["addressing_unphysical"] = corrected.unphysical;
  b.json_file("ledger_active.json", budget::active_ledger(overlap, relative).to_json());
}

void run_reverse(const Config& cfg, Bundle& b) {
  const auto xs = cfg.numbers("cluster.x_offsets");
  const auto ys = cfg.numbers("cluster.y_offsets");
  auto table = b.open("cluster.csv");
  table << b.header() << "\r\n";
  csv::write_row(table, {"x_offset_m", "y_offset_m", "guided_fraction", "converged", "steps"});
  double sum = 0.0;
  int n = 0;
  json runs = json::array();
  for (double ox : xs) {
    for (double oy : ys) {
      fdtd::SceneGeometry g = scene_geometry(cfg);
      g.reverse_monitor_offset = cfg.number("monitor.guided_offset");
      fdtd::PlacedSource p;
      p.kind = fdtd::SourceKind::line_dipole;
      p.anchor = fdtd::Anchor::output_facet;
      p.offset_x = ox;
      p.offset_y = oy;
      g.sources = {p};
      const fdtd::MonitorReport r = run_scene(cfg, g, b, "dipole_" + std::to_string(n));
      const double total = box_outflow(r);
      if (!(total > 0.0)) throw NumericalError("dipole run " + std::to_string(n) + " recorded no outgoing power");
      const double guided = -r.flux("reverse_guided") / total;
      csv::write_row(table, {csv::format_number(ox), csv::format_number(oy), csv::format_number(guided),
                             r.converged ? "1" : "0", std::to_string(r.steps)});
      runs.push_back({{"x_offset", ox}, {"y_offset", oy}, {"guided_fraction", guided}, {"run", run_summary(r)}});
      sum += guided;
      ++n;
    }
  }
  const budget::ReverseCheck check = budget::reverse_coupling_check(sum / n, 1.0);
  b.headline("guided_fraction", check.fraction, "fdtd-simulated", check.reference, band(0.05, 0.30));
  b.details()["dipoles"] = runs;
  b.json_file("ledger_reverse.json", budget::reverse_ledger(check.fraction, budget::Provenance::fdtd_simulated).to_json());
}

// ---- HBT ----

hbt::DetectorModel detector(const Config& cfg) {
  hbt::DetectorModel d;
  d.efficiency = cfg.number("detector.efficiency");
  d.dark_rate = cfg.number("detector.dark_rate");
  d.jitter_ps = cfg.number("detector.jitter_ps");
  d.dead_time_ps = cfg.number("detector.dead_time_ps");
  return d;
}

std::vector<std::int64_t> read_tags(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read time-tag file '" + path + "'");
  return emitter::read_timestamps_csv(in);
}

void run_hbt(const Config& cfg, Bundle& b) {
  hbt::PulsedExperiment exp;
  exp.emitter.quantum_efficiency = cfg.number("emitter.quantum_efficiency");
  exp.emitter.lifetime = cfg.number("emitter.lifetime");
  exp.emitter.wavelength = cfg.number("emitter.wavelength");
  exp.emitter.sigma_abs = emitter::resonant_cross_section(exp.emitter.wavelength) * cfg.number("emitter.sigma_scale");
  exp.emitter.blinking = {cfg.flag("emitter.blinking"), cfg.number("emitter.on_to_off_rate"),
                          cfg.number("emitter.off_to_on_rate")};
  exp.pump.period = cfg.number("pump.period");
  exp.pump.pulse_width = cfg.number("pump.pulse_width");
  exp.pump.pulses = cfg.integer("pump.pulses");
  exp.pump.fluence = -std::log1p(-cfg.number("pump.excitation_probability")) / exp.emitter.sigma_abs;
  exp.signal_fraction = cfg.number("background.signal_fraction");
  exp.det_a = exp.det_b = detector(cfg);
  exp.bin_width_ps = cfg.integer("analysis.bin_width_ps");
  exp.tau_max_periods = cfg.number("analysis.tau_max_periods");
  exp.window_fraction = cfg.number("analysis.window_fraction");
  exp.coherent_mean_photons = cfg.number("controls.coherent_mean_photons");
  exp.emitter.validate();
  exp.pump.validate();
  for (const auto& w : exp.pump.warnings(exp.emitter)) b.warn(w);

  const std::uint64_t seed = seed_of(cfg);
  const std::int64_t period_ps = std::llround(exp.pump.period * 1e12);
  const std::int64_t window_ps = std::llround(exp.window_fraction * exp.pump.period * 1e12);
  json& d = b.details();
  d["pump_fluence"] = exp.pump.fluence;
  d["sigma_eff"] = exp.emitter.sigma_abs;

  const std::string tags_a = cfg.text("input.tags_a"), tags_b = cfg.text("input.tags_b");
  if (tags_a.empty() != tags_b.empty()) throw config::ConfigError("input.tags_a and input.tags_b go together", "input.tags_b");
  if (!tags_a.empty()) {
    hbt::TimeTagStream a{'A', read_tags(tags_a)}, bb{'B', read_tags(tags_b)};
    const std::int64_t last = std::max(a.t_ps.empty() ? 0 : a.t_ps.back(), bb.t_ps.empty() ? 0 : bb.t_ps.back());
    const double t_acq = std::max(1e-12 * static_cast<double>(last + period_ps), exp.pump.period);
    const auto hist = hbt::correlate(a, bb, exp.bin_width_ps, std::llround(exp.tau_max_periods * period_ps), t_acq);
    const auto g = hbt::g2_pulsed_zero(hist, period_ps, window_ps);
    auto out = b.open("histogram.csv");
    hbt::write_histogram_csv(out, hist, b.header());
    b.headline("g2_0", g.g2_0, "measured-input");
    d["hbt"] = hbt::summary_json(g, static_cast<std::int64_t>(std::llround(t_acq / exp.pump.period)));
    return;
  }

  const hbt::PulsedResult main = hbt::run_pulsed_experiment(exp, seed);
  {
    auto out = b.open("histogram.csv");
    hbt::write_histogram_csv(out, main.hist, b.header());
  }
  if (cfg.flag("output.write_timestamps")) {
    auto out = b.open("emission.csv");
    out << b.header() << "\r\n";
    emitter::write_timestamps_csv(out, emitter::generate_emission_stream(exp.emitter, exp.pump, seed),
                                  emitter::params_fingerprint(exp.emitter, exp.pump));
  }
  b.headline("g2_0", main.g2.g2_0, "monte-carlo", 0.20, band(0.17, 0.23));
  d["hbt"] = hbt::summary_json(main.g2, exp.pump.pulses);
  d["background_rate"] = main.background_rate;
  d["signal_per_arm_per_pulse"] = main.signal_per_arm_per_pulse;
  d["emitted_photons"] = main.photons;

  if (cfg.flag("controls.enabled")) {
    hbt::PulsedExperiment ideal = exp;
    ideal.signal_fraction = 1.0;
    const hbt::PulsedResult ri = hbt::run_pulsed_experiment(ideal, seed + 101);
    b.headline("g2_0_ideal_emitter", ri.g2.g2_0, "monte-carlo", "< 0.01", band(0.0, 0.01));
    hbt::PulsedExperiment coherent = ideal;
    coherent.light = hbt::PulsedExperiment::Light::coherent;
    const hbt::PulsedResult rc = hbt::run_pulsed_experiment(coherent, seed + 202);
    b.headline("g2_0_coherent", rc.g2.g2_0, "monte-carlo", 1.0, band(0.95, 1.05));
    d["controls"] = {{"ideal", hbt::summary_json(ri.g2, exp.pump.pulses)},
                     {"coherent", hbt::summary_json(rc.g2, exp.pump.pulses)}};
    auto oi = b.open("histogram_ideal.csv");
    hbt::write_histogram_csv(oi, ri.hist, b.header());
    auto oc = b.open("histogram_coherent.csv");
    hbt::write_histogram_csv(oc, rc.hist, b.header());
  }
}

// ---- modes, fit, budget ----

void run_modes(const Config& cfg, Bundle& b) {
  modes::WaveguideSpec spec;
  spec.diameter = cfg.number("waveguide.diameter");
  spec.n_core = cfg.number("waveguide.n_core");
  spec.n_clad = cfg.number("waveguide.n_clad");
  spec.wavelength = cfg.number("waveguide.wavelength");
  spec.validate();
  const modes::ModeSearch search = modes::solve_modes(spec, static_cast<int>(cfg.integer("waveguide.nu_max")));
  for (const auto& f : search.failures)
    b.warn("no root in bracket for " + modes::family_name(f.family) + std::to_string(f.nu));
  {
    auto out = b.open("modes.csv");
    modes::write_modes_csv(out, search.modes, b.header());
  }
  const int count = modes::mode_count(spec);
  double worst = 0.0;
  for (const auto& m : search.modes) worst = std::max(worst, m.residual);
  b.headline("v_number", modes::v_number(spec), "calculated", 4.74, band(4.73, 4.75));
  b.headline("mode_count", count, "calculated", "> 1");
  b.headline("single_mode_cutoff_diameter",
             modes::single_mode_cutoff_diameter(spec.n_core, spec.n_clad, spec.wavelength), "calculated", 142e-9,
             band(141e-9, 143e-9));
  json& d = b.details();
  d["verdict"] = count > 1 ? "multimode" : "single-mode";
  d["max_residual"] = worst;
  json list = json::array();
  for (const auto& m : search.modes) list.push_back({{"mode", m.label()}, {"n_eff", m.n_eff}, {"b", m.b}});
  d["modes"] = list;
}

void run_fit(const Config& cfg, Bundle& b) {
  const std::uint64_t seed = seed_of(cfg);
  const int trials = static_cast<int>(cfg.integer("synthetic.trials"));
  struct Line {
    const char* tag;
    double wavelength;
    double alpha_per_cm;
  };
  const Line lines[] = {{"377", 377e-9, cfg.number("synthetic.alpha_377_per_cm")},
                        {"385", 385e-9, cfg.number("synthetic.alpha_385_per_cm")}};
  std::vector<std::vector<double>> mc;
  json& d = b.details();
  for (std::size_t k = 0; k < 2; ++k) {
    attenuation::SyntheticDecay truth;
    truth.amplitude = cfg.number("synthetic.amplitude");
    truth.alpha = lines[k].alpha_per_cm * 100.0;
    truth.offset = cfg.number("synthetic.offset");
    truth.points = static_cast<int>(cfg.integer("synthetic.points"));
    truth.length = cfg.number("synthetic.length");
    truth.noise = cfg.number("synthetic.noise");
    truth.wavelength = lines[k].wavelength;
    const attenuation::DecaySeries series = attenuation::synthesize(truth, seed + k);
    {
      auto out = b.open(std::string("series_") + lines[k].tag + ".csv");
      attenuation::write_series_csv(out, series, b.header());
    }
    const attenuation::DecayFit fit = attenuation::fit_decay(series);
    b.headline(std::string("alpha_") + lines[k].tag + "_per_cm", fit.alpha / 100.0, "fit", lines[k].alpha_per_cm);
    d[std::string("fit_") + lines[k].tag] = attenuation::fit_to_json(fit);

    std::vector<double> alphas = attenuation::monte_carlo_alphas(truth, trials, seed + 1000 * (k + 1));
    std::vector<double> err;
    for (double a : alphas) err.push_back(std::abs(a - truth.alpha) / truth.alpha);
    std::sort(err.begin(), err.end());
    const std::size_t n = err.size();
    const double median = n % 2 ? err[n / 2] : 0.5 * (err[n / 2 - 1] + err[n / 2]);
    b.headline(std::string("median_alpha_error_") + lines[k].tag, median, "monte-carlo", "< 0.10", band(0.0, 0.10));
    mc.push_back(std::move(alphas));
  }
  int ordered = 0;
  for (int t = 0; t < trials; ++t) ordered += mc[0][t] > mc[1][t];
  b.headline("ordering_fraction", static_cast<double>(ordered) / trials, "monte-carlo", ">= 0.99", band(0.99, 1.0));
  d["trials"] = trials;

  const double n = cfg.number("bulk.n");
  b.headline("bulk_alpha_377_per_cm", attenuation::bulk_alpha(n, cfg.number("bulk.k_377"), 377e-9) / 100.0, "calculated",
             8.4e3);
  b.headline("bulk_alpha_385_per_cm", attenuation::bulk_alpha(n, cfg.number("bulk.k_385"), 385e-9) / 100.0, "calculated",
             6.9e3);

  const std::string input = cfg.text("input.csv");
  if (!input.empty()) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw InvalidArgument("cannot read decay series '" + input + "'");
    const attenuation::DecayFit fit = attenuation::fit_decay(attenuation::read_series_csv(in, cfg.number("input.wavelength")));
    b.headline("alpha_input_per_cm", fit.alpha / 100.0, "fit");
    d["fit_input"] = attenuation::fit_to_json(fit);
  }
}

void run_budget(const Config& cfg, Bundle& b) {
  const budget::ChainInputs in = chain_inputs(cfg, cfg.number("geometry.pump_wavelength"));
  chain_headlines(budget::passive_ledger(in), budget::free_space_ledger(in), b);
  const double relative = cfg.number("measured.passive_relative");
  b.headline("passive_addressing", budget::corrected_addressing(relative, in.coupling).value, "calculated", 0.10);
  const double active = cfg.number("measured.active_relative"), overlap = cfg.number("measured.spot_overlap");
  b.headline("active_addressing", budget::corrected_addressing(active, overlap).value, "calculated", 0.031);
  b.json_file("ledger_active.json", budget::active_ledger(overlap, active).to_json());
}

void run_free_space(const Config& cfg, Bundle& b) {
  const budget::ChainInputs in = chain_inputs(cfg, cfg.number("geometry.pump_wavelength"));
  const auto free = budget::free_space_ledger(in);
  b.headline("eta_free_space", free.eta(), "calculated");
  chain_headlines(budget::passive_ledger(in), free, b);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {lo};
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo + (hi - lo) * k / (n - 1));
  return v;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

}  // namespace

fs::path resolve_output_dir(const Config& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) return fs::path(out_flag);
  const char* root = std::getenv(kOutputRootEnv);
  const fs::path base = root && *root ? fs::path(root) : fs::path(".");
  return base / cfg.text("output_dir");
}

json run_scenario(const Config& cfg, const fs::path& out_dir) {
  Bundle b(cfg, out_dir);
  b.json_file("config_echo.json", validation_report(cfg));
  const std::string& s = cfg.scenario();
  if (s == "passive") run_passive(cfg, b);
  else if (s == "active") run_active(cfg, b);
  else if (s == "reverse") run_reverse(cfg, b);
  else if (s == "hbt") run_hbt(cfg, b);
  else if (s == "modes") run_modes(cfg, b);
  else if (s == "fit") run_fit(cfg, b);
  else if (s == "budget") run_budget(cfg, b);
  else if (s == "free_space") run_free_space(cfg, b);
  else throw InvalidArgument("no runner for scenario '" + s + "'");
  return b.finish();
}

json validation_report(const Config& cfg) {
  return {{"scenario", cfg.scenario()}, {"valid", true},        {"config_hash", cfg.hash()},
          {"fields", cfg.echo()},       {"assumptions", cfg.assumptions()}};
}

json error_json(const std::exception& e) {
  json err{{"message", e.what()}, {"kind", "error"}};
  if (const auto* ne = dynamic_cast<const Error*>(&e)) err["kind"] = ne->kind();
  if (const auto* ce = dynamic_cast<const config::ConfigError*>(&e)) {
    if (!ce->field().empty()) err["field"] = ce->field();
    if (ce->line() > 0) {
      err["line"] = ce->line();
      err["column"] = ce->column();
    }
  }
  if (const auto* fd = dynamic_cast<const FieldDivergence*>(&e)) err["step"] = fd->step();
  return {{"error", err}};
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SweepSpec parse_sweep(const Config& cfg, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw InvalidArgument("sweep parameter must look like path=lo:hi:n or path=a,b,c");
  SweepSpec s;
  s.path = trim(text.substr(0, eq));
  const std::string range = trim(text.substr(eq + 1));
  const config::FieldSpec* spec = nullptr;
  for (const auto& f : config::schema(cfg.scenario()))
    if (f.path == s.path) spec = &f;
  if (!spec) throw config::ConfigError("scenario '" + cfg.scenario() + "' has no field '" + s.path + "'", s.path);
  if (s.path == "scenario" || s.path == "output_dir")
    throw config::ConfigError("field " + s.path + " cannot be swept", s.path);

  if (range.find(':') != std::string::npos) {
    if (spec->kind != config::Kind::number && spec->kind != config::Kind::integer)
      throw config::ConfigError("range sweeps need a numeric field, " + s.path + " is not", s.path);
    std::vector<std::string> parts;
    std::stringstream ss(range);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 3) throw InvalidArgument("range sweep must be lo:hi:n");
    const double lo = config::parse_value(*spec, parts[0]).get<double>();
    const double hi = config::parse_value(*spec, parts[1]).get<double>();
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(parts[2], &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != parts[2].size() || n < 1) throw InvalidArgument("sweep count must be a positive integer");
    for (double v : linspace(lo, hi, n)) {
      if (spec->kind == config::Kind::integer) s.values.push_back(std::llround(v));
      else s.values.push_back(v);
    }
  } else {
    std::stringstream ss(range);
    for (std::string p; std::getline(ss, p, ',');) s.values.push_back(config::parse_value(*spec, trim(p)));
  }
  if (s.values.empty()) throw InvalidArgument("sweep has no values");
  // validate every point before running any
  for (const auto& v : s.values) {
    Config probe = cfg;
    probe.set(s.path, v);
  }
  return s;
}

json run_sweep(const Config& cfg, const SweepSpec& sweep, const fs::path& out_dir, int jobs) {
  const std::size_t n = sweep.values.size();
  std::vector<json> points(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const fs::path dir = out_dir / ("point_" + std::to_string(k));
      json p{{"index", k}, {"value", sweep.values[k]}, {"dir", dir.filename().string()}};
      try {
        Config c = cfg;
        c.set(sweep.path, sweep.values[k]);
        p["headline"] = run_scenario(c, dir).at("headline");
        p["status"] = "ok";
      } catch (const std::exception& e) {
        const json err = error_json(e);
        try {
          write_json(dir / "error.json", err);
        } catch (const std::exception&) {
        }
        p["status"] = "error";
        p["error"] = err.at("error");
      }
      points[k] = std::move(p);
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json s{{"scenario", cfg.scenario()}, {"config_hash", cfg.hash()}, {"parameter", sweep.path}, {"points", points}};
  write_json(out_dir / "sweep.json", s);
  return s;
}

}  // namespace nwsps::scenario
