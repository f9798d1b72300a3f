#include "nwsps/budget.hpp"

#include <algorithm>
#include <cmath>

#include "nwsps/attenuation.hpp"
#include "nwsps/csv.hpp"
#include "nwsps/error.hpp"

namespace nwsps::budget {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::measured_paper: return "measured-paper";
    case Provenance::fdtd_simulated: return "fdtd-simulated";
    case Provenance::assumption: return "assumption";
  }
  return "?";
}

Provenance parse_provenance(const std::string& text) {
  for (Provenance p : {Provenance::measured_paper, Provenance::fdtd_simulated, Provenance::assumption})
    if (provenance_name(p) == text) return p;
  throw InvalidArgument("unknown provenance '" + text + "'");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::passive: return "passive";
    case Scenario::active: return "active";
    case Scenario::reverse: return "reverse";
    case Scenario::free_space: return "free_space";
  }
  return "?";
}

Scenario parse_scenario(const std::string& text) {
  for (Scenario s : {Scenario::passive, Scenario::active, Scenario::reverse, Scenario::free_space})
    if (scenario_name(s) == text) return s;
  throw InvalidArgument("unknown ledger scenario '" + text + "'");
}

void EfficiencyFactor::validate() const {
  if (name.empty()) throw InvalidArgument("efficiency factor needs a name");
  if (!(value > 0.0 && value <= 1.0))
    throw InvalidArgument("efficiency factor '" + name + "' must lie in (0, 1], got " + std::to_string(value));
}

EfficiencyLedger::EfficiencyLedger(Scenario scenario, std::vector<EfficiencyFactor> factors)
    : scenario_(scenario), factors_(std::move(factors)) {
  for (const auto& f : factors_) f.validate();
}

double EfficiencyLedger::eta() const {
  double p = 1.0;
  for (const auto& f : factors_) p *= f.value;
  return p;
}

const EfficiencyFactor& EfficiencyLedger::factor(const std::string& name) const {
  for (const auto& f : factors_)
    if (f.name == name) return f;
  throw InvalidArgument("ledger has no factor '" + name + "'");
}

EfficiencyLedger EfficiencyLedger::without(const std::string& name) const {
  factor(name);
  std::vector<EfficiencyFactor> rest;
  for (const auto& f : factors_)
    if (f.name != name) rest.push_back(f);
  return EfficiencyLedger(scenario_, std::move(rest));
}

EfficiencyLedger EfficiencyLedger::with_value(const std::string& name, double value, Provenance provenance) const {
  factor(name);
  std::vector<EfficiencyFactor> out = factors_;
  for (auto& f : out)
    if (f.name == name) {
      f.value = value;
      f.provenance = provenance;
    }
  return EfficiencyLedger(scenario_, std::move(out));
}

nlohmann::json EfficiencyLedger::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario_name(scenario_);
  j["factors"] = nlohmann::json::array();
  for (const auto& f : factors_)
    j["factors"].push_back(
        {{"name", f.name}, {"value", f.value}, {"provenance", provenance_name(f.provenance)}, {"note", f.note}});
  j["eta"] = eta();
  return j;
}

EfficiencyLedger compose(Scenario scenario, std::vector<EfficiencyFactor> factors) {
  return EfficiencyLedger(scenario, std::move(factors));
}

double relative_efficiency(double pl_waveguide, double pl_direct, double background_waveguide,
                           double background_direct) {
  const double direct = pl_direct - background_direct;
  if (!(direct > 0.0)) throw InvalidArgument("direct-excitation PL must be positive after background subtraction");
  return (pl_waveguide - background_waveguide) / direct;
}

Corrected corrected_addressing(double relative, double input_correction) {
  if (!(input_correction > 0.0 && input_correction <= 1.0))
    throw InvalidArgument("input correction must lie in (0, 1]");
  Corrected c;
  c.value = relative / input_correction;
  c.unphysical = c.value > 1.0;
  return c;
}

double propagation_transmission(double alpha, double length) {
  if (alpha < 0.0) throw InvalidArgument("alpha must be >= 0");
  if (length < 0.0) throw InvalidArgument("length must be >= 0");
  return std::exp(-alpha * length);
}

ReverseCheck reverse_coupling_check(double emitted_into_wire, double total_emitted) {
  if (!(total_emitted > 0.0)) throw InvalidArgument("total emitted must be positive");
  if (emitted_into_wire < 0.0) throw InvalidArgument("emitted-into-wire must be >= 0");
  ReverseCheck r;
  r.fraction = emitted_into_wire / total_emitted;
  if (r.fraction > 1.0) throw InvalidArgument("reverse-coupled fraction exceeds 1");
  r.within_band = r.fraction >= 0.05 && r.fraction <= 0.30;
  return r;
}

EfficiencyLedger passive_ledger(const ChainInputs& in) {
  const double alpha = attenuation::bulk_alpha(0.0, in.wire_k_405, in.pump_wavelength);
  const double radius = 0.5 * in.wire_diameter;
  return compose(Scenario::passive,
                 {
                     {"coupling", in.coupling, Provenance::measured_paper, "fraction of the 405 nm beam guided by the wire"},
                     {"propagation", propagation_transmission(alpha, in.wire_length), Provenance::assumption,
                      "exp(-alpha L) with k = " + csv::format_number(in.wire_k_405) + " at the pump"},
                     {"facet_overlap", in.facet_overlap, Provenance::assumption,
                      "fraction of the output-facet light reaching the emitter"},
                     {"sigma_capture", in.sigma_eff / (kPi * radius * radius), Provenance::assumption,
                      "effective cross-section over the facet area"},
                     {"quantum_efficiency", in.quantum_efficiency, Provenance::measured_paper, "PL quantum efficiency"},
                     {"collection", in.collection, Provenance::assumption, "objective collection fraction"},
                     {"optics", in.optics, Provenance::assumption, "transmission of the detection path (calibrated)"},
                     {"detector", in.detector, Provenance::assumption, "detector efficiency"},
                 });
}

EfficiencyLedger free_space_ledger(const ChainInputs& in) {
  const double w0 = 0.5 * in.free_space_waist;
  return compose(Scenario::free_space,
                 {
                     {"sigma_capture", in.sigma_eff / (0.5 * kPi * w0 * w0), Provenance::assumption,
                      "effective cross-section over the Gaussian peak area pi w0^2 / 2"},
                     {"mode_matching", in.mode_matching, Provenance::assumption,
                      "focus and alignment quality of direct excitation (calibrated)"},
                     {"quantum_efficiency", in.quantum_efficiency, Provenance::measured_paper, "PL quantum efficiency"},
                     {"collection", in.collection, Provenance::assumption, "objective collection fraction"},
                     {"optics", in.optics, Provenance::assumption, "transmission of the detection path (calibrated)"},
                     {"detector", in.detector, Provenance::assumption, "detector efficiency"},
                 });
}

EfficiencyLedger active_ledger(double spot_overlap, double relative) {
  const Corrected c = corrected_addressing(relative, spot_overlap);
  if (c.unphysical) throw InvalidArgument("active ledger: relative efficiency exceeds the spot overlap");
  return compose(Scenario::active,
                 {
                     {"spot_overlap", spot_overlap, Provenance::measured_paper, "wire diameter over laser spot (280/800 nm)"},
                     {"addressing", c.value, Provenance::measured_paper,
                      "relative efficiency " + csv::format_number(relative) + " corrected for the spot overlap"},
                 });
}

EfficiencyLedger reverse_ledger(double guided_fraction, Provenance provenance) {
  return compose(Scenario::reverse,
                 {{"guided_fraction", guided_fraction, provenance, "emitter light guided back into the wire"}});
}

}  // namespace nwsps::budget
