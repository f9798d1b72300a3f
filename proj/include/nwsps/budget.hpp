#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace nwsps::budget {

enum class Provenance { measured_paper, fdtd_simulated, assumption };

std::string provenance_name(Provenance p);
Provenance parse_provenance(const std::string& text);

struct EfficiencyFactor {
  std::string name;
  double value = 1.0;  // (0, 1]
  Provenance provenance = Provenance::assumption;
  std::string note;

  void validate() const;
};

enum class Scenario { passive, active, reverse, free_space };

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& text);

class EfficiencyLedger {
public:
  EfficiencyLedger(Scenario scenario, std::vector<EfficiencyFactor> factors);

  Scenario scenario() const { return scenario_; }
  const std::vector<EfficiencyFactor>& factors() const { return factors_; }
  // Product of the factor values, recomputed on every call.
  double eta() const;
  const EfficiencyFactor& factor(const std::string& name) const;
  EfficiencyLedger without(const std::string& name) const;
  EfficiencyLedger with_value(const std::string& name, double value, Provenance provenance) const;

  // {scenario, factors: [{name, value, provenance, note}], eta}
  nlohmann::json to_json() const;

private:
  Scenario scenario_;
  std::vector<EfficiencyFactor> factors_;
};

// Rejects any factor outside (0, 1], naming it.
EfficiencyLedger compose(Scenario scenario, std::vector<EfficiencyFactor> factors);

// Ratio of background-subtracted PL areas.
double relative_efficiency(double pl_waveguide, double pl_direct, double background_waveguide = 0.0,
                           double background_direct = 0.0);

struct Corrected {
  double value = 0.0;
  bool unphysical = false;  // value > 1, returned unclamped
};
Corrected corrected_addressing(double relative, double input_correction);

// exp(-alpha L)
double propagation_transmission(double alpha, double length);

struct ReverseCheck {
  double fraction = 0.0;
  double reference = 0.20;
  bool within_band = false;  // [0.05, 0.30]
};
ReverseCheck reverse_coupling_check(double emitted_into_wire, double total_emitted);

// Frozen default factor chains.
struct ChainInputs {
  double coupling = 0.07;          // fraction of the beam entering the wire
  double wire_k_405 = 0.0032;      // extinction coefficient at the pump
  double wire_length = 7.5e-6;
  double pump_wavelength = 405e-9;
  double wire_diameter = 280e-9;
  double sigma_eff = 1.634e-15;    // m^2
  double facet_overlap = 0.6;
  double quantum_efficiency = 0.73;
  double collection = 0.5;
  double optics = 0.517;
  double detector = 0.6;
  double free_space_waist = 800e-9;  // 1/e^2 diameter
  double mode_matching = 0.151;
};

EfficiencyLedger passive_ledger(const ChainInputs& in);
EfficiencyLedger free_space_ledger(const ChainInputs& in);
// Relative efficiency of the active case: spot overlap x addressing.
EfficiencyLedger active_ledger(double spot_overlap = 0.35, double relative = 0.011);
EfficiencyLedger reverse_ledger(double guided_fraction, Provenance provenance);

}  // namespace nwsps::budget
