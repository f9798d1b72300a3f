#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nwsps::emitter {

// Two-state on/off switching; rates in 1/s.
struct Blinking {
  bool enabled = false;
  double on_to_off_rate = 0.0;
  double off_to_on_rate = 0.0;
};

struct EmitterParams {
  double sigma_abs = 1.634e-15;  // effective cross-section at the pump, m^2
  double quantum_efficiency = 0.73;
  double lifetime = 20e-9;  // s
  double wavelength = 585e-9;
  double facet_offset = 50e-9;
  Blinking blinking;

  void validate() const;
};

struct PumpPulseTrain {
  double period = 200e-9;       // s
  double pulse_width = 50e-12;  // s
  double fluence = 0.0;         // photons/m^2 at the emitter
  std::int64_t pulses = 1;

  void validate() const;
  // Non-fatal remarks (e.g. period not much longer than the lifetime).
  std::vector<std::string> warnings(const EmitterParams& params) const;
};

// 3 lambda^2 / (2 pi)
double resonant_cross_section(double wavelength);

// 1 - exp(-fluence * sigma)
double excitation_probability(double fluence, double sigma_eff);

// Photon emission times in integer picoseconds, sorted. At most one photon
// per pulse; a pulse arriving while the emitter is still excited is wasted.
std::vector<std::int64_t> generate_emission_stream(const EmitterParams& params, const PumpPulseTrain& pump,
                                                   std::uint64_t seed);

// Attenuated laser reference: Poisson(mean_photons) photons per pulse, each
// delayed by a Gaussian of the pulse width.
std::vector<std::int64_t> generate_coherent_stream(const PumpPulseTrain& pump, double mean_photons,
                                                   std::uint64_t seed);

// Continuous pumping at `excitation_rate` (1/s) over `duration` s: a renewal
// process of excitation wait plus exponential decay.
std::vector<std::int64_t> generate_cw_stream(const EmitterParams& params, double excitation_rate, double duration,
                                             std::uint64_t seed);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& text);
std::string params_fingerprint(const EmitterParams& params, const PumpPulseTrain& pump);

// "# params <hash>" header line, a "t_ps" column header, then one integer
// timestamp per line.
void write_timestamps_csv(std::ostream& out, const std::vector<std::int64_t>& t_ps, const std::string& params_hash);
std::vector<std::int64_t> read_timestamps_csv(std::istream& in);

}  // namespace nwsps::emitter
