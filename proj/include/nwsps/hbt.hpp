#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nwsps/emitter.hpp"

namespace nwsps::hbt {

struct DetectorModel {
  double efficiency = 0.6;
  double dark_rate = 100.0;         // Hz
  double jitter_ps = 350.0;         // Gaussian sigma
  double dead_time_ps = 50000.0;

  void validate() const;
};

struct TimeTagStream {
  char detector = 'A';
  std::vector<std::int64_t> t_ps;  // non-decreasing, spaced by at least the dead time
};

// Route every photon to A or B with probability 1/2, add Poisson background
// (rate split equally between the arms) and dark counts, apply efficiency and
// jitter, then drop tags inside the dead time of the previous kept tag.
std::pair<TimeTagStream, TimeTagStream> split_and_detect(const std::vector<std::int64_t>& photons_ps,
                                                         double background_rate, const DetectorModel& det_a,
                                                         const DetectorModel& det_b, double t_acq,
                                                         std::uint64_t seed);

// Non-paralyzable dead-time filter over sorted tags.
std::vector<std::int64_t> apply_dead_time(const std::vector<std::int64_t>& sorted_ps, double dead_time_ps);

struct CoincidenceHistogram {
  std::int64_t bin_width_ps = 512;
  int half_bins = 0;                  // bins k = -half_bins .. half_bins
  std::vector<std::uint64_t> counts;  // index k + half_bins
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  double t_acq = 0.0;  // s

  std::int64_t tau_ps(int k) const { return static_cast<std::int64_t>(k) * bin_width_ps; }
  std::uint64_t at(int k) const { return counts[static_cast<std::size_t>(k + half_bins)]; }
  std::uint64_t total() const;
};

// All pairwise delays t_B - t_A with bin centres k * bin_width covering
// [-tau_max, tau_max]; bin k spans [k w - w/2, k w + w/2).
CoincidenceHistogram correlate(const TimeTagStream& a, const TimeTagStream& b, std::int64_t bin_width_ps,
                               std::int64_t tau_max_ps, double t_acq);

struct G2Estimate {
  double g2_0 = 0.0;
  double sigma = 0.0;
  double center_counts = 0.0;
  double side_mean = 0.0;
  int side_peaks = 0;

  // g2(0) + sigma < 0.5
  bool single_photon() const { return g2_0 + sigma < 0.5; }
};

// Centre-peak area over the mean side-peak area, peaks integrated over
// |tau - m T| <= peak_window. Side peaks count only when their whole window
// lies inside the histogram.
G2Estimate g2_pulsed_zero(const CoincidenceHistogram& hist, std::int64_t period_ps, std::int64_t peak_window_ps);

// n(tau) T_acq / (N_A N_B w) per bin.
std::vector<double> g2_cw(const CoincidenceHistogram& hist);

// Summed photon counts per pulse window |t - k T| <= window, used to set the
// background for a requested signal fraction.
double counts_in_peak_windows(const std::vector<std::int64_t>& tags_ps, std::int64_t period_ps,
                              std::int64_t window_ps);

// Total background photon rate (both arms, before detection) that makes the
// signal fraction inside the peak windows equal to rho, given the detected
// signal counts per arm per pulse inside those windows.
double background_rate_for_fraction(double rho, double signal_per_arm_per_pulse, double period, double window,
                                    const DetectorModel& det);

// Pulsed HBT run: emitter (or attenuated laser) stream, background tuned to a
// signal fraction rho inside the peak windows, detection, correlation and
// g2(0) extraction.
struct PulsedExperiment {
  enum class Light { single_emitter, coherent };
  Light light = Light::single_emitter;
  emitter::EmitterParams emitter;
  emitter::PumpPulseTrain pump;
  double coherent_mean_photons = 0.2;
  double signal_fraction = 1.0;
  DetectorModel det_a;
  DetectorModel det_b;
  std::int64_t bin_width_ps = 512;
  double tau_max_periods = 5.0;
  double window_fraction = 0.25;  // peak half-width in periods
};

struct PulsedResult {
  G2Estimate g2;
  CoincidenceHistogram hist;
  double background_rate = 0.0;
  double signal_per_arm_per_pulse = 0.0;
  std::size_t photons = 0;
};

PulsedResult run_pulsed_experiment(const PulsedExperiment& exp, std::uint64_t seed);

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist, const std::string& provenance_line);
nlohmann::json summary_json(const G2Estimate& g, std::int64_t pulses);

}  // namespace nwsps::hbt
