#include "nwsps/hbt.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nwsps/csv.hpp"
#include "nwsps/error.hpp"

namespace nwsps::hbt {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Poisson arrivals on [0, span_ps) at `rate` Hz.
void add_poisson(std::vector<std::int64_t>& out, double rate, double span_ps, std::mt19937_64& rng) {
  if (rate <= 0.0) return;
  std::exponential_distribution<double> gap(rate * 1e-12);
  double t = gap(rng);
  while (t < span_ps) {
    out.push_back(static_cast<std::int64_t>(t));
    t += gap(rng);
  }
}

struct Arm {
  const DetectorModel* det;
  std::vector<std::int64_t> raw;
};

}  // namespace

void DetectorModel::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw InvalidArgument("detector efficiency must lie in [0, 1]");
  if (!(dark_rate >= 0.0)) throw InvalidArgument("detector dark_rate must be >= 0");
  if (!(jitter_ps >= 0.0)) throw InvalidArgument("detector jitter must be >= 0");
  if (!(dead_time_ps >= 0.0)) throw InvalidArgument("detector dead time must be >= 0");
}

std::vector<std::int64_t> apply_dead_time(const std::vector<std::int64_t>& sorted_ps, double dead_time_ps) {
  std::vector<std::int64_t> out;
  out.reserve(sorted_ps.size());
  for (std::int64_t t : sorted_ps) {
    if (out.empty() || static_cast<double>(t - out.back()) >= dead_time_ps) out.push_back(t);
  }
  return out;
}

std::pair<TimeTagStream, TimeTagStream> split_and_detect(const std::vector<std::int64_t>& photons_ps,
                                                         double background_rate, const DetectorModel& det_a,
                                                         const DetectorModel& det_b, double t_acq,
                                                         std::uint64_t seed) {
  det_a.validate();
  det_b.validate();
  if (!(background_rate >= 0.0)) throw InvalidArgument("background rate must be >= 0");
  if (!(t_acq > 0.0)) throw InvalidArgument("acquisition time must be positive");
  const double span_ps = t_acq * 1e12;
  if (!std::is_sorted(photons_ps.begin(), photons_ps.end())) throw InvalidArgument("photon timestamps must be sorted");
  if (!photons_ps.empty() && (photons_ps.front() < 0 || static_cast<double>(photons_ps.back()) > span_ps))
    throw InvalidArgument("acquisition time does not cover the photon stream");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Arm arms[2] = {{&det_a, {}}, {&det_b, {}}};
  for (std::int64_t t : photons_ps) {
    Arm& arm = arms[uni(rng) < 0.5 ? 0 : 1];
    if (uni(rng) < arm.det->efficiency) arm.raw.push_back(t);
  }
  for (Arm& arm : arms) {
    std::vector<std::int64_t> bg;
    add_poisson(bg, 0.5 * background_rate, span_ps, rng);
    for (std::int64_t t : bg)
      if (uni(rng) < arm.det->efficiency) arm.raw.push_back(t);
    add_poisson(arm.raw, arm.det->dark_rate, span_ps, rng);
  }

  TimeTagStream out[2];
  out[0].detector = 'A';
  out[1].detector = 'B';
  for (int k = 0; k < 2; ++k) {
    std::vector<std::int64_t>& raw = arms[k].raw;
    std::sort(raw.begin(), raw.end());
    if (arms[k].det->jitter_ps > 0.0) {
      std::normal_distribution<double> jitter(0.0, arms[k].det->jitter_ps);
      for (std::int64_t& t : raw) t += static_cast<std::int64_t>(std::llround(jitter(rng)));
      std::sort(raw.begin(), raw.end());
    }
    out[k].t_ps = apply_dead_time(raw, arms[k].det->dead_time_ps);
  }
  return {std::move(out[0]), std::move(out[1])};
}

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

CoincidenceHistogram correlate(const TimeTagStream& a, const TimeTagStream& b, std::int64_t bin_width_ps,
                               std::int64_t tau_max_ps, double t_acq) {
  if (bin_width_ps <= 0) throw InvalidArgument("bin width must be positive");
  if (tau_max_ps < 0) throw InvalidArgument("tau_max must be >= 0");
  if (!std::is_sorted(a.t_ps.begin(), a.t_ps.end()) || !std::is_sorted(b.t_ps.begin(), b.t_ps.end()))
    throw InvalidArgument("time-tag streams must be sorted");

  CoincidenceHistogram h;
  h.bin_width_ps = bin_width_ps;
  h.half_bins = static_cast<int>(tau_max_ps / bin_width_ps);
  h.singles_a = a.t_ps.size();
  h.singles_b = b.t_ps.size();
  h.t_acq = t_acq;
  const std::size_t nbins = static_cast<std::size_t>(2 * h.half_bins + 1);
  h.counts.assign(nbins, 0);

  const std::int64_t half_w = bin_width_ps / 2;
  const std::int64_t lo = -static_cast<std::int64_t>(h.half_bins) * bin_width_ps - half_w;  // inclusive
  const std::int64_t hi = lo + static_cast<std::int64_t>(nbins) * bin_width_ps;             // exclusive
  const auto& ta = a.t_ps;
  const auto& tb = b.t_ps;
  const std::int64_t na = static_cast<std::int64_t>(ta.size());

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(nbins, 0);
    int nthreads = 1, tid = 0;
#ifdef _OPENMP
    nthreads = omp_get_num_threads();
    tid = omp_get_thread_num();
#endif
    const std::int64_t begin = na * tid / nthreads, end = na * (tid + 1) / nthreads;
    std::size_t j = begin < end ? static_cast<std::size_t>(std::lower_bound(tb.begin(), tb.end(), ta[begin] + lo) - tb.begin())
                                : 0;
    for (std::int64_t i = begin; i < end; ++i) {
      const std::int64_t t = ta[i];
      while (j < tb.size() && tb[j] < t + lo) ++j;
      for (std::size_t m = j; m < tb.size() && tb[m] < t + hi; ++m)
        ++local[static_cast<std::size_t>(floor_div(tb[m] - t - lo, bin_width_ps))];
    }
#pragma omp critical
    for (std::size_t k = 0; k < nbins; ++k) h.counts[k] += local[k];
  }
  return h;
}

G2Estimate g2_pulsed_zero(const CoincidenceHistogram& hist, std::int64_t period_ps, std::int64_t peak_window_ps) {
  if (period_ps <= 0) throw InvalidArgument("pulse period must be positive");
  if (peak_window_ps <= 0 || 2 * peak_window_ps > period_ps)
    throw InvalidArgument("peak window must be positive and at most half the period");
  const std::int64_t reach = static_cast<std::int64_t>(hist.half_bins) * hist.bin_width_ps;
  auto area = [&](std::int64_t centre) {
    double s = 0.0;
    for (int k = -hist.half_bins; k <= hist.half_bins; ++k)
      if (std::llabs(hist.tau_ps(k) - centre) <= peak_window_ps) s += static_cast<double>(hist.at(k));
    return s;
  };
  G2Estimate g;
  g.center_counts = area(0);
  double side_sum = 0.0;
  for (std::int64_t m = 1; m * period_ps + peak_window_ps <= reach; ++m) {
    side_sum += area(m * period_ps) + area(-m * period_ps);
    g.side_peaks += 2;
  }
  if (g.side_peaks < 6)
    throw InvalidArgument("g2 estimate needs at least 6 side peaks inside the histogram range, found " +
                          std::to_string(g.side_peaks));
  if (side_sum <= 0.0) throw InvalidArgument("insufficient statistics: side peaks are empty");
  g.side_mean = side_sum / g.side_peaks;
  g.g2_0 = g.center_counts / g.side_mean;
  g.sigma = std::sqrt(std::max(g.center_counts, 1.0) / (g.side_mean * g.side_mean) + g.g2_0 * g.g2_0 / side_sum);
  return g;
}

std::vector<double> g2_cw(const CoincidenceHistogram& hist) {
  if (hist.singles_a == 0 || hist.singles_b == 0) throw InvalidArgument("g2 normalization needs non-zero singles");
  if (!(hist.t_acq > 0.0)) throw InvalidArgument("acquisition time must be positive");
  const double norm = hist.t_acq * 1e12 /
                      (static_cast<double>(hist.singles_a) * static_cast<double>(hist.singles_b) *
                       static_cast<double>(hist.bin_width_ps));
  std::vector<double> g(hist.counts.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = static_cast<double>(hist.counts[k]) * norm;
  return g;
}

double counts_in_peak_windows(const std::vector<std::int64_t>& tags_ps, std::int64_t period_ps,
                              std::int64_t window_ps) {
  if (period_ps <= 0) throw InvalidArgument("pulse period must be positive");
  double n = 0.0;
  for (std::int64_t t : tags_ps) {
    const std::int64_t k = floor_div(t + period_ps / 2, period_ps);
    if (std::llabs(t - k * period_ps) <= window_ps) n += 1.0;
  }
  return n;
}

double background_rate_for_fraction(double rho, double signal_per_arm_per_pulse, double period, double window,
                                    const DetectorModel& det) {
  if (!(rho > 0.0 && rho <= 1.0)) throw InvalidArgument("signal fraction must lie in (0, 1]");
  if (!(signal_per_arm_per_pulse > 0.0)) throw InvalidArgument("signal counts must be positive");
  if (!(period > 0.0 && window > 0.0 && 2.0 * window <= period))
    throw InvalidArgument("peak window must be positive and at most half the period");
  if (!(det.efficiency > 0.0)) throw InvalidArgument("detector efficiency must be positive");
  const double background_per_window = signal_per_arm_per_pulse * (1.0 - rho) / rho;
  const double per_arm_rate = background_per_window / (2.0 * window);
  return std::max(0.0, 2.0 * (per_arm_rate - det.dark_rate) / det.efficiency);
}

PulsedResult run_pulsed_experiment(const PulsedExperiment& exp, std::uint64_t seed) {
  const std::int64_t period_ps = static_cast<std::int64_t>(std::llround(exp.pump.period * 1e12));
  const std::int64_t window_ps = static_cast<std::int64_t>(std::llround(exp.window_fraction * exp.pump.period * 1e12));
  PulsedResult r;
  const std::vector<std::int64_t> photons =
      exp.light == PulsedExperiment::Light::single_emitter
          ? emitter::generate_emission_stream(exp.emitter, exp.pump, seed)
          : emitter::generate_coherent_stream(exp.pump, exp.coherent_mean_photons, seed);
  r.photons = photons.size();
  // Acquisition covers every pulse plus one period of tail.
  const double t_acq = static_cast<double>(exp.pump.pulses + 1) * exp.pump.period;

  if (exp.signal_fraction < 1.0) {
    DetectorModel quiet_a = exp.det_a, quiet_b = exp.det_b;
    quiet_a.dark_rate = quiet_b.dark_rate = 0.0;
    const auto [sa, sb] = split_and_detect(photons, 0.0, quiet_a, quiet_b, t_acq, seed + 1);
    r.signal_per_arm_per_pulse = 0.5 *
                                 (counts_in_peak_windows(sa.t_ps, period_ps, window_ps) +
                                  counts_in_peak_windows(sb.t_ps, period_ps, window_ps)) /
                                 static_cast<double>(exp.pump.pulses);
    DetectorModel mean_det = exp.det_a;
    mean_det.efficiency = 0.5 * (exp.det_a.efficiency + exp.det_b.efficiency);
    mean_det.dark_rate = 0.5 * (exp.det_a.dark_rate + exp.det_b.dark_rate);
    r.background_rate = background_rate_for_fraction(exp.signal_fraction, r.signal_per_arm_per_pulse, exp.pump.period,
                                                     exp.window_fraction * exp.pump.period, mean_det);
  }
  const auto [a, b] = split_and_detect(photons, r.background_rate, exp.det_a, exp.det_b, t_acq, seed + 1);
  r.hist = correlate(a, b, exp.bin_width_ps,
                     static_cast<std::int64_t>(std::llround(exp.tau_max_periods * exp.pump.period * 1e12)), t_acq);
  r.g2 = g2_pulsed_zero(r.hist, period_ps, window_ps);
  return r;
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist, const std::string& provenance_line) {
  out << provenance_line << "\r\n";
  csv::write_row(out, {"tau_ps", "counts"});
  for (int k = -hist.half_bins; k <= hist.half_bins; ++k)
    csv::write_row(out, {std::to_string(hist.tau_ps(k)), std::to_string(hist.at(k))});
}

nlohmann::json summary_json(const G2Estimate& g, std::int64_t pulses) {
  nlohmann::json j;
  j["g2_0"] = g.g2_0;
  j["sigma"] = g.sigma;
  j["n_pulses"] = pulses;
  j["center_counts"] = g.center_counts;
  j["side_peak_mean"] = g.side_mean;
  j["verdict"] = g.single_photon() ? "single-photon source: yes" : "single-photon source: no";
  return j;
}

}  // namespace nwsps::hbt
