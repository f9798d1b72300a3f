#include "nwsps/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>

#include "nwsps/csv.hpp"
#include "nwsps/error.hpp"

namespace nwsps::emitter {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::int64_t to_ps(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1e12)); }

// Telegraph on/off state sampled at increasing times.
class Telegraph {
public:
  Telegraph(const Blinking& b, std::mt19937_64& rng) : b_(b), rng_(rng) {
    if (b_.enabled) next_ = draw(b_.on_to_off_rate);
  }

  bool on_at(double t) {
    if (!b_.enabled) return true;
    while (next_ <= t) {
      on_ = !on_;
      next_ += draw(on_ ? b_.on_to_off_rate : b_.off_to_on_rate);
    }
    return on_;
  }

private:
  double draw(double rate) {
    if (rate <= 0.0) return INFINITY;
    return std::exponential_distribution<double>(rate)(rng_);
  }

  Blinking b_;
  std::mt19937_64& rng_;
  bool on_ = true;
  double next_ = INFINITY;
};

}  // namespace

void EmitterParams::validate() const {
  if (!(sigma_abs > 0.0)) throw InvalidArgument("emitter sigma_abs must be positive");
  if (!(quantum_efficiency >= 0.0 && quantum_efficiency <= 1.0))
    throw InvalidArgument("emitter quantum_efficiency must lie in [0, 1]");
  if (!(lifetime > 0.0)) throw InvalidArgument("emitter lifetime must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("emitter wavelength must be positive");
  if (blinking.enabled && (blinking.on_to_off_rate < 0.0 || blinking.off_to_on_rate < 0.0))
    throw InvalidArgument("blinking rates must be >= 0");
}

void PumpPulseTrain::validate() const {
  if (!(period > 0.0)) throw InvalidArgument("pump period must be positive");
  if (!(pulse_width >= 0.0 && pulse_width < 0.1 * period))
    throw InvalidArgument("pump pulse width must be much shorter than the period");
  if (!(fluence >= 0.0)) throw InvalidArgument("pump fluence must be >= 0");
  if (pulses < 1) throw InvalidArgument("pump needs at least one pulse");
}

std::vector<std::string> PumpPulseTrain::warnings(const EmitterParams& params) const {
  std::vector<std::string> w;
  if (period < 5.0 * params.lifetime)
    w.push_back("pump period is less than 5 lifetimes; pulses will often find the emitter still excited");
  return w;
}

double resonant_cross_section(double wavelength) {
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  return 3.0 * wavelength * wavelength / (2.0 * kPi);
}

double excitation_probability(double fluence, double sigma_eff) {
  if (fluence < 0.0) throw InvalidArgument("fluence must be >= 0");
  if (sigma_eff < 0.0) throw InvalidArgument("cross-section must be >= 0");
  return -std::expm1(-fluence * sigma_eff);
}

std::vector<std::int64_t> generate_emission_stream(const EmitterParams& params, const PumpPulseTrain& pump,
                                                   std::uint64_t seed) {
  params.validate();
  pump.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> decay(1.0 / params.lifetime);
  Telegraph blink(params.blinking, rng);
  const double p_exc = excitation_probability(pump.fluence, params.sigma_abs);
  const std::int64_t period_ps = to_ps(pump.period);

  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(pump.pulses) * p_exc * params.quantum_efficiency * 1.05) + 16);
  double busy_until = -1.0;
  for (std::int64_t k = 0; k < pump.pulses; ++k) {
    const double t = static_cast<double>(k) * pump.period;
    if (t < busy_until) continue;
    if (!blink.on_at(t)) continue;
    if (uni(rng) >= p_exc) continue;
    const double d = decay(rng);
    busy_until = t + d;
    if (uni(rng) < params.quantum_efficiency) out.push_back(k * period_ps + to_ps(d));
  }
  return out;
}

std::vector<std::int64_t> generate_coherent_stream(const PumpPulseTrain& pump, double mean_photons,
                                                   std::uint64_t seed) {
  pump.validate();
  if (!(mean_photons >= 0.0)) throw InvalidArgument("mean photon number must be >= 0");
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> count(mean_photons);
  std::normal_distribution<double> spread(0.0, pump.pulse_width / 2.3548200450309493);
  const std::int64_t period_ps = to_ps(pump.period);
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k < pump.pulses; ++k) {
    const int n = mean_photons > 0.0 ? count(rng) : 0;
    for (int p = 0; p < n; ++p) out.push_back(k * period_ps + to_ps(std::abs(spread(rng))));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::int64_t> generate_cw_stream(const EmitterParams& params, double excitation_rate, double duration,
                                             std::uint64_t seed) {
  params.validate();
  if (!(excitation_rate > 0.0)) throw InvalidArgument("excitation rate must be positive");
  if (!(duration > 0.0)) throw InvalidArgument("duration must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> wait(excitation_rate);
  std::exponential_distribution<double> decay(1.0 / params.lifetime);
  std::vector<std::int64_t> out;
  double t = 0.0;
  while (true) {
    t += wait(rng);
    t += decay(rng);
    if (t > duration) break;
    if (uni(rng) < params.quantum_efficiency) out.push_back(to_ps(t));
  }
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string params_fingerprint(const EmitterParams& params, const PumpPulseTrain& pump) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "sigma_abs=%.17g;qe=%.17g;lifetime=%.17g;wavelength=%.17g;facet_offset=%.17g;blink=%d,%.17g,%.17g;"
                "period=%.17g;width=%.17g;fluence=%.17g;pulses=%lld",
                params.sigma_abs, params.quantum_efficiency, params.lifetime, params.wavelength, params.facet_offset,
                params.blinking.enabled ? 1 : 0, params.blinking.on_to_off_rate, params.blinking.off_to_on_rate,
                pump.period, pump.pulse_width, pump.fluence, static_cast<long long>(pump.pulses));
  return fnv1a_hex(buf);
}

void write_timestamps_csv(std::ostream& out, const std::vector<std::int64_t>& t_ps, const std::string& params_hash) {
  out << "# params " << params_hash << "\r\n";
  out << "t_ps\r\n";
  for (std::int64_t t : t_ps) out << t << "\r\n";
}

std::vector<std::int64_t> read_timestamps_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t c = table.column("t_ps");
  std::vector<std::int64_t> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& f = table.rows[r][c];
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(f, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != f.size())
      throw InvalidArgument("timestamp CSV row " + std::to_string(r + 1) + ": not an integer");
    if (!out.empty() && v < out.back())
      throw InvalidArgument("timestamp CSV row " + std::to_string(r + 1) + ": timestamps must be non-decreasing");
    out.push_back(v);
  }
  return out;
}

}  // namespace nwsps::emitter
