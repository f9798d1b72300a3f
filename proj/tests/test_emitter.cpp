#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "nwsps/emitter.hpp"
#include "nwsps/error.hpp"

using namespace nwsps;
using namespace nwsps::emitter;

namespace {

constexpr double kPi = 3.14159265358979323846;

EmitterParams ideal() {
  EmitterParams p;
  p.quantum_efficiency = 1.0;
  p.lifetime = 20e-9;
  return p;
}

PumpPulseTrain train(std::int64_t n, double fluence) {
  PumpPulseTrain t;
  t.period = 200e-9;
  t.pulses = n;
  t.fluence = fluence;
  return t;
}

}  // namespace

TEST_CASE("resonant cross-section") {
  CHECK(resonant_cross_section(585e-9) == doctest::Approx(1.63e-13).epsilon(0.002));
  CHECK(resonant_cross_section(585e-9) == doctest::Approx(3.0 * 585e-9 * 585e-9 / (2.0 * kPi)).epsilon(1e-15));
  CHECK(resonant_cross_section(1e-15) < 1e-30);
  CHECK(resonant_cross_section(1170e-9) == doctest::Approx(4.0 * resonant_cross_section(585e-9)).epsilon(1e-14));
  CHECK_THROWS_AS(resonant_cross_section(0.0), InvalidArgument);
}

TEST_CASE("excitation probability") {
  CHECK(excitation_probability(0.0, 1e-15) == 0.0);
  CHECK(excitation_probability(std::log(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  const double p = excitation_probability(1e-3, 1.0);
  CHECK(std::abs(p - 1e-3) / 1e-3 < 5e-4);
  CHECK(excitation_probability(1e30, 1.0) == 1.0);
  CHECK_THROWS_AS(excitation_probability(-1.0, 1.0), InvalidArgument);
  // monotone and concave on a fine grid
  double prev = 0.0, prev_slope = INFINITY;
  for (int k = 1; k <= 2000; ++k) {
    const double phi = k * 5e-3;
    const double v = excitation_probability(phi, 1.0);
    const double slope = (v - prev) / 5e-3;
    CHECK(v >= prev);
    CHECK(slope <= prev_slope * (1.0 + 1e-12));
    CHECK(v <= 1.0);
    prev = v;
    prev_slope = slope;
  }
}

TEST_CASE("zero quantum efficiency emits nothing") {
  EmitterParams p = ideal();
  p.quantum_efficiency = 0.0;
  CHECK(generate_emission_stream(p, train(10000, 1e20), 1).empty());
}

TEST_CASE("saturated ideal emitter: one photon per period, exponential delays") {
  const std::int64_t n = 1000000;
  const PumpPulseTrain pump = train(n, 1e30);
  const auto s = generate_emission_stream(ideal(), pump, 42);
  REQUIRE(s.size() > 0.999 * n);
  const double mean_gap = static_cast<double>(s.back() - s.front()) / static_cast<double>(s.size() - 1);
  CHECK(std::abs(mean_gap / 200000.0 - 1.0) < 1e-3);
  const std::int64_t period_ps = 200000;
  double sum = 0.0;
  std::int64_t last_window = -1;
  bool unique = true;
  for (std::int64_t t : s) {
    const std::int64_t w = t / period_ps;
    if (w <= last_window) unique = false;
    last_window = w;
    sum += static_cast<double>(t - w * period_ps);
  }
  CHECK(unique);
  CHECK(std::abs(sum / s.size() / 20000.0 - 1.0) < 0.01);
}

TEST_CASE("emitted count concentrates at p_exc * qe") {
  const std::int64_t n = 1000000;
  EmitterParams p;  // qe 0.73
  const double fluence = std::log(2.0) / p.sigma_abs;
  const auto s = generate_emission_stream(p, train(n, fluence), 7);
  const double q = 0.5 * 0.73;
  const double sd = std::sqrt(n * q * (1.0 - q));
  CHECK(std::abs(static_cast<double>(s.size()) - n * q) < 3.0 * sd);
}

TEST_CASE("streams are reproducible from the seed") {
  EmitterParams p;
  const PumpPulseTrain pump = train(20000, 5e14);
  CHECK(generate_emission_stream(p, pump, 3) == generate_emission_stream(p, pump, 3));
  CHECK(generate_emission_stream(p, pump, 3) != generate_emission_stream(p, pump, 4));
  CHECK(generate_coherent_stream(pump, 0.1, 9) == generate_coherent_stream(pump, 0.1, 9));
}

TEST_CASE("blinking removes the off fraction of pulses") {
  EmitterParams p = ideal();
  p.blinking.enabled = true;
  p.blinking.on_to_off_rate = 1e4;
  p.blinking.off_to_on_rate = 3e4;
  const std::int64_t n = 1000000;
  const auto s = generate_emission_stream(p, train(n, 1e30), 5);
  // stationary on fraction 0.75, starting on
  CHECK(static_cast<double>(s.size()) / n == doctest::Approx(0.75).epsilon(0.03));
}

TEST_CASE("coherent stream: Poisson photon numbers per pulse") {
  const std::int64_t n = 200000;
  const auto s = generate_coherent_stream(train(n, 0.0), 0.3, 11);
  CHECK(std::abs(static_cast<double>(s.size()) - 0.3 * n) < 4.0 * std::sqrt(0.3 * n));
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(generate_coherent_stream(train(10, 0.0), 0.0, 1).empty());
}

TEST_CASE("continuous pumping: renewal rate") {
  EmitterParams p = ideal();
  const double rate = 5e7;  // 1/(20 ns)
  const auto s = generate_cw_stream(p, rate, 0.02, 3);
  const double expected = 0.02 / (1.0 / rate + p.lifetime);
  CHECK(std::abs(static_cast<double>(s.size()) - expected) < 4.0 * std::sqrt(expected));
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK_THROWS_AS(generate_cw_stream(p, 0.0, 1.0, 1), InvalidArgument);
}

TEST_CASE("parameter validation and warnings") {
  EmitterParams p;
  p.quantum_efficiency = 1.2;
  CHECK_THROWS_AS(generate_emission_stream(p, train(10, 1.0), 1), InvalidArgument);
  p = EmitterParams{};
  p.lifetime = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  PumpPulseTrain t = train(0, 1.0);
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  t = train(10, 1.0);
  t.period = 50e-9;
  CHECK(t.warnings(EmitterParams{}).size() == 1);
  CHECK(train(10, 1.0).warnings(EmitterParams{}).empty());
}

TEST_CASE("timestamp CSV with params hash") {
  EmitterParams p;
  const PumpPulseTrain pump = train(5000, 5e14);
  const auto s = generate_emission_stream(p, pump, 1);
  const std::string h = params_fingerprint(p, pump);
  CHECK(h.size() == 16);
  CHECK(h == params_fingerprint(p, pump));
  EmitterParams q = p;
  q.lifetime = 21e-9;
  CHECK(h != params_fingerprint(q, pump));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");

  std::stringstream io;
  write_timestamps_csv(io, s, h);
  CHECK(io.str().rfind("# params " + h + "\r\nt_ps\r\n", 0) == 0);
  CHECK(read_timestamps_csv(io) == s);
  std::istringstream bad("t_ps\n5\n3\n");
  CHECK_THROWS_AS(read_timestamps_csv(bad), InvalidArgument);
  std::istringstream junk("t_ps\n5\n3.5\n");
  CHECK_THROWS_AS(read_timestamps_csv(junk), InvalidArgument);
}
