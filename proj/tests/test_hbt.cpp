#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nwsps/error.hpp"
#include "nwsps/hbt.hpp"

using namespace nwsps;
using namespace nwsps::hbt;

namespace {

// Independent Poisson stream on [0, span_s).
std::vector<std::int64_t> poisson_tags(double rate, double span_s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(rate);
  std::vector<std::int64_t> out;
  for (double t = gap(rng); t < span_s; t += gap(rng)) out.push_back(static_cast<std::int64_t>(t * 1e12));
  return out;
}

DetectorModel perfect() {
  DetectorModel d;
  d.efficiency = 1.0;
  d.dark_rate = 0.0;
  d.jitter_ps = 0.0;
  d.dead_time_ps = 0.0;
  return d;
}

PulsedExperiment pulsed(std::int64_t pulses, double rho) {
  PulsedExperiment e;
  e.pump.period = 200e-9;
  e.pump.pulses = pulses;
  e.pump.fluence = std::log(2.0) / e.emitter.sigma_abs;  // p_exc = 0.5
  e.signal_fraction = rho;
  return e;
}

}  // namespace

TEST_CASE("no light and no dark counts give empty streams") {
  DetectorModel d;
  d.dark_rate = 0.0;
  const auto [a, b] = split_and_detect({}, 0.0, d, d, 1.0, 1);
  CHECK(a.t_ps.empty());
  CHECK(b.t_ps.empty());
  CHECK(a.detector == 'A');
  CHECK(b.detector == 'B');
}

TEST_CASE("Poisson input is thinned to half the rate per arm") {
  const double rate = 1e5;
  const auto photons = poisson_tags(rate, 10.0, 3);
  const auto [a, b] = split_and_detect(photons, 0.0, perfect(), perfect(), 10.0, 5);
  CHECK(a.t_ps.size() / 10.0 == doctest::Approx(rate / 2).epsilon(0.02));
  CHECK(b.t_ps.size() / 10.0 == doctest::Approx(rate / 2).epsilon(0.02));
  CHECK(a.t_ps.size() + b.t_ps.size() == photons.size());

  // background-only input behaves the same way
  const auto [c, d] = split_and_detect({}, rate, perfect(), perfect(), 10.0, 6);
  CHECK(c.t_ps.size() / 10.0 == doctest::Approx(rate / 2).epsilon(0.02));
  CHECK(d.t_ps.size() / 10.0 == doctest::Approx(rate / 2).epsilon(0.02));
}

TEST_CASE("dead time keeps one tag out of a short burst") {
  DetectorModel d = perfect();
  d.dead_time_ps = 100000.0;
  const std::vector<std::int64_t> burst{1000, 3000, 5000, 7000, 9000};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [a, b] = split_and_detect(burst, 0.0, d, d, 1e-6, seed);
    CHECK(a.t_ps.size() <= 1);
    CHECK(b.t_ps.size() <= 1);
  }
  CHECK(apply_dead_time({0, 10, 20, 100, 150, 250}, 100.0) == std::vector<std::int64_t>{0, 100, 250});
}

TEST_CASE("jitter and dead time keep streams sorted and spaced") {
  DetectorModel d;
  const auto photons = poisson_tags(2e6, 0.05, 8);
  const auto [a, b] = split_and_detect(photons, 1e5, d, d, 0.05, 9);
  for (const auto* s : {&a, &b}) {
    for (std::size_t k = 1; k < s->t_ps.size(); ++k) CHECK(s->t_ps[k] - s->t_ps[k - 1] >= 50000);
  }
  CHECK_THROWS_AS(split_and_detect({5, 3}, 0.0, d, d, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(split_and_detect({5, 3'000'000'000'000}, 0.0, d, d, 1.0, 1), InvalidArgument);
}

TEST_CASE("identical single tags correlate into the zero bin") {
  TimeTagStream a{'A', {123456}}, b{'B', {123456}};
  const auto h = correlate(a, b, 512, 10000, 1.0);
  CHECK(h.total() == 1);
  CHECK(h.at(0) == 1);
  CHECK(h.tau_ps(h.half_bins) <= 10000);
  CHECK_THROWS_AS(correlate(a, b, 0, 10000, 1.0), InvalidArgument);

  // bin edges: [k w - w/2, k w + w/2)
  TimeTagStream c{'B', {123456 - 257, 123456 - 256, 123456 + 255, 123456 + 256}};
  const auto e = correlate(a, c, 512, 10000, 1.0);
  CHECK(e.at(0) == 2);
  CHECK(e.at(1) == 1);
  CHECK(e.at(-1) == 1);
}

TEST_CASE("two-pointer sweep matches brute force") {
  const auto ta = poisson_tags(5e6, 2e-4, 1), tb = poisson_tags(4e6, 2e-4, 2);
  const TimeTagStream a{'A', ta}, b{'B', tb};
  const std::int64_t w = 700, tmax = 20000;
  const auto h = correlate(a, b, w, tmax, 2e-4);
  std::vector<std::uint64_t> brute(h.counts.size(), 0);
  const std::int64_t lo = -h.half_bins * w - w / 2;
  for (auto x : ta)
    for (auto y : tb) {
      const std::int64_t d = y - x - lo;
      if (d >= 0 && d < static_cast<std::int64_t>(brute.size()) * w) ++brute[static_cast<std::size_t>(d / w)];
    }
  CHECK(h.counts == brute);
}

TEST_CASE("independent Poisson streams: flat histogram and unit g2") {
  const double ra = 3e5, rb = 3e5, span = 10.0;
  const TimeTagStream a{'A', poisson_tags(ra, span, 11)}, b{'B', poisson_tags(rb, span, 12)};
  const std::int64_t w = 20000;
  const auto h = correlate(a, b, w, 1000000, span);
  const double level = static_cast<double>(a.t_ps.size()) * static_cast<double>(b.t_ps.size()) / (span * 1e12) * w;
  double sum = 0.0, chi2 = 0.0;
  for (auto c : h.counts) {
    sum += static_cast<double>(c);
    chi2 += (c - level) * (c - level) / level;
  }
  const double dof = static_cast<double>(h.counts.size());
  CHECK(sum / dof == doctest::Approx(ra * rb * span * w * 1e-12).epsilon(0.03));
  CHECK(chi2 / dof < 1.0 + 5.0 * std::sqrt(2.0 / dof));
  for (double g : g2_cw(h)) CHECK(std::abs(g - 1.0) < 0.03);

  // symmetry n(tau) vs n(-tau)
  double sym = 0.0;
  for (int k = 1; k <= h.half_bins; ++k) {
    const double p = static_cast<double>(h.at(k)), m = static_cast<double>(h.at(-k));
    sym += (p - m) * (p - m) / (p + m);
  }
  CHECK(sym / h.half_bins < 1.0 + 5.0 * std::sqrt(2.0 / h.half_bins));

  // doubling both rates leaves g2 unchanged
  const TimeTagStream a2{'A', poisson_tags(2 * ra, span, 13)}, b2{'B', poisson_tags(2 * rb, span, 14)};
  const auto g2 = g2_cw(correlate(a2, b2, w, 1000000, span));
  for (double g : g2) CHECK(std::abs(g - 1.0) < 0.03);
}

TEST_CASE("pulsed single emitter: comb with an empty centre") {
  PulsedExperiment e = pulsed(1000000, 1.0);
  const PulsedResult r = run_pulsed_experiment(e, 21);
  MESSAGE("ideal g2(0) " << r.g2.g2_0 << " +- " << r.g2.sigma << ", side mean " << r.g2.side_mean);
  CHECK(r.g2.g2_0 < 0.01);
  CHECK(r.g2.side_peaks == 8);
  CHECK(r.g2.single_photon());
  // side peaks sit at multiples of the period, valleys between them
  const int at_t = static_cast<int>(200000 / 512), at_half = static_cast<int>(100000 / 512);
  CHECK(r.hist.at(at_t) > 20 * (r.hist.at(at_half) + 1));
  CHECK(r.hist.at(-at_t) > 20 * (r.hist.at(-at_half) + 1));
  CHECK(r.background_rate == 0.0);
}

TEST_CASE("pulsed coherent light gives g2(0) = 1") {
  PulsedExperiment e = pulsed(1000000, 1.0);
  e.light = PulsedExperiment::Light::coherent;
  e.coherent_mean_photons = 0.3;
  const PulsedResult r = run_pulsed_experiment(e, 5);
  MESSAGE("coherent g2(0) " << r.g2.g2_0 << " +- " << r.g2.sigma);
  CHECK(std::abs(r.g2.g2_0 - 1.0) < 0.05);
  CHECK(!r.g2.single_photon());
}

TEST_CASE("Poisson background at signal fraction rho gives g2(0) near 1 - rho^2") {
  const double rho = 0.894;
  const PulsedResult r = run_pulsed_experiment(pulsed(1000000, rho), 1);
  MESSAGE("rho " << rho << ": g2(0) " << r.g2.g2_0 << " +- " << r.g2.sigma << ", background " << r.background_rate
                 << " /s, signal per arm per pulse " << r.signal_per_arm_per_pulse);
  CHECK(std::abs(r.g2.g2_0 - (1.0 - rho * rho)) < 0.03);
  CHECK(std::abs(r.g2.g2_0 - 0.20) < 0.03);
  CHECK(r.g2.single_photon());
  CHECK(r.background_rate > 0.0);
  for (double q : {0.8, 0.95}) {
    const PulsedResult s = run_pulsed_experiment(pulsed(300000, q), 2);
    CAPTURE(q);
    CHECK(std::abs(s.g2.g2_0 - (1.0 - q * q)) < 0.05);
  }
}

TEST_CASE("g2(0) standard error falls like 1/sqrt(N)") {
  double prev = 0.0;
  for (std::int64_t n : {10000, 100000, 1000000}) {
    const PulsedResult r = run_pulsed_experiment(pulsed(n, 0.894), 3);
    if (prev > 0.0) CHECK(prev / r.g2.sigma == doctest::Approx(std::sqrt(10.0)).epsilon(0.3));
    prev = r.g2.sigma;
  }
  // the reported sigma matches the spread over seeds
  std::vector<double> g;
  double reported = 0.0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const PulsedResult r = run_pulsed_experiment(pulsed(20000, 0.894), 100 + s);
    g.push_back(r.g2.g2_0);
    reported += r.g2.sigma / 30.0;
  }
  double m = 0.0, v = 0.0;
  for (double x : g) m += x / g.size();
  for (double x : g) v += (x - m) * (x - m) / (g.size() - 1);
  CHECK(std::sqrt(v) / reported > 0.5);
  CHECK(std::sqrt(v) / reported < 2.0);
}

TEST_CASE("CW single emitter is antibunched and recovers on the lifetime scale") {
  emitter::EmitterParams p;
  p.quantum_efficiency = 1.0;
  p.lifetime = 20e-9;
  const double pump_rate = 2.5e7, span = 2.0;
  const auto photons = emitter::generate_cw_stream(p, pump_rate, span, 4);
  DetectorModel d = perfect();
  d.jitter_ps = 350.0;
  const auto [a, b] = split_and_detect(photons, 0.0, d, d, span, 5);
  const auto h = correlate(a, b, 2048, 200000, span);
  const auto g = g2_cw(h);
  const double gamma = pump_rate + 1.0 / p.lifetime;
  CHECK(g[static_cast<std::size_t>(h.half_bins)] < 0.1);
  for (int k : {-60, -25, 25, 60, 90}) {
    const double tau = std::abs(h.tau_ps(k)) * 1e-12;
    CAPTURE(k);
    CHECK(std::abs(g[static_cast<std::size_t>(k + h.half_bins)] - (1.0 - std::exp(-gamma * tau))) < 0.06);
  }
}

TEST_CASE("verdict threshold, rejections and determinism") {
  G2Estimate e;
  e.g2_0 = 0.45;
  e.sigma = 0.04;
  CHECK(e.single_photon());
  e.sigma = 0.06;
  CHECK(!e.single_photon());

  CoincidenceHistogram h;
  h.bin_width_ps = 512;
  h.half_bins = 100;
  h.counts.assign(201, 0);
  // range holds only 4 side peaks
  CHECK_THROWS_WITH_AS(g2_pulsed_zero(h, 20000, 5000), doctest::Contains("at least 6 side peaks"), InvalidArgument);
  h.half_bins = 1000;
  h.counts.assign(2001, 0);
  CHECK_THROWS_WITH_AS(g2_pulsed_zero(h, 100000, 25000), doctest::Contains("insufficient statistics"), InvalidArgument);
  CHECK_THROWS_AS(g2_cw(h), InvalidArgument);

  const PulsedExperiment e1 = pulsed(50000, 0.894);
  const PulsedResult r1 = run_pulsed_experiment(e1, 9), r2 = run_pulsed_experiment(e1, 9);
  CHECK(r1.hist.counts == r2.hist.counts);
  CHECK(r1.g2.g2_0 == r2.g2.g2_0);
}

TEST_CASE("histogram CSV and summary JSON") {
  TimeTagStream a{'A', {0, 1000}}, b{'B', {0, 1000}};
  const auto h = correlate(a, b, 1000, 2000, 1.0);
  std::ostringstream os;
  write_histogram_csv(os, h, "# config abc");
  CHECK(os.str() == "# config abc\r\ntau_ps,counts\r\n-2000,0\r\n-1000,1\r\n0,2\r\n1000,1\r\n2000,0\r\n");
  G2Estimate g;
  g.g2_0 = 0.2;
  g.sigma = 0.01;
  const auto j = summary_json(g, 1000000);
  CHECK(j.at("verdict") == "single-photon source: yes");
  CHECK(j.at("n_pulses") == 1000000);
  CHECK(j.dump().find("\"g2_0\"") < j.dump().find("\"n_pulses\""));
}
