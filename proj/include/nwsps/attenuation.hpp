#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nwsps/error.hpp"

namespace nwsps::attenuation {

// Intensity measured along the wire. Positions in metres.
struct DecaySeries {
  std::vector<double> x;
  std::vector<double> intensity;
  double wavelength = 0.0;

  void validate() const;
};

struct DecayFit {
  double amplitude = 0.0;  // A
  double alpha = 0.0;      // 1/m
  double offset = 0.0;     // C
  double rms = 0.0;
  int iterations = 0;
  std::array<std::array<double, 3>, 3> covariance{};  // (A, alpha, C)
  std::vector<double> residuals;
  std::vector<std::string> flags;  // "flat", "weakly constrained"

  double alpha_sigma() const;
  bool has_flag(const std::string& f) const;
};

// Thrown after the iteration cap; carries the last iterate.
class FitNotConverged : public NumericalError {
public:
  FitNotConverged(const std::string& what, DecayFit last) : NumericalError(what), last_(std::move(last)) {}
  const DecayFit& last_iterate() const noexcept { return last_; }

private:
  DecayFit last_;
};

double model_intensity(double amplitude, double alpha, double offset, double x);

// Partial derivatives of the model with respect to (A, alpha, C).
std::array<double, 3> model_jacobian(double amplitude, double alpha, double offset, double x);

DecayFit fit_decay(const DecaySeries& series);

// alpha = 4 pi k / lambda
double bulk_alpha(double n, double k, double wavelength);

// Noise-free or noisy synthetic series: `points` evenly spaced samples on
// [0, length], each multiplied by (1 + noise * N(0, 1)).
struct SyntheticDecay {
  double amplitude = 100.0;
  double alpha = 3e5;
  double offset = 10.0;
  int points = 15;
  double length = 7e-6;
  double noise = 0.0;
  double wavelength = 377e-9;
};
DecaySeries synthesize(const SyntheticDecay& truth, std::uint64_t seed);

// Fitted alphas of `trials` synthetic series, trial k seeded with seed + k.
std::vector<double> monte_carlo_alphas(const SyntheticDecay& truth, int trials, std::uint64_t seed);

// CSV with columns x_um, intensity.
DecaySeries read_series_csv(std::istream& in, double wavelength);
void write_series_csv(std::ostream& out, const DecaySeries& series, const std::string& provenance_line);

// {A, alpha_per_cm, C, rms, flags, ...}
nlohmann::json fit_to_json(const DecayFit& fit);

}  // namespace nwsps::attenuation
