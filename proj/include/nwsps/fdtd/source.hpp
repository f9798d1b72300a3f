#pragma once

#include <cstddef>
#include <vector>

#include "nwsps/fdtd/grid.hpp"

namespace nwsps::fdtd {

enum class SourceKind {
  gaussian_beam,  // Gaussian line profile along x on one row, radiates along +/-y
  line_dipole,    // single-cell line current (a point in the 2D plane)
  plane_wave,     // uniform column spanning the whole y extent (needs periodic y)
};

struct PulseEnvelope {
  enum class Kind { continuous, gaussian };
  Kind kind = Kind::continuous;
  double ramp_periods = 5.0;  // raised-cosine turn-on for continuous sources
  double delay = 0.0;         // s, Gaussian center
  double width = 0.0;         // s, Gaussian 1/e half width

  static PulseEnvelope continuous_wave(double ramp_periods = 5.0);
  // Pulse centred at `delay_widths` widths after t = 0.
  static PulseEnvelope gaussian_pulse(double width, double delay_widths = 4.0);
};

struct SourceSpec {
  SourceKind kind = SourceKind::gaussian_beam;
  double center_x = 0.0;  // m
  double center_y = 0.0;  // m
  // 1/e^2 intensity diameter of the beam spot; the field profile is
  // exp(-(x - x0)^2 / w0^2) with w0 = waist / 2.
  double waist = 800e-9;
  double wavelength = 405e-9;  // vacuum, m
  double amplitude = 1.0;      // V/m added per step at the profile peak
  PulseEnvelope envelope{};
};

// A soft (additive E) source rasterized onto the grid.
class Source {
public:
  Source(const SourceSpec& spec, const SimulationGrid& grid);

  const SourceSpec& spec() const { return spec_; }
  double angular_frequency() const { return omega_; }
  double period() const;
  // Additive field value at the profile peak for time t.
  double value(double t) const;
  double envelope(double t) const;
  bool is_continuous() const { return spec_.envelope.kind == PulseEnvelope::Kind::continuous; }

  const std::vector<std::size_t>& cells() const { return cells_; }
  const std::vector<double>& weights() const { return weights_; }

private:
  SourceSpec spec_;
  double omega_;
  std::vector<std::size_t> cells_;
  std::vector<double> weights_;
};

}  // namespace nwsps::fdtd
