#include "nwsps/fdtd/source.hpp"

#include <cmath>
#include <sstream>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"

namespace nwsps::fdtd {

PulseEnvelope PulseEnvelope::continuous_wave(double ramp_periods) {
  PulseEnvelope e;
  e.kind = Kind::continuous;
  e.ramp_periods = ramp_periods;
  return e;
}

PulseEnvelope PulseEnvelope::gaussian_pulse(double width, double delay_widths) {
  PulseEnvelope e;
  e.kind = Kind::gaussian;
  e.width = width;
  e.delay = delay_widths * width;
  return e;
}

Source::Source(const SourceSpec& spec, const SimulationGrid& grid)
    : spec_(spec), omega_(2.0 * kPi * kSpeedOfLight / spec.wavelength) {
  if (!(spec.wavelength > 0.0)) throw InvalidArgument("source wavelength must be positive");
  if (spec.envelope.kind == PulseEnvelope::Kind::gaussian && !(spec.envelope.width > 0.0))
    throw InvalidArgument("gaussian pulse width must be positive");

  const CellRect inner = grid.interior();
  const int ic = static_cast<int>(std::lround(spec.center_x / grid.dx));
  const int jc = static_cast<int>(std::lround(spec.center_y / grid.dx));
  auto reject = [&](int i, int j) {
    std::ostringstream os;
    os << "source cell (" << i << ", " << j << ") lies inside the PML or outside the grid";
    throw InvalidArgument(os.str());
  };

  switch (spec.kind) {
    case SourceKind::line_dipole:
      if (!inner.contains(ic, jc)) reject(ic, jc);
      cells_.push_back(grid.index(ic, jc));
      weights_.push_back(1.0);
      break;
    case SourceKind::gaussian_beam: {
      if (spec.waist < 2.0 * grid.dx) {
        std::ostringstream os;
        os << "beam waist " << spec.waist << " m is below 2 dx = " << 2.0 * grid.dx << " m";
        throw InvalidArgument(os.str());
      }
      if (!inner.contains(ic, jc)) reject(ic, jc);
      const double w0 = 0.5 * spec.waist;
      const int half = static_cast<int>(std::ceil(2.5 * w0 / grid.dx));
      for (int i = ic - half; i <= ic + half; ++i) {
        if (!inner.contains(i, jc)) reject(i, jc);
        const double x = i * grid.dx - spec.center_x;
        cells_.push_back(grid.index(i, jc));
        weights_.push_back(std::exp(-(x * x) / (w0 * w0)));
      }
      break;
    }
    case SourceKind::plane_wave:
      if (grid.y_boundary != Boundary::periodic)
        throw InvalidArgument("plane_wave source requires a periodic y boundary");
      if (ic < inner.i0 || ic > inner.i1) reject(ic, 0);
      for (int j = 0; j < grid.ny; ++j) {
        cells_.push_back(grid.index(ic, j));
        weights_.push_back(1.0);
      }
      break;
  }
}

double Source::period() const { return 2.0 * kPi / omega_; }

double Source::envelope(double t) const {
  const auto& e = spec_.envelope;
  if (e.kind == PulseEnvelope::Kind::gaussian) {
    const double u = (t - e.delay) / e.width;
    return std::exp(-u * u);
  }
  const double ramp = e.ramp_periods * period();
  if (ramp <= 0.0 || t >= ramp) return 1.0;
  if (t <= 0.0) return 0.0;
  return 0.5 * (1.0 - std::cos(kPi * t / ramp));
}

double Source::value(double t) const {
  if (spec_.amplitude == 0.0) return 0.0;
  return spec_.amplitude * envelope(t) * std::sin(omega_ * t);
}

}  // namespace nwsps::fdtd
