#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nwsps/fdtd/grid.hpp"

namespace nwsps::fdtd {

// Orientation of a flux line: x_normal lines are vertical (fixed i) and count
// power flowing in +x; y_normal lines are horizontal (fixed j), +y.
enum class FluxNormal { x_normal, y_normal };

struct FluxMonitorSpec {
  std::string id;
  FluxNormal normal = FluxNormal::x_normal;
  int fixed = 0;  // i for x_normal, j for y_normal
  int from = 0;   // inclusive cell range along the line
  int to = 0;
  std::vector<double> frequencies;  // Hz, DFT accumulators
};

// Line-segment Poynting flux monitor. Samples E at t_n against H averaged over
// t_{n-1/2} and t_{n+1/2}, both collocated onto the E nodes of the line.
class FluxMonitor {
public:
  FluxMonitor(FluxMonitorSpec spec, const SimulationGrid& grid);

  const FluxMonitorSpec& spec() const { return spec_; }
  const std::string& id() const { return spec_.id; }

  // Called once per step after the H update (E holds t_n, H holds t_{n+1/2}).
  void sample(const SimulationGrid& grid);

  // Time-integrated flux through the line, J/m.
  double integrated() const { return integrated_; }
  // Instantaneous flux at the last sample, W/m.
  double last_flux() const { return last_flux_; }
  // Frequency-domain (time-averaged) flux for frequencies[k], W/m units up to
  // the spectral normalization shared by every monitor of a run.
  double spectral_flux(std::size_t k) const;
  void reset_integral() { integrated_ = 0.0; }

private:
  double collocated_h(const SimulationGrid& grid, int along) const;
  int cell_i(int along) const;
  int cell_j(int along) const;

  FluxMonitorSpec spec_;
  double dx_;
  double dt_;
  std::vector<double> prev_h_;
  bool primed_ = false;
  double integrated_ = 0.0;
  double last_flux_ = 0.0;
  std::vector<std::vector<std::complex<double>>> dft_e_;
  std::vector<std::vector<std::complex<double>>> dft_h_;
};

// Records Ez at one cell every step (taken after the E update, time t_{n+1}).
struct PointProbe {
  int i = 0;
  int j = 0;
  std::vector<double> samples;
};

}  // namespace nwsps::fdtd
