#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nwsps/fdtd/grid.hpp"
#include "nwsps/fdtd/monitor.hpp"
#include "nwsps/fdtd/source.hpp"

namespace nwsps::fdtd {

// Squared field amplitude |E|^2 (V^2/m^2) of one frequency component.
struct FieldIntensityMap {
  double frequency = 0.0;
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  std::vector<double> e_squared;

  double at(int i, int j) const { return e_squared[static_cast<std::size_t>(j) * nx + i]; }
};

struct MonitorFlux {
  std::string id;
  double mean_flux = 0.0;  // W/m, averaged over the last optical period
};

struct MonitorReport {
  bool converged = false;
  std::int64_t steps = 0;
  int periods = 0;
  double wavelength = 0.0;
  std::vector<MonitorFlux> fluxes;
  std::vector<FieldIntensityMap> maps;
  CellRect recorded_region;
  // Reference point for facet_intensity_at (output facet centre), m.
  double reference_x = 0.0;
  double reference_y = 0.0;

  double flux(const std::string& id) const;
};

struct SteadyStateOptions {
  double tolerance = 1e-3;      // relative per-period drift
  int consecutive_periods = 5;
  std::int64_t max_steps = 400000;
};

// Energy bookkeeping for a closed box: work done by the sources, energy
// stored inside and energy that has left through the four sides.
struct EnergyBalance {
  double injected = 0.0;
  double stored = 0.0;
  double outflow = 0.0;

  double residual() const { return injected - stored - outflow; }
};

class Solver {
public:
  Solver(SimulationGrid grid, MaterialMap material);

  const SimulationGrid& grid() const { return grid_; }
  SimulationGrid& grid() { return grid_; }
  const MaterialMap& material() const { return material_; }

  const Source& inject_source(const SourceSpec& spec);
  FluxMonitor& add_flux_monitor(FluxMonitorSpec spec);
  std::size_t add_probe(int i, int j);
  // Accumulate whole-run DFT maps of Ez at the given frequencies.
  void record_field_dft(std::vector<double> frequencies);
  // Track injected/stored/outgoing energy for `box` (interior cells).
  void track_energy(const CellRect& box);

  const std::vector<Source>& sources() const { return sources_; }
  const std::vector<FluxMonitor>& monitors() const { return monitors_; }
  const FluxMonitor& monitor(const std::string& id) const;
  const PointProbe& probe(std::size_t k) const { return probes_[k]; }
  std::vector<FieldIntensityMap> field_dft_maps() const;

  void step();
  void run(std::int64_t steps);
  MonitorReport run_until_steady(const SteadyStateOptions& options = {});

  double injected_energy() const { return injected_; }
  EnergyBalance energy_balance() const;
  double total_energy() const;

private:
  void update_h();
  void update_e();
  void apply_sources();
  void sample_monitors();
  void check_finite();

  SimulationGrid grid_;
  MaterialMap material_;
  std::vector<double> ca_;
  std::vector<double> cb_;
  std::vector<Source> sources_;
  std::vector<FluxMonitor> monitors_;
  std::vector<PointProbe> probes_;
  double injected_ = 0.0;
  double injected_in_box_ = 0.0;

  std::optional<CellRect> energy_box_;
  std::vector<std::size_t> box_monitors_;  // left, right, bottom, top

  std::vector<double> dft_freqs_;
  std::vector<std::vector<std::complex<double>>> dft_maps_;

  // Per-period DFT used by run_until_steady.
  bool period_dft_ = false;
  double period_omega_ = 0.0;
  std::vector<std::complex<double>> period_acc_;
};

// Time-averaged intensity (W/m^2) at `offset` metres beyond the report's
// reference point along +x, from the steady-state field map.
double facet_intensity_at(double offset, const MonitorReport& report);

}  // namespace nwsps::fdtd
