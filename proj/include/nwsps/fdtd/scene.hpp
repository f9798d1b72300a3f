#pragma once

#include <string>
#include <vector>

#include "nwsps/fdtd/grid.hpp"
#include "nwsps/fdtd/monitor.hpp"
#include "nwsps/fdtd/solver.hpp"
#include "nwsps/fdtd/source.hpp"

namespace nwsps::fdtd {

enum class Anchor { input_facet, output_facet };

// Source position expressed relative to a facet centre: offset_x along the
// wire axis (positive toward +x), offset_y above the wire axis.
struct PlacedSource {
  SourceKind kind = SourceKind::gaussian_beam;
  Anchor anchor = Anchor::input_facet;
  double offset_x = 0.0;
  double offset_y = 0.0;
  double waist = 800e-9;
  double amplitude = 1.0;
  double ramp_periods = 5.0;
};

// Side view of a nanowire lying along x. The wire occupies
// [x_in, x_in + length] x [y_axis - d/2, y_axis + d/2].
struct SceneGeometry {
  bool has_wire = true;
  double wire_length = 7.5e-6;
  double wire_diameter = 280e-9;
  ComplexIndex wire_index{2.4, 0.0};
  double background_index = 1.0;

  // Optional PMMA film on a quartz half-space under the wire.
  bool layered_substrate = false;
  double substrate_index = 1.46;
  double pmma_index = 1.49;
  double pmma_thickness = 100e-9;

  double cells_per_wavelength = 20.0;  // in the densest medium
  // When > 0, the cell size is set as if a medium of this index were present
  // (keeps a vacuum reference run on the same lattice).
  double resolution_index = 0.0;
  int pml_cells = 10;
  double margin_left = 2.5e-6;
  double margin_right = 1.0e-6;
  double margin_below = 0.8e-6;
  double margin_above = 0.8e-6;
  // Fixed domain extent including the PML (m); 0 sizes the domain from the
  // wire and margins.
  double domain_width = 0.0;
  double domain_height = 0.0;

  std::vector<PlacedSource> sources;
  double coupled_monitor_offset = 1.5e-6;  // from the input facet, inside the wire
  double reverse_monitor_offset = 1.0e-6;  // from the output facet, inside the wire
  double output_monitor_offset = 50e-9;    // beyond the output facet
  double incident_monitor_height = 150e-9; // above the wire top
  std::vector<double> profile_positions;   // along-wire flux lines, from the input facet
};

// Named cell positions of a built scene.
struct SceneLayout {
  double x_in = 0.0;
  double x_out = 0.0;
  double y_axis = 0.0;
  CellRect wire;        // rasterized wire cells (empty if no wire)
  int wire_cells_across = 0;
};

struct Scene {
  SimulationGrid grid;
  MaterialMap material;
  SceneLayout layout;
  double wavelength = 0.0;
  std::vector<SourceSpec> sources;
  std::vector<FluxMonitorSpec> monitors;
  std::vector<std::string> warnings;
};

// Minimum admissible cell size for `wavelength` in a medium of index n_max.
double max_cell_size(double wavelength, double n_max, double cells_per_wavelength = 20.0);

Scene build_scene(const SceneGeometry& geometry, double wavelength);

// Same lattice, sources and monitors with the wire (and substrate) replaced by
// the background medium. Used to normalize against the incident beam.
SceneGeometry vacuum_reference(const SceneGeometry& geometry);

// Solver with the scene's sources and monitors registered. The report
// reference point of run_until_steady is set to the output facet centre.
class SceneRun {
public:
  explicit SceneRun(Scene scene);

  Solver& solver() { return solver_; }
  const SceneLayout& layout() const { return layout_; }
  MonitorReport run_until_steady(const SteadyStateOptions& options = {});

private:
  SceneLayout layout_;
  Solver solver_;
};

}  // namespace nwsps::fdtd
