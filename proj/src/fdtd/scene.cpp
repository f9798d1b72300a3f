#include "nwsps/fdtd/scene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"

namespace nwsps::fdtd {

double max_cell_size(double wavelength, double n_max, double cells_per_wavelength) {
  return wavelength / (cells_per_wavelength * n_max);
}

namespace {

std::string fmt_len(double metres) {
  std::ostringstream os;
  os << metres * 1e9 << " nm";
  return os.str();
}

void validate_geometry(const SceneGeometry& g, double wavelength, std::vector<std::string>& warnings) {
  if (!(wavelength >= 300e-9 && wavelength <= 700e-9))
    throw InvalidArgument("wavelength " + fmt_len(wavelength) + " outside [300, 700] nm");
  if (g.has_wire) {
    if (!(g.wire_length > 0.0)) throw InvalidArgument("wire_length must be positive");
    if (!(g.wire_diameter > 0.0)) throw InvalidArgument("wire_diameter must be positive");
    if (g.wire_length < 7e-6 || g.wire_length > 8e-6)
      warnings.push_back("wire length " + fmt_len(g.wire_length) + " outside the 7-8 um band");
    if (g.wire_diameter < 260e-9 || g.wire_diameter > 300e-9)
      warnings.push_back("wire diameter " + fmt_len(g.wire_diameter) + " outside the 260-300 nm band");
  }
  if (g.cells_per_wavelength < 20.0) {
    double n_max = std::max(g.background_index, g.has_wire ? g.wire_index.n : 1.0);
    if (g.layered_substrate) n_max = std::max({n_max, g.substrate_index, g.pmma_index});
    throw InvalidArgument("resolution too coarse: need dx <= " +
                          fmt_len(max_cell_size(wavelength, n_max)) + " (20 cells per wavelength)");
  }
  for (double m : {g.margin_left, g.margin_right, g.margin_below, g.margin_above})
    if (m < 0.0) throw InvalidArgument("scene margins must be non-negative");
  if (g.domain_width < 0.0 || g.domain_height < 0.0) throw InvalidArgument("domain size must be non-negative");
}

int cell_of(double x, double dx) { return static_cast<int>(std::lround(x / dx)); }

}  // namespace

Scene build_scene(const SceneGeometry& geometry, double wavelength) {
  std::vector<std::string> warnings;
  validate_geometry(geometry, wavelength, warnings);

  double n_max = geometry.background_index;
  if (geometry.has_wire) n_max = std::max(n_max, geometry.wire_index.n);
  if (geometry.layered_substrate) n_max = std::max({n_max, geometry.substrate_index, geometry.pmma_index});
  n_max = std::max(n_max, geometry.resolution_index);
  const double dx = max_cell_size(wavelength, n_max, geometry.cells_per_wavelength);

  const double length = geometry.has_wire ? geometry.wire_length : 0.0;
  const double diameter = geometry.has_wire ? geometry.wire_diameter : 0.0;
  const int pml = geometry.pml_cells;
  const double pml_len = pml * dx;

  SceneLayout layout;
  layout.x_in = pml_len + geometry.margin_left;
  layout.x_out = layout.x_in + length;
  layout.y_axis = pml_len + geometry.margin_below + 0.5 * diameter;

  GridSpec spec;
  spec.dx = dx;
  spec.pml_cells = pml;
  spec.nx = static_cast<int>(std::ceil((layout.x_out + geometry.margin_right + pml_len) / dx)) + 1;
  spec.ny = static_cast<int>(std::ceil((layout.y_axis + 0.5 * diameter + geometry.margin_above + pml_len) / dx)) + 1;
  if (geometry.domain_width > 0.0) spec.nx = static_cast<int>(std::lround(geometry.domain_width / dx));
  if (geometry.domain_height > 0.0) spec.ny = static_cast<int>(std::lround(geometry.domain_height / dx));
  spec.nx = std::max(spec.nx, 2 * pml + 10);
  spec.ny = std::max(spec.ny, 2 * pml + 10);
  // dt below 0.99 of the Courant limit, trimmed so one optical period is an
  // integer number of steps.
  const double period = wavelength / kSpeedOfLight;
  const double dt_max = 0.99 * courant_limit(dx);
  spec.dt = period / std::ceil(period / dt_max);

  Scene scene{SimulationGrid(spec), MaterialMap(spec.nx, spec.ny), layout, wavelength, {}, {}, {}};
  SimulationGrid& grid = scene.grid;
  const CellRect inner = grid.interior();
  const double omega = 2.0 * kPi * kSpeedOfLight / wavelength;

  scene.material.fill(CellRect{0, spec.nx - 1, 0, spec.ny - 1}, ComplexIndex{geometry.background_index, 0.0}, omega);

  const int j_axis = cell_of(layout.y_axis, dx);
  if (geometry.has_wire) {
    const int across = std::max(1, static_cast<int>(std::lround(diameter / dx)));
    CellRect wire;
    wire.i0 = cell_of(layout.x_in, dx);
    wire.i1 = cell_of(layout.x_out, dx);
    wire.j0 = j_axis - across / 2;
    wire.j1 = wire.j0 + across - 1;
    if (!inner.contains(wire.i0, wire.j0) || !inner.contains(wire.i1, wire.j1)) {
      std::ostringstream os;
      os << "nanowire cells (" << wire.i0 << ".." << wire.i1 << ", " << wire.j0 << ".." << wire.j1
         << ") extend outside the interior (" << inner.i0 << ".." << inner.i1 << ", " << inner.j0 << ".."
         << inner.j1 << ")";
      throw InvalidArgument(os.str());
    }
    if (geometry.layered_substrate) {
      const int pmma_cells = static_cast<int>(std::lround(geometry.pmma_thickness / dx));
      const int j_pmma_top = wire.j0 - 1;
      const int j_pmma_bottom = j_pmma_top - pmma_cells + 1;
      scene.material.fill(CellRect{0, spec.nx - 1, 0, j_pmma_bottom - 1}, ComplexIndex{geometry.substrate_index, 0.0}, omega);
      scene.material.fill(CellRect{0, spec.nx - 1, j_pmma_bottom, j_pmma_top}, ComplexIndex{geometry.pmma_index, 0.0}, omega);
    }
    scene.material.fill(wire, geometry.wire_index, omega);
    layout.wire = wire;
    layout.wire_cells_across = across;
  }
  scene.layout = layout;

  for (const auto& placed : geometry.sources) {
    SourceSpec s;
    s.kind = placed.kind;
    s.center_x = (placed.anchor == Anchor::input_facet ? layout.x_in : layout.x_out) + placed.offset_x;
    s.center_y = layout.y_axis + placed.offset_y;
    s.waist = placed.waist;
    s.wavelength = wavelength;
    s.amplitude = placed.amplitude;
    s.envelope = PulseEnvelope::continuous_wave(placed.ramp_periods);
    scene.sources.push_back(s);
  }

  // Monitors. Lines are clamped into the interior.
  const auto clamp_i = [&](int i) { return std::clamp(i, inner.i0 + 1, inner.i1 - 1); };
  const auto clamp_j = [&](int j) { return std::clamp(j, inner.j0 + 1, inner.j1 - 1); };
  const int half_span = std::max(2, static_cast<int>(std::lround(diameter / dx)));
  const int j_lo = clamp_j(j_axis - half_span - layout.wire_cells_across / 2);
  const int j_hi = clamp_j(j_axis + half_span + layout.wire_cells_across / 2);
  auto& mons = scene.monitors;
  if (geometry.has_wire) {
    const double coupled_x = layout.x_in + std::min(geometry.coupled_monitor_offset, 0.5 * length);
    mons.push_back({"coupled", FluxNormal::x_normal, clamp_i(cell_of(coupled_x, dx)), j_lo, j_hi, {}});
    const double reverse_x = layout.x_out - std::min(geometry.reverse_monitor_offset, 0.5 * length);
    mons.push_back({"reverse_guided", FluxNormal::x_normal, clamp_i(cell_of(reverse_x, dx)), j_lo, j_hi, {}});
    for (std::size_t k = 0; k < geometry.profile_positions.size(); ++k) {
      const double x = layout.x_in + geometry.profile_positions[k];
      mons.push_back({"profile_" + std::to_string(k), FluxNormal::x_normal, clamp_i(cell_of(x, dx)), j_lo, j_hi, {}});
    }
  }
  const int out_span = static_cast<int>(std::lround(1.0e-6 / dx));
  mons.push_back({"output", FluxNormal::x_normal, clamp_i(cell_of(layout.x_out + geometry.output_monitor_offset, dx)),
                  clamp_j(j_axis - out_span), clamp_j(j_axis + out_span), {}});
  const int j_inc = clamp_j(cell_of(layout.y_axis + 0.5 * diameter + geometry.incident_monitor_height, dx));
  mons.push_back({"incident", FluxNormal::y_normal, j_inc, inner.i0 + 2, inner.i1 - 2, {}});
  const CellRect box{inner.i0 + 2, inner.i1 - 2, inner.j0 + 2, inner.j1 - 2};
  mons.push_back({"box_left", FluxNormal::x_normal, box.i0, box.j0, box.j1, {}});
  mons.push_back({"box_right", FluxNormal::x_normal, box.i1, box.j0, box.j1, {}});
  mons.push_back({"box_bottom", FluxNormal::y_normal, box.j0, box.i0, box.i1, {}});
  mons.push_back({"box_top", FluxNormal::y_normal, box.j1, box.i0, box.i1, {}});

  scene.warnings = std::move(warnings);
  return scene;
}

SceneGeometry vacuum_reference(const SceneGeometry& geometry) {
  SceneGeometry ref = geometry;
  double n_max = std::max(geometry.background_index, geometry.has_wire ? geometry.wire_index.n : 1.0);
  if (geometry.layered_substrate) n_max = std::max({n_max, geometry.substrate_index, geometry.pmma_index});
  ref.resolution_index = std::max(n_max, geometry.resolution_index);
  ref.wire_index = ComplexIndex{geometry.background_index, 0.0};
  ref.layered_substrate = false;
  return ref;
}

SceneRun::SceneRun(Scene scene)
    : layout_(scene.layout), solver_(std::move(scene.grid), std::move(scene.material)) {
  for (const auto& s : scene.sources) solver_.inject_source(s);
  for (auto& m : scene.monitors) solver_.add_flux_monitor(std::move(m));
}

MonitorReport SceneRun::run_until_steady(const SteadyStateOptions& options) {
  MonitorReport report = solver_.run_until_steady(options);
  report.reference_x = layout_.x_out;
  report.reference_y = layout_.y_axis;
  return report;
}

}  // namespace nwsps::fdtd
