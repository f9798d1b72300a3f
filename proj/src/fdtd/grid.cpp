#include "nwsps/fdtd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"

namespace nwsps::fdtd {

double ComplexIndex::conductivity(double angular_frequency) const {
  return 2.0 * n * k * angular_frequency * kEpsilon0;
}

double courant_limit(double dx) { return dx / (kSpeedOfLight * std::sqrt(2.0)); }

MaterialMap::MaterialMap(int nx, int ny)
    : nx_(nx), ny_(ny), eps_r_(static_cast<std::size_t>(nx) * ny, 1.0),
      sigma_(static_cast<std::size_t>(nx) * ny, 0.0) {}

void MaterialMap::set(int i, int j, ComplexIndex idx, double angular_frequency) {
  const double eps = idx.relative_permittivity();
  if (eps < 1.0) {
    throw InvalidArgument("relative permittivity below 1 is not supported (n=" +
                          std::to_string(idx.n) + ", k=" + std::to_string(idx.k) + ")");
  }
  if (idx.k < 0.0) throw InvalidArgument("extinction coefficient k must be >= 0");
  eps_r_[index(i, j)] = eps;
  sigma_[index(i, j)] = idx.conductivity(angular_frequency);
}

void MaterialMap::fill(const CellRect& rect, ComplexIndex idx, double angular_frequency) {
  const int i0 = std::max(rect.i0, 0), i1 = std::min(rect.i1, nx_ - 1);
  const int j0 = std::max(rect.j0, 0), j1 = std::min(rect.j1, ny_ - 1);
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) set(i, j, idx, angular_frequency);
}

double MaterialMap::max_index() const {
  double best = 1.0;
  for (double e : eps_r_) best = std::max(best, std::sqrt(e));
  return best;
}

bool MaterialMap::is_vacuum() const {
  return std::all_of(eps_r_.begin(), eps_r_.end(), [](double e) { return e == 1.0; }) &&
         std::all_of(sigma_.begin(), sigma_.end(), [](double s) { return s == 0.0; });
}

namespace {

// CPML grading along one axis. depth(x) in [0,1] is the normalized distance
// into the layer; zero in the interior.
void build_axis_profile(SimulationGrid::AxisProfile& p, int n, int cells, bool active,
                        const GridSpec& spec, double dt) {
  p.b_e.assign(n, 0.0);
  p.c_e.assign(n, 0.0);
  p.kinv_e.assign(n, 1.0);
  p.b_h.assign(n, 0.0);
  p.c_h.assign(n, 0.0);
  p.kinv_h.assign(n, 1.0);
  if (!active || cells <= 0) return;

  const double thickness = cells * spec.dx;
  const double m = spec.pml_order;
  const double sigma_max = -(m + 1.0) * std::log(spec.pml_reflection) / (2.0 * kEta0 * thickness);
  const double lo = cells;            // interior starts at E node `cells`
  const double hi = n - 1 - cells;    // interior ends at E node n-1-cells

  auto depth = [&](double pos) {
    if (pos < lo) return (lo - pos) / cells;
    if (pos > hi) return (pos - hi) / cells;
    return 0.0;
  };
  auto coeffs = [&](double rho, double& b, double& c, double& kinv) {
    const double sigma = sigma_max * std::pow(rho, m);
    const double kappa = 1.0 + (spec.pml_kappa_max - 1.0) * std::pow(rho, m);
    const double alpha = rho > 0.0 ? spec.pml_alpha_max * (1.0 - rho) : 0.0;
    kinv = 1.0 / kappa;
    b = std::exp(-(sigma / kappa + alpha) * dt / kEpsilon0);
    c = sigma > 0.0 ? sigma * (b - 1.0) / (sigma * kappa + kappa * kappa * alpha) : 0.0;
  };
  for (int i = 0; i < n; ++i) {
    coeffs(std::min(depth(i), 1.0), p.b_e[i], p.c_e[i], p.kinv_e[i]);
    coeffs(std::min(depth(i + 0.5), 1.0), p.b_h[i], p.c_h[i], p.kinv_h[i]);
  }
}

}  // namespace

SimulationGrid::SimulationGrid(const GridSpec& spec)
    : nx(spec.nx), ny(spec.ny), dx(spec.dx), dt(0.0), pml_cells(spec.pml_cells),
      x_boundary(spec.x_boundary), y_boundary(spec.y_boundary) {
  const int min_cells = 2 * spec.pml_cells + 10;
  if (nx < min_cells || ny < min_cells) {
    std::ostringstream os;
    os << "grid " << nx << "x" << ny << " too small: need at least " << min_cells
       << " cells per axis (2*PML + 10)";
    throw InvalidArgument(os.str());
  }
  if (!(dx > 0.0)) throw InvalidArgument("cell size dx must be positive");
  if (!(spec.courant_fraction > 0.0 && spec.courant_fraction <= 1.0))
    throw InvalidArgument("courant_fraction must be in (0, 1]");
  const double limit = courant_limit(dx);
  if (spec.dt > 0.0) {
    if (spec.dt > limit) {
      std::ostringstream os;
      os << "time step " << spec.dt << " s violates the 2D Courant limit " << limit << " s";
      throw InvalidArgument(os.str());
    }
    dt = spec.dt;
  } else {
    dt = spec.courant_fraction * limit;
  }

  const std::size_t cells = static_cast<std::size_t>(nx) * ny;
  ez.assign(cells, 0.0);
  hx.assign(cells, 0.0);
  hy.assign(cells, 0.0);
  psi_ez_x.assign(cells, 0.0);
  psi_ez_y.assign(cells, 0.0);
  psi_hx_y.assign(cells, 0.0);
  psi_hy_x.assign(cells, 0.0);

  build_axis_profile(px, nx, pml_cells, x_boundary == Boundary::cpml, spec, dt);
  build_axis_profile(py, ny, pml_cells, y_boundary == Boundary::cpml, spec, dt);
}

CellRect SimulationGrid::interior() const {
  CellRect r{0, nx - 1, 0, ny - 1};
  if (x_boundary == Boundary::cpml) {
    r.i0 = pml_cells;
    r.i1 = nx - 1 - pml_cells;
  }
  if (y_boundary == Boundary::cpml) {
    r.j0 = pml_cells;
    r.j1 = ny - 1 - pml_cells;
  }
  return r;
}

double SimulationGrid::energy(const CellRect& rect, const MaterialMap& material) const {
  double electric = 0.0;
  double magnetic = 0.0;
  for (int j = rect.j0; j <= rect.j1; ++j) {
    for (int i = rect.i0; i <= rect.i1; ++i) {
      const std::size_t k = index(i, j);
      electric += material.eps_r()[k] * ez[k] * ez[k];
      magnetic += hx[k] * hx[k] + hy[k] * hy[k];
    }
  }
  return 0.5 * (kEpsilon0 * electric + kMu0 * magnetic) * dx * dx;
}

bool SimulationGrid::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(ez) && finite(hx) && finite(hy);
}

void SimulationGrid::clear_fields() {
  for (auto* v : {&ez, &hx, &hy, &psi_ez_x, &psi_ez_y, &psi_hx_y, &psi_hy_x})
    std::fill(v->begin(), v->end(), 0.0);
  step_index = 0;
}

}  // namespace nwsps::fdtd
