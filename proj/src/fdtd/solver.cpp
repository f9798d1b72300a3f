#include "nwsps/fdtd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"

namespace nwsps::fdtd {

double MonitorReport::flux(const std::string& id) const {
  for (const auto& f : fluxes)
    if (f.id == id) return f.mean_flux;
  throw InvalidArgument("no monitor named '" + id + "' in report");
}

Solver::Solver(SimulationGrid grid, MaterialMap material)
    : grid_(std::move(grid)), material_(std::move(material)) {
  if (material_.nx() != grid_.nx || material_.ny() != grid_.ny)
    throw InvalidArgument("material map dimensions do not match the grid");
  const std::size_t cells = grid_.ez.size();
  ca_.resize(cells);
  cb_.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const double eps = kEpsilon0 * material_.eps_r()[k];
    const double loss = material_.sigma()[k] * grid_.dt / (2.0 * eps);
    ca_[k] = (1.0 - loss) / (1.0 + loss);
    cb_[k] = (grid_.dt / eps) / (1.0 + loss) / grid_.dx;
  }
}

const Source& Solver::inject_source(const SourceSpec& spec) {
  sources_.emplace_back(spec, grid_);
  return sources_.back();
}

FluxMonitor& Solver::add_flux_monitor(FluxMonitorSpec spec) {
  for (const auto& m : monitors_)
    if (m.id() == spec.id) throw InvalidArgument("duplicate flux monitor id '" + spec.id + "'");
  monitors_.emplace_back(std::move(spec), grid_);
  return monitors_.back();
}

const FluxMonitor& Solver::monitor(const std::string& id) const {
  for (const auto& m : monitors_)
    if (m.id() == id) return m;
  throw InvalidArgument("no flux monitor named '" + id + "'");
}

std::size_t Solver::add_probe(int i, int j) {
  if (i < 0 || i >= grid_.nx || j < 0 || j >= grid_.ny) {
    std::ostringstream os;
    os << "probe cell (" << i << ", " << j << ") is outside the grid";
    throw InvalidArgument(os.str());
  }
  probes_.push_back(PointProbe{i, j, {}});
  return probes_.size() - 1;
}

void Solver::record_field_dft(std::vector<double> frequencies) {
  dft_freqs_ = std::move(frequencies);
  dft_maps_.assign(dft_freqs_.size(), std::vector<std::complex<double>>(grid_.ez.size()));
}

std::vector<FieldIntensityMap> Solver::field_dft_maps() const {
  std::vector<FieldIntensityMap> out;
  for (std::size_t f = 0; f < dft_freqs_.size(); ++f) {
    FieldIntensityMap m{dft_freqs_[f], grid_.nx, grid_.ny, grid_.dx, {}};
    m.e_squared.reserve(dft_maps_[f].size());
    for (const auto& c : dft_maps_[f]) m.e_squared.push_back(std::norm(c));
    out.push_back(std::move(m));
  }
  return out;
}

void Solver::track_energy(const CellRect& box) {
  const CellRect inner = grid_.interior();
  if (box.empty() || !inner.contains(box.i0, box.j0) || !inner.contains(box.i1, box.j1))
    throw InvalidArgument("energy box must lie inside the non-PML interior");
  energy_box_ = box;
  box_monitors_.clear();
  const auto add = [&](const char* id, FluxNormal normal, int fixed, int from, int to) {
    add_flux_monitor(FluxMonitorSpec{std::string("__box_") + id, normal, fixed, from, to, {}});
    box_monitors_.push_back(monitors_.size() - 1);
  };
  add("left", FluxNormal::x_normal, box.i0, box.j0, box.j1);
  add("right", FluxNormal::x_normal, box.i1, box.j0, box.j1);
  add("bottom", FluxNormal::y_normal, box.j0, box.i0, box.i1);
  add("top", FluxNormal::y_normal, box.j1, box.i0, box.i1);
}

EnergyBalance Solver::energy_balance() const {
  if (!energy_box_) throw InvalidArgument("energy tracking was not enabled");
  const CellRect& b = *energy_box_;
  EnergyBalance out;
  out.injected = injected_in_box_;
  out.outflow = -monitors_[box_monitors_[0]].integrated() + monitors_[box_monitors_[1]].integrated() -
                monitors_[box_monitors_[2]].integrated() + monitors_[box_monitors_[3]].integrated();

  // Leapfrog-conserved form: eps E^n E^n + mu H^{n-1/2} H^{n+1/2}, with the
  // next H half-step evaluated in place (the box lies outside the PML).
  // Trapezoidal weights: nodes on the flux lines count half.
  auto w = [](int k, int lo, int hi) { return (k == lo || k == hi) ? 0.5 : 1.0; };
  const double ch = grid_.dt / (kMu0 * grid_.dx);
  const auto& ez = grid_.ez;
  double electric = 0.0, magnetic = 0.0;
  for (int j = b.j0; j <= b.j1; ++j) {
    for (int i = b.i0; i <= b.i1; ++i) {
      const std::size_t k = grid_.index(i, j);
      const double wij = w(i, b.i0, b.i1) * w(j, b.j0, b.j1);
      electric += wij * material_.eps_r()[k] * ez[k] * ez[k];
      if (j < b.j1) {
        const double next = grid_.hx[k] - ch * (ez[k + grid_.nx] - ez[k]);
        magnetic += w(i, b.i0, b.i1) * grid_.hx[k] * next;
      }
      if (i < b.i1) {
        const double next = grid_.hy[k] + ch * (ez[k + 1] - ez[k]);
        magnetic += w(j, b.j0, b.j1) * grid_.hy[k] * next;
      }
    }
  }
  out.stored = 0.5 * (kEpsilon0 * electric + kMu0 * magnetic) * grid_.dx * grid_.dx;
  return out;
}

double Solver::total_energy() const {
  return grid_.energy(CellRect{0, grid_.nx - 1, 0, grid_.ny - 1}, material_);
}

void Solver::update_h() {
  SimulationGrid& g = grid_;
  const int nx = g.nx, ny = g.ny;
  const double ch = g.dt / (kMu0 * g.dx);
  const bool per_x = g.x_boundary == Boundary::periodic;
  const bool per_y = g.y_boundary == Boundary::periodic;
  double* ez = g.ez.data();
  double* hx = g.hx.data();
  double* hy = g.hy.data();
  const double* kx = g.px.kinv_h.data();
  const double* ky = g.py.kinv_h.data();

#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const bool last_row = j == ny - 1;
    if (!last_row || per_y) {
      const int jn = last_row ? 0 : j + 1;
      const double* e0 = ez + static_cast<std::size_t>(j) * nx;
      const double* e1 = ez + static_cast<std::size_t>(jn) * nx;
      double* h = hx + static_cast<std::size_t>(j) * nx;
      const double s = ch * ky[j];
      for (int i = 0; i < nx; ++i) h[i] -= s * (e1[i] - e0[i]);
    }
    const double* e = ez + static_cast<std::size_t>(j) * nx;
    double* h = hy + static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx - 1; ++i) h[i] += ch * kx[i] * (e[i + 1] - e[i]);
    if (per_x) h[nx - 1] += ch * kx[nx - 1] * (e[0] - e[nx - 1]);
  }

  // CPML corrections
  const int p = g.pml_cells;
  if (g.x_boundary == Boundary::cpml) {
    const auto& pr = g.px;
    const auto apply = [&](int j, int i_lo, int i_hi) {
      for (int i = i_lo; i <= i_hi; ++i) {
        const std::size_t k = g.index(i, j);
        const double d = (ez[k + 1] - ez[k]) / g.dx;
        g.psi_hy_x[k] = pr.b_h[i] * g.psi_hy_x[k] + pr.c_h[i] * d;
        hy[k] += (g.dt / kMu0) * g.psi_hy_x[k];
      }
    };
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
      apply(j, 0, p - 1);
      apply(j, nx - 1 - p, nx - 2);
    }
  }
  if (g.y_boundary == Boundary::cpml) {
    const auto& pr = g.py;
    const auto apply_row = [&](int j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = g.index(i, j);
        const double d = (ez[k + nx] - ez[k]) / g.dx;
        g.psi_hx_y[k] = pr.b_h[j] * g.psi_hx_y[k] + pr.c_h[j] * d;
        hx[k] -= (g.dt / kMu0) * g.psi_hx_y[k];
      }
    };
    for (int j = 0; j < p; ++j) apply_row(j);
    for (int j = ny - 1 - p; j < ny - 1; ++j) apply_row(j);
  }
}

void Solver::update_e() {
  SimulationGrid& g = grid_;
  const int nx = g.nx, ny = g.ny;
  const bool per_x = g.x_boundary == Boundary::periodic;
  const bool per_y = g.y_boundary == Boundary::periodic;
  double* ez = g.ez.data();
  const double* hx = g.hx.data();
  const double* hy = g.hy.data();
  const double* kx = g.px.kinv_e.data();
  const double* ky = g.py.kinv_e.data();
  const int j_begin = per_y ? 0 : 1;
  const int j_end = per_y ? ny : ny - 1;
  const int i_begin = per_x ? 0 : 1;
  const int i_end = per_x ? nx : nx - 1;

#pragma omp parallel for schedule(static)
  for (int j = j_begin; j < j_end; ++j) {
    const int jp = j == 0 ? ny - 1 : j - 1;
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const double* hx0 = hx + static_cast<std::size_t>(jp) * nx;
    const double* hx1 = hx + row;
    const double* hyr = hy + row;
    double* e = ez + row;
    const double* ca = ca_.data() + row;
    const double* cb = cb_.data() + row;
    const double kyj = ky[j];
    for (int i = i_begin; i < i_end; ++i) {
      const int im = i == 0 ? nx - 1 : i - 1;
      const double curl = kx[i] * (hyr[i] - hyr[im]) - kyj * (hx1[i] - hx0[i]);
      e[i] = ca[i] * e[i] + cb[i] * curl;
    }
  }

  const int p = g.pml_cells;
  if (g.x_boundary == Boundary::cpml) {
    const auto& pr = g.px;
    const auto apply = [&](int j, int i_lo, int i_hi) {
      for (int i = i_lo; i <= i_hi; ++i) {
        const std::size_t k = g.index(i, j);
        const double d = (hy[k] - hy[k - 1]) / g.dx;
        g.psi_ez_x[k] = pr.b_e[i] * g.psi_ez_x[k] + pr.c_e[i] * d;
        ez[k] += cb_[k] * g.dx * g.psi_ez_x[k];
      }
    };
#pragma omp parallel for schedule(static)
    for (int j = j_begin; j < j_end; ++j) {
      apply(j, 1, p - 1);
      apply(j, nx - p, nx - 2);
    }
  }
  if (g.y_boundary == Boundary::cpml) {
    const auto& pr = g.py;
    const auto apply_row = [&](int j) {
      for (int i = i_begin; i < i_end; ++i) {
        const std::size_t k = g.index(i, j);
        const double d = (hx[k] - hx[k - nx]) / g.dx;
        g.psi_ez_y[k] = pr.b_e[j] * g.psi_ez_y[k] + pr.c_e[j] * d;
        ez[k] -= cb_[k] * g.dx * g.psi_ez_y[k];
      }
    };
    for (int j = 1; j < p; ++j) apply_row(j);
    for (int j = ny - p; j < ny - 1; ++j) apply_row(j);
  }
}

void Solver::apply_sources() {
  const double t = (grid_.step_index + 1) * grid_.dt;
  const double cell_area = grid_.dx * grid_.dx;
  for (const auto& src : sources_) {
    const double s = src.value(t);
    if (s == 0.0) continue;
    const auto& cells = src.cells();
    const auto& weights = src.weights();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t k = cells[c];
      const double add = s * weights[c];
      const double before = grid_.ez[k];
      // Change of the leapfrog-conserved energy caused by the kick: the
      // electric part plus the shift of the next H half-step.
      double work = kEpsilon0 * material_.eps_r()[k] * (before * add + 0.5 * add * add) * cell_area;
      const int ci = static_cast<int>(k % grid_.nx);
      const int cj = static_cast<int>(k / grid_.nx);
      if (ci > 0 && cj > 0 && ci < grid_.nx - 1 && cj < grid_.ny - 1) {
        const double curl = grid_.hx[k] - grid_.hx[k - grid_.nx] - grid_.hy[k] + grid_.hy[k - 1];
        work += 0.5 * grid_.dt * grid_.dx * add * curl;
      }
      injected_ += work;
      if (energy_box_ && energy_box_->contains(ci, cj)) injected_in_box_ += work;
      grid_.ez[k] = before + add;
    }
  }
}

void Solver::sample_monitors() {
  for (auto& m : monitors_) m.sample(grid_);
}

void Solver::check_finite() {
  bool ok = std::all_of(monitors_.begin(), monitors_.end(),
                        [](const FluxMonitor& m) { return std::isfinite(m.last_flux()); });
  if (ok && grid_.step_index % 128 == 0) ok = grid_.all_finite();
  if (!ok) {
    std::ostringstream os;
    os << "non-finite field value detected at step " << grid_.step_index;
    throw FieldDivergence(os.str(), grid_.step_index);
  }
}

void Solver::step() {
  update_h();
  sample_monitors();
  update_e();
  apply_sources();
  ++grid_.step_index;

  const double t = grid_.time();
  for (auto& p : probes_) p.samples.push_back(grid_.ez[grid_.index(p.i, p.j)]);
  for (std::size_t f = 0; f < dft_freqs_.size(); ++f) {
    const std::complex<double> ph = std::polar(grid_.dt, -2.0 * kPi * dft_freqs_[f] * t);
    auto& acc = dft_maps_[f];
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += grid_.ez[k] * ph;
  }
  if (period_dft_) {
    const std::complex<double> ph = std::polar(1.0, -period_omega_ * t);
    for (std::size_t k = 0; k < period_acc_.size(); ++k) period_acc_[k] += grid_.ez[k] * ph;
  }
  check_finite();
}

void Solver::run(std::int64_t steps) {
  for (std::int64_t s = 0; s < steps; ++s) step();
}

MonitorReport Solver::run_until_steady(const SteadyStateOptions& options) {
  const Source* cw = nullptr;
  for (const auto& s : sources_)
    if (s.is_continuous()) cw = &s;
  if (cw == nullptr) throw InvalidArgument("run_until_steady needs a continuous-wave source");

  const double period = cw->period();
  const auto steps_per_period =
      static_cast<std::int64_t>(std::max<long long>(1, std::llround(period / grid_.dt)));
  const double window = steps_per_period * grid_.dt;

  period_dft_ = true;
  period_omega_ = cw->angular_frequency();
  period_acc_.assign(grid_.ez.size(), {});
  std::vector<std::complex<double>> last_period;

  std::vector<double> previous(monitors_.size(), 0.0);
  std::vector<double> current(monitors_.size(), 0.0);
  int stable = 0;
  int periods = 0;
  bool converged = false;
  const std::int64_t ramp_steps =
      static_cast<std::int64_t>(std::ceil(cw->spec().envelope.ramp_periods * period / grid_.dt));

  while (grid_.step_index + steps_per_period <= options.max_steps) {
    std::vector<double> start(monitors_.size());
    for (std::size_t m = 0; m < monitors_.size(); ++m) start[m] = monitors_[m].integrated();
    std::fill(period_acc_.begin(), period_acc_.end(), std::complex<double>{});
    run(steps_per_period);
    ++periods;
    double scale = 0.0;
    for (std::size_t m = 0; m < monitors_.size(); ++m) {
      current[m] = (monitors_[m].integrated() - start[m]) / window;
      scale = std::max(scale, std::abs(current[m]));
    }
    if (grid_.step_index > ramp_steps && periods > 1) {
      bool settled = true;
      const double floor = std::max(scale * 1e-6, 1e-300);
      for (std::size_t m = 0; m < monitors_.size(); ++m) {
        const double denom = std::max(std::abs(current[m]), floor);
        if (std::abs(current[m] - previous[m]) / denom >= options.tolerance) settled = false;
      }
      stable = settled ? stable + 1 : 0;
    }
    previous = current;
    last_period.swap(period_acc_);
    period_acc_.assign(grid_.ez.size(), {});
    if (stable >= options.consecutive_periods) {
      converged = true;
      break;
    }
  }
  period_dft_ = false;

  MonitorReport report;
  report.converged = converged;
  report.steps = grid_.step_index;
  report.periods = periods;
  report.wavelength = kSpeedOfLight / (cw->angular_frequency() / (2.0 * kPi));
  for (std::size_t m = 0; m < monitors_.size(); ++m)
    if (monitors_[m].id().rfind("__", 0) != 0) report.fluxes.push_back({monitors_[m].id(), current[m]});
  FieldIntensityMap map{cw->angular_frequency() / (2.0 * kPi), grid_.nx, grid_.ny, grid_.dx, {}};
  map.e_squared.resize(grid_.ez.size(), 0.0);
  const double norm = 2.0 / static_cast<double>(steps_per_period);
  for (std::size_t k = 0; k < last_period.size(); ++k) map.e_squared[k] = std::norm(last_period[k] * norm);
  report.maps.push_back(std::move(map));
  report.recorded_region = grid_.interior();
  return report;
}

double facet_intensity_at(double offset, const MonitorReport& report) {
  if (report.maps.empty()) throw InvalidArgument("report carries no field map");
  const FieldIntensityMap& map = report.maps.front();
  const double x = report.reference_x + offset;
  const double y = report.reference_y;
  const int i = static_cast<int>(std::lround(x / map.dx));
  const int j = static_cast<int>(std::lround(y / map.dx));
  if (!report.recorded_region.contains(i, j)) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") m is outside the recorded monitor region";
    throw InvalidArgument(os.str());
  }
  return 0.5 * kSpeedOfLight * kEpsilon0 * map.at(i, j);
}

}  // namespace nwsps::fdtd
