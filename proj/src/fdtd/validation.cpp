#include "nwsps/fdtd/validation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"
#include "nwsps/fdtd/solver.hpp"

namespace nwsps::fdtd {

namespace {

std::complex<double> probe_phasor(const PointProbe& p, double dt, double omega, int steps_per_period, int periods) {
  std::complex<double> acc;
  const std::size_t n = p.samples.size();
  const std::size_t count = static_cast<std::size_t>(steps_per_period) * periods;
  for (std::size_t s = n - count; s < n; ++s) acc += p.samples[s] * std::polar(1.0, -omega * (s + 1) * dt);
  return acc * (2.0 / static_cast<double>(count));
}

// Periodic in y, dt an integer fraction of the optical period.
GridSpec plane_wave_grid(int nx, double dx, double wavelength) {
  GridSpec g;
  g.nx = nx;
  g.ny = 30;
  g.dx = dx;
  g.y_boundary = Boundary::periodic;
  const double period = wavelength / kSpeedOfLight;
  g.dt = period / std::ceil(period / (0.99 * courant_limit(dx)));
  return g;
}

int cells(double base, double cpw) { return static_cast<int>(std::lround(base * cpw / 20.0)); }

}  // namespace

double vacuum_phase_velocity_ratio(double wavelength, double cpw) {
  const double dx = wavelength / cpw;
  const int nx = cells(200, cpw);
  Solver solver(SimulationGrid(plane_wave_grid(nx, dx, wavelength)), MaterialMap(nx, 30));
  SourceSpec src;
  src.kind = SourceKind::plane_wave;
  src.center_x = cells(40, cpw) * dx;
  src.wavelength = wavelength;
  src.envelope = PulseEnvelope::continuous_wave(3.0);
  const Source& s = solver.inject_source(src);
  const int i0 = cells(80, cpw);
  const int gap = cells(60, cpw);
  const auto a = solver.add_probe(i0, 15);
  const auto b = solver.add_probe(i0 + gap, 15);
  const double dt = solver.grid().dt;
  const int spp = static_cast<int>(std::lround(s.period() / dt));
  solver.run(static_cast<std::int64_t>(spp) * 40);

  const double omega = s.angular_frequency();
  double dphi = std::arg(probe_phasor(solver.probe(a), dt, omega, spp, 4) / probe_phasor(solver.probe(b), dt, omega, spp, 4));
  dphi += 2.0 * kPi * std::round(gap / cpw - dphi / (2.0 * kPi));
  return omega / (dphi / (gap * dx)) / kSpeedOfLight;
}

double half_space_reflectance(double n, double wavelength, double cpw) {
  const double dx = wavelength / (cpw * n);
  const int nx = cells(400, cpw);
  const int interface_i = nx / 2;
  auto transmitted = [&](bool slab) {
    MaterialMap mat(nx, 30);
    if (slab) mat.fill(CellRect{interface_i, nx - 1, 0, 29}, ComplexIndex{n, 0.0}, 2.0 * kPi * kSpeedOfLight / wavelength);
    Solver solver(SimulationGrid(plane_wave_grid(nx, dx, wavelength)), std::move(mat));
    SourceSpec src;
    src.kind = SourceKind::plane_wave;
    src.center_x = cells(60, cpw) * dx;
    src.wavelength = wavelength;
    src.envelope = PulseEnvelope::continuous_wave(5.0);
    solver.inject_source(src);
    solver.add_flux_monitor({"t", FluxNormal::x_normal, interface_i + cells(40, cpw), 0, 29, {}});
    const auto report = solver.run_until_steady({1e-4, 5, 400000});
    if (!report.converged) throw NumericalError("reflectance run did not reach steady state");
    return report.flux("t");
  };
  return 1.0 - transmitted(true) / transmitted(false);
}

double cpml_return_fraction(double wavelength, double cpw) {
  const double dx = wavelength / cpw;
  const double dt = 0.99 * courant_limit(dx);
  auto make = [&](int n) {
    GridSpec g;
    g.nx = n;
    g.ny = n;
    g.dx = dx;
    g.dt = dt;
    Solver s{SimulationGrid(g), MaterialMap(n, n)};
    SourceSpec src;
    src.kind = SourceKind::line_dipole;
    src.center_x = (n / 2) * dx;
    src.center_y = (n / 2) * dx;
    src.wavelength = wavelength;
    src.envelope = PulseEnvelope::gaussian_pulse(1.5 * wavelength / kSpeedOfLight);
    s.inject_source(src);
    return s;
  };
  const int small = cells(80, cpw);
  const int big = cells(400, cpw);
  Solver a = make(small);
  Solver b = make(big);
  const int shift = big / 2 - small / 2;
  const CellRect region = a.grid().interior();
  double err = 0.0, ref = 0.0;
  // the pulse has left the small box, reflections in the big one have not returned
  const int steps = cells(900, cpw);
  for (int s = 0; s < steps; ++s) {
    a.step();
    b.step();
    for (int j = region.j0; j <= region.j1; ++j) {
      for (int i = region.i0; i <= region.i1; ++i) {
        const double ea = a.grid().ez[a.grid().index(i, j)];
        const double eb = b.grid().ez[b.grid().index(i + shift, j + shift)];
        err += (ea - eb) * (ea - eb);
        ref += eb * eb;
      }
    }
  }
  return err / ref;
}

double energy_balance_error(double wavelength, double cpw) {
  const double n = 2.4;
  const double dx = wavelength / (cpw * n);
  GridSpec g;
  g.nx = cells(200, cpw);
  g.ny = cells(160, cpw);
  g.dx = dx;
  MaterialMap mat(g.nx, g.ny);
  mat.fill(CellRect{cells(90, cpw), cells(150, cpw), cells(70, cpw), cells(100, cpw)}, ComplexIndex{n, 0.0},
           2.0 * kPi * kSpeedOfLight / wavelength);
  Solver solver(SimulationGrid(g), std::move(mat));
  SourceSpec src;
  src.kind = SourceKind::line_dipole;
  src.center_x = cells(60, cpw) * dx;
  src.center_y = cells(80, cpw) * dx;
  src.wavelength = wavelength;
  src.envelope = PulseEnvelope::gaussian_pulse(2.0 * wavelength / kSpeedOfLight);
  solver.inject_source(src);
  solver.track_energy(CellRect{15, g.nx - 16, 15, g.ny - 16});
  solver.run(cells(700, cpw));
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    solver.run(cells(300, cpw));
    const auto bal = solver.energy_balance();
    if (!(bal.injected > 0.0)) throw NumericalError("energy check injected nothing");
    worst = std::max(worst, std::abs(bal.residual()) / bal.injected);
  }
  return worst;
}

}  // namespace nwsps::fdtd
