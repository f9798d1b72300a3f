// Physics oracles for the Yee solver: dispersion, Fresnel, CPML, energy.
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nwsps/fdtd/constants.hpp"
#include "nwsps/fdtd/solver.hpp"

using namespace nwsps::fdtd;

namespace {

constexpr double kLambda = 405e-9;

// Steady-state complex amplitude of a probe over its last `periods` periods.
std::complex<double> probe_phasor(const PointProbe& p, double dt, double omega, int steps_per_period, int periods) {
  std::complex<double> acc;
  const std::size_t n = p.samples.size();
  const std::size_t count = static_cast<std::size_t>(steps_per_period) * periods;
  for (std::size_t s = n - count; s < n; ++s) acc += p.samples[s] * std::polar(1.0, -omega * (s + 1) * dt);
  return acc * (2.0 / static_cast<double>(count));
}

GridSpec plane_wave_grid(int nx, double dx) {
  GridSpec g;
  g.nx = nx;
  g.ny = 30;
  g.dx = dx;
  g.y_boundary = Boundary::periodic;
  const double period = kLambda / kSpeedOfLight;
  g.dt = period / std::ceil(period / (0.99 * courant_limit(dx)));
  return g;
}

}  // namespace

TEST_CASE("vacuum plane wave phase velocity at 20 cells per wavelength") {
  const double dx = kLambda / 20.0;
  SimulationGrid grid(plane_wave_grid(200, dx));
  Solver solver(std::move(grid), MaterialMap(200, 30));
  SourceSpec src;
  src.kind = SourceKind::plane_wave;
  src.center_x = 40 * dx;
  src.wavelength = kLambda;
  src.envelope = PulseEnvelope::continuous_wave(3.0);
  const Source& s = solver.inject_source(src);
  const int gap = 60;
  const auto a = solver.add_probe(80, 15);
  const auto b = solver.add_probe(80 + gap, 15);
  const double dt = solver.grid().dt;
  const int spp = static_cast<int>(std::lround(s.period() / dt));
  solver.run(spp * 40);

  const double omega = s.angular_frequency();
  const auto pa = probe_phasor(solver.probe(a), dt, omega, spp, 4);
  const auto pb = probe_phasor(solver.probe(b), dt, omega, spp, 4);
  double dphi = std::arg(pa / pb);  // phase lag accumulated over `gap` cells
  const double cycles = gap / 20.0;
  dphi += 2.0 * kPi * std::round(cycles - dphi / (2.0 * kPi));
  const double k_num = dphi / (gap * dx);
  const double v_num = omega / k_num;

  // Analytic Yee dispersion along an axis: sin(w dt/2)/(c dt) = sin(k dx/2)/dx
  const double k_yee = 2.0 / dx * std::asin(dx / (kSpeedOfLight * dt) * std::sin(omega * dt / 2.0));
  const double v_yee = omega / k_yee;

  MESSAGE("phase velocity / c = " << v_num / kSpeedOfLight << ", Yee analytic " << v_yee / kSpeedOfLight);
  CHECK(std::abs(v_num / kSpeedOfLight - 1.0) < 0.01);
  CHECK(std::abs(v_num / v_yee - 1.0) < 2e-3);
}

TEST_CASE("normal incidence Fresnel reflectance of an n=2.4 half-space") {
  const double n = 2.4;
  const double dx = kLambda / (20.0 * n);
  const int nx = 400;
  const int interface_i = 200;
  auto run = [&](bool slab) {
    SimulationGrid grid(plane_wave_grid(nx, dx));
    MaterialMap mat(nx, 30);
    const double omega = 2.0 * kPi * kSpeedOfLight / kLambda;
    if (slab) mat.fill(CellRect{interface_i, nx - 1, 0, 29}, ComplexIndex{n, 0.0}, omega);
    Solver solver(std::move(grid), std::move(mat));
    SourceSpec src;
    src.kind = SourceKind::plane_wave;
    src.center_x = 60 * dx;
    src.wavelength = kLambda;
    src.envelope = PulseEnvelope::continuous_wave(5.0);
    solver.inject_source(src);
    solver.add_flux_monitor({"t", FluxNormal::x_normal, interface_i + 40, 0, 29, {}});
    const auto report = solver.run_until_steady({1e-4, 5, 200000});
    REQUIRE(report.converged);
    return report.flux("t");
  };
  const double incident = run(false);
  const double transmitted = run(true);
  const double reflectance = 1.0 - transmitted / incident;
  const double fresnel = std::pow((n - 1.0) / (n + 1.0), 2);
  CHECK(fresnel == doctest::Approx(0.1696).epsilon(1e-3));
  MESSAGE("numerical reflectance " << reflectance);
  CHECK(std::abs(reflectance - fresnel) < 0.005);
}

TEST_CASE("CPML returns less than 1e-4 of the incident pulse energy") {
  const double dx = kLambda / 20.0;
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
    src.wavelength = kLambda;
    src.envelope = PulseEnvelope::gaussian_pulse(1.5 * kLambda / kSpeedOfLight);
    s.inject_source(src);
    return s;
  };
  const int small = 80;
  const int big = 400;
  Solver a = make(small);
  Solver b = make(big);
  const int shift = (big / 2) - (small / 2);
  const CellRect region = a.grid().interior();
  double err = 0.0, ref = 0.0;
  const int steps = 900;  // pulse leaves the small box; big box reflections have not returned
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
  MESSAGE("CPML returned energy fraction " << err / ref);
  CHECK(err / ref < 1e-4);
}

TEST_CASE("energy balance in a lossless scene closes within 2 percent") {
  const double dx = kLambda / (20.0 * 2.4);
  GridSpec g;
  g.nx = 200;
  g.ny = 160;
  g.dx = dx;
  SimulationGrid grid(g);
  MaterialMap mat(g.nx, g.ny);
  const double omega = 2.0 * kPi * kSpeedOfLight / kLambda;
  mat.fill(CellRect{90, 150, 70, 100}, ComplexIndex{2.4, 0.0}, omega);
  Solver solver(std::move(grid), std::move(mat));
  SourceSpec src;
  src.kind = SourceKind::line_dipole;
  src.center_x = 60 * dx;
  src.center_y = 80 * dx;
  src.wavelength = kLambda;
  src.envelope = PulseEnvelope::gaussian_pulse(2.0 * kLambda / kSpeedOfLight);
  solver.inject_source(src);
  solver.track_energy(CellRect{15, 184, 15, 144});
  solver.run(700);  // pulse peak has been emitted
  for (int checkpoint = 0; checkpoint < 6; ++checkpoint) {
    solver.run(300);
    const auto bal = solver.energy_balance();
    MESSAGE("injected " << bal.injected << " stored " << bal.stored << " out " << bal.outflow);
    REQUIRE(bal.injected > 0.0);
    CHECK(std::abs(bal.residual()) < 0.02 * bal.injected);
  }
}

TEST_CASE("total energy never grows after the source turns off in a lossless scene") {
  const double dx = kLambda / 20.0;
  GridSpec g;
  g.nx = 120;
  g.ny = 120;
  g.dx = dx;
  SimulationGrid grid(g);
  MaterialMap mat(g.nx, g.ny);
  mat.fill(CellRect{50, 70, 40, 80}, ComplexIndex{2.0, 0.0}, 1.0);
  Solver solver(std::move(grid), std::move(mat));
  SourceSpec src;
  src.kind = SourceKind::line_dipole;
  src.center_x = 40 * dx;
  src.center_y = 60 * dx;
  src.wavelength = kLambda;
  src.envelope = PulseEnvelope::gaussian_pulse(kLambda / kSpeedOfLight, 3.0);
  solver.inject_source(src);
  solver.run(200);  // envelope is below 1e-20 from here on

  // Yee's conserved form pairs E^n with H^{n-1/2} . H^{n+1/2}.
  const auto& gr = solver.grid();
  const auto& eps = solver.material().eps_r();
  double previous = INFINITY;
  for (int s = 0; s < 600; ++s) {
    const std::vector<double> hx_old = gr.hx, hy_old = gr.hy, ez_old = gr.ez;
    solver.step();
    double w = 0.0;
    for (std::size_t k = 0; k < ez_old.size(); ++k)
      w += kEpsilon0 * eps[k] * ez_old[k] * ez_old[k] + kMu0 * (hx_old[k] * gr.hx[k] + hy_old[k] * gr.hy[k]);
    CHECK(w <= previous * (1.0 + 1e-12));
    previous = w;
  }
}
