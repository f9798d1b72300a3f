#include "nwsps/fdtd/monitor.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "nwsps/error.hpp"
#include "nwsps/fdtd/constants.hpp"

namespace nwsps::fdtd {

FluxMonitor::FluxMonitor(FluxMonitorSpec spec, const SimulationGrid& grid)
    : spec_(std::move(spec)), dx_(grid.dx), dt_(grid.dt) {
  if (spec_.to < spec_.from) std::swap(spec_.from, spec_.to);
  const bool vertical = spec_.normal == FluxNormal::x_normal;
  const int fixed_max = vertical ? grid.nx - 2 : grid.ny - 2;
  const int along_max = vertical ? grid.ny - 1 : grid.nx - 1;
  if (spec_.fixed < 1 || spec_.fixed > fixed_max || spec_.from < 0 || spec_.to > along_max) {
    std::ostringstream os;
    os << "flux monitor '" << spec_.id << "' line (fixed=" << spec_.fixed << ", " << spec_.from
       << ".." << spec_.to << ") is outside the grid";
    throw InvalidArgument(os.str());
  }
  const std::size_t n = static_cast<std::size_t>(spec_.to - spec_.from + 1);
  prev_h_.assign(n, 0.0);
  dft_e_.assign(spec_.frequencies.size(), std::vector<std::complex<double>>(n));
  dft_h_.assign(spec_.frequencies.size(), std::vector<std::complex<double>>(n));
}

int FluxMonitor::cell_i(int along) const {
  return spec_.normal == FluxNormal::x_normal ? spec_.fixed : along;
}

int FluxMonitor::cell_j(int along) const {
  return spec_.normal == FluxNormal::x_normal ? along : spec_.fixed;
}

double FluxMonitor::collocated_h(const SimulationGrid& g, int along) const {
  const int i = cell_i(along);
  const int j = cell_j(along);
  if (spec_.normal == FluxNormal::x_normal) return 0.5 * (g.hy[g.index(i - 1, j)] + g.hy[g.index(i, j)]);
  return 0.5 * (g.hx[g.index(i, j - 1)] + g.hx[g.index(i, j)]);
}

void FluxMonitor::sample(const SimulationGrid& g) {
  // S_x = -Ez Hy, S_y = Ez Hx
  const double sign = spec_.normal == FluxNormal::x_normal ? -1.0 : 1.0;
  const double t_e = g.time();
  const double t_h = t_e + 0.5 * g.dt;

  std::vector<std::complex<double>> phase_e(spec_.frequencies.size());
  std::vector<std::complex<double>> phase_h(spec_.frequencies.size());
  for (std::size_t k = 0; k < spec_.frequencies.size(); ++k) {
    const double w = 2.0 * kPi * spec_.frequencies[k];
    phase_e[k] = std::polar(dt_, -w * t_e);
    phase_h[k] = std::polar(dt_, -w * t_h);
  }

  double flux = 0.0;
  for (int a = spec_.from; a <= spec_.to; ++a) {
    const std::size_t slot = static_cast<std::size_t>(a - spec_.from);
    const double e = g.ez[g.index(cell_i(a), cell_j(a))];
    const double h_now = collocated_h(g, a);
    const double h_mid = primed_ ? 0.5 * (prev_h_[slot] + h_now) : h_now;
    prev_h_[slot] = h_now;
    flux += sign * e * h_mid;
    for (std::size_t k = 0; k < phase_e.size(); ++k) {
      dft_e_[k][slot] += e * phase_e[k];
      dft_h_[k][slot] += h_now * phase_h[k];
    }
  }
  primed_ = true;
  last_flux_ = flux * dx_;
  integrated_ += last_flux_ * dt_;
}

double FluxMonitor::spectral_flux(std::size_t k) const {
  const double sign = spec_.normal == FluxNormal::x_normal ? -1.0 : 1.0;
  double sum = 0.0;
  for (std::size_t s = 0; s < dft_e_[k].size(); ++s) sum += (dft_e_[k][s] * std::conj(dft_h_[k][s])).real();
  return sign * 0.5 * sum * dx_;
}

}  // namespace nwsps::fdtd
