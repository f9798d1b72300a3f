#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nwsps::fdtd {

enum class Boundary { cpml, periodic };

// Inclusive cell range [i0, i1] x [j0, j1].
struct CellRect {
  int i0 = 0;
  int i1 = -1;
  int j0 = 0;
  int j1 = -1;

  bool empty() const { return i1 < i0 || j1 < j0; }
  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
};

// Complex refractive index n + ik at one wavelength.
struct ComplexIndex {
  double n = 1.0;
  double k = 0.0;

  double relative_permittivity() const { return n * n - k * k; }
  // sigma_e = 2 n k omega eps0
  double conductivity(double angular_frequency) const;
};

struct GridSpec {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;                 // m, square cells
  double courant_fraction = 0.99;  // dt = fraction * dx / (c sqrt 2)
  double dt = 0.0;                 // explicit override when > 0, must obey Courant
  int pml_cells = 10;
  double pml_order = 3.0;
  double pml_reflection = 1e-6;
  double pml_kappa_max = 1.0;
  double pml_alpha_max = 0.0;      // CFS shift, S/m
  Boundary x_boundary = Boundary::cpml;
  Boundary y_boundary = Boundary::cpml;
};

double courant_limit(double dx);

// Per-cell relative permittivity and electric conductivity.
class MaterialMap {
public:
  MaterialMap() = default;
  MaterialMap(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  double eps_r(int i, int j) const { return eps_r_[index(i, j)]; }
  double sigma(int i, int j) const { return sigma_[index(i, j)]; }
  const std::vector<double>& eps_r() const { return eps_r_; }
  const std::vector<double>& sigma() const { return sigma_; }

  void set(int i, int j, ComplexIndex index, double angular_frequency);
  void fill(const CellRect& rect, ComplexIndex index, double angular_frequency);
  double max_index() const;
  bool is_vacuum() const;

private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> eps_r_;
  std::vector<double> sigma_;
};

// Field state of a 2D TM (Ez, Hx, Hy) Yee lattice plus the CPML auxiliary
// variables. Ez(i,j) sits at (i, j) dx, Hx at (i, j+1/2) dx, Hy at (i+1/2, j) dx.
struct SimulationGrid {
  explicit SimulationGrid(const GridSpec& spec);

  int nx;
  int ny;
  double dx;
  double dt;
  int pml_cells;
  Boundary x_boundary;
  Boundary y_boundary;
  std::int64_t step_index = 0;

  std::vector<double> ez;
  std::vector<double> hx;
  std::vector<double> hy;

  // CPML convolution accumulators (full-size, only touched inside the layers).
  std::vector<double> psi_ez_x, psi_ez_y, psi_hx_y, psi_hy_x;

  // 1D profiles: b, c recursion coefficients and 1/kappa at E (integer) and
  // H (half-integer) positions along each axis.
  struct AxisProfile {
    std::vector<double> b_e, c_e, kinv_e;
    std::vector<double> b_h, c_h, kinv_h;
  };
  AxisProfile px;
  AxisProfile py;

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  double time() const { return static_cast<double>(step_index) * dt; }

  // Non-PML interior (whole axis when periodic).
  CellRect interior() const;
  bool in_pml(int i, int j) const { return !interior().contains(i, j); }

  // Electromagnetic energy per unit length (J/m) stored in `rect`.
  double energy(const CellRect& rect, const MaterialMap& material) const;
  bool all_finite() const;
  void clear_fields();
};

}  // namespace nwsps::fdtd
