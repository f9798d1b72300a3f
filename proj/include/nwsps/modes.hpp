#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nwsps::modes {

// Step-index circular waveguide: core of diameter `diameter` and index
// n_core in a uniform cladding n_clad. Lengths in metres.
struct WaveguideSpec {
  double diameter = 280e-9;
  double n_core = 2.4;
  double n_clad = 1.0;
  double wavelength = 405e-9;

  void validate() const;
};

enum class Family { TE, TM, HE, EH };

std::string family_name(Family f);

struct ModeSolution {
  Family family = Family::HE;
  int nu = 1;  // azimuthal order
  int m = 1;   // radial order, 1 = highest n_eff within (family, nu)
  double n_eff = 0.0;
  double b = 0.0;  // normalized propagation constant
  double residual = 0.0;

  std::string label() const;  // e.g. "HE11", "TE01"
};

// A sign change that bisection could not turn into a root.
struct BracketFailure {
  Family family;
  int nu;
  double b_lo;
  double b_hi;
};

struct ModeSearch {
  std::vector<ModeSolution> modes;  // grouped by (nu, family), decreasing n_eff
  std::vector<BracketFailure> failures;
};

double v_number(const WaveguideSpec& spec);

// Normalized residual of the exact characteristic equation at n_eff, in
// [0, 1]: |L + R| / (|L| + |R|) for the two balanced sides.
double characteristic_residual(Family family, int nu, const WaveguideSpec& spec, double n_eff);

ModeSearch solve_modes(const WaveguideSpec& spec, int nu_max);

// Number of distinct guided (family, nu, m) solutions, scanning azimuthal
// orders until one yields no mode.
int mode_count(const WaveguideSpec& spec);

// Diameter at which V equals the first zero of J0 (TE01/TM01 cutoff).
double single_mode_cutoff_diameter(double n_core, double n_clad, double wavelength);

// First zero of J0, 2.40482...
double first_j0_zero();

// family, nu, m, n_eff, b
void write_modes_csv(std::ostream& out, const std::vector<ModeSolution>& modes, const std::string& provenance_line);

}  // namespace nwsps::modes
