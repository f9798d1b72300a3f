#pragma once

namespace nwsps::fdtd {

// Self-checks of the solver against closed-form results. Each builds its own
// small grid and runs to completion.

// Numerical phase velocity of a vacuum plane wave over c.
double vacuum_phase_velocity_ratio(double wavelength, double cells_per_wavelength);

// Normal-incidence power reflectance of a lossless half-space of index n,
// from transmitted flux with and without the slab.
double half_space_reflectance(double n, double wavelength, double cells_per_wavelength);

// Field energy returned by the CPML: a small box against a large reference
// box, summed over the interior of the small one.
double cpml_return_fraction(double wavelength, double cells_per_wavelength);

// Worst |injected - stored - outflow| / injected over several checkpoints of a
// dielectric block excited by a dipole pulse.
double energy_balance_error(double wavelength, double cells_per_wavelength);

}  // namespace nwsps::fdtd
