#include "nwsps/modes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <utility>

#include "nwsps/csv.hpp"
#include "nwsps/error.hpp"

namespace nwsps::modes {

namespace {

constexpr double kPi = 3.14159265358979323846;

double jn(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * std::cyl_bessel_j(-n, x);
  return std::cyl_bessel_j(n, x);
}

// K_{nu-1}(w) / K_nu(w) for nu >= 1 from the upward ratio recurrence, safe
// for tiny w.
double k_ratio(int nu, double w) {
  double r = std::cyl_bessel_k(0, w) / std::cyl_bessel_k(1, w);
  for (int n = 1; n < nu; ++n) r = 1.0 / (r + 2.0 * n / w);
  return r;
}

struct Point {
  double u;
  double w;
  double n_eff;
};

Point at_b(const WaveguideSpec& s, double v, double b) {
  const double n1 = s.n_core, n2 = s.n_clad;
  return Point{v * std::sqrt(1.0 - b), v * std::sqrt(b), std::sqrt(n2 * n2 + b * (n1 * n1 - n2 * n2))};
}

// Pole-free characteristic function split into two sides: F = lhs + rhs.
std::pair<double, double> sides(Family f, int nu, const WaveguideSpec& s, const Point& p) {
  const double n1sq = s.n_core * s.n_core, n2sq = s.n_clad * s.n_clad;
  const double u = p.u, w = p.w;
  if (f == Family::TE || f == Family::TM) {
    // J1/(u J0) + c K1/(w K0) = 0 multiplied through by J0.
    const double kk = 1.0 / (k_ratio(1, w) * w);  // K1 / (w K0)
    const double a = (f == Family::TM ? n1sq : 1.0) * jn(1, u) / u;
    const double c = (f == Family::TM ? n2sq : 1.0) * jn(0, u) * kk;
    return {a, c};
  }
  // eta1 solves n1^2 eta1^2 + (n1^2 + n2^2) eta2 eta1 + (n2^2 eta2^2 - R) = 0.
  // The + root is free of cancellation; the - root follows from the product
  // of the roots, with the 1/w^4 terms of the constant cancelled analytically.
  // K'_nu / K_nu = -(K_{nu-1}/K_nu + nu/w)
  const double r = k_ratio(nu, w);
  const double eta2 = -(nu / w + r) / w;
  const double geo = 1.0 / (u * u) + 1.0 / (w * w);
  const double rhs = nu * nu * p.n_eff * p.n_eff * geo * geo;
  const double disc = std::sqrt((n1sq - n2sq) * (n1sq - n2sq) * eta2 * eta2 + 4.0 * n1sq * rhs);
  const double eta_plus = (-(n1sq + n2sq) * eta2 + disc) / (2.0 * n1sq);
  double eta1 = eta_plus;
  if (f == Family::HE) {
    const double v2 = u * u + w * w;
    const double u2 = u * u, w2 = w * w;
    const double c = 2.0 * n2sq * nu * r / (w2 * w) + n2sq * r * r / w2 -
                     nu * nu * n2sq * (2.0 / (u2 * w2) + 1.0 / (u2 * u2)) -
                     nu * nu * ((n1sq - n2sq) / v2) * (1.0 / w2 + 2.0 / u2 + w2 / (u2 * u2));
    eta1 = c / (n1sq * eta_plus);
  }
  const double jprime = 0.5 * (jn(nu - 1, u) - jn(nu + 1, u));
  return {jprime / u, -eta1 * jn(nu, u)};
}

double value(Family f, int nu, const WaveguideSpec& s, double v, double b) {
  const auto [a, c] = sides(f, nu, s, at_b(s, v, b));
  return a + c;
}

double relative_residual(Family f, int nu, const WaveguideSpec& s, double v, double b) {
  const auto [a, c] = sides(f, nu, s, at_b(s, v, b));
  const double scale = std::abs(a) + std::abs(c);
  return scale == 0.0 ? 0.0 : std::abs(a + c) / scale;
}

// Sample points in b: uniform in n_eff with step 1e-4 (n1 - n2), plus
// geometric points toward the cladding line and the core line.
std::vector<double> scan_points(const WaveguideSpec& s, double v) {
  const double n1 = s.n_core, n2 = s.n_clad;
  const double span = n1 * n1 - n2 * n2;
  std::vector<double> pts;
  const int steps = 10000;
  const double h = (n1 - n2) / steps;
  for (int k = 1; k < steps; ++k) {
    const double ne = n2 + k * h;
    pts.push_back((ne * ne - n2 * n2) / span);
  }
  const double b_first = pts.front();
  const double b_floor = std::pow(1e-60 / v, 2.0);
  for (double b = b_first / 2.0; b > b_floor; b /= 2.0) pts.push_back(b);
  for (double e = 1e-5; e > 1e-13; e /= 4.0) pts.push_back(1.0 - e);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double bisect(Family f, int nu, const WaveguideSpec& s, double v, double lo, double hi, double flo) {
  for (int it = 0; it < 400; ++it) {
    const double mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = value(f, nu, s, v, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void solve_family(Family f, int nu, const WaveguideSpec& s, double v, const std::vector<double>& pts,
                  ModeSearch& out) {
  std::vector<ModeSolution> found;
  double prev_b = pts.front();
  double prev_f = value(f, nu, s, v, prev_b);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double b = pts[k];
    const double fb = value(f, nu, s, v, b);
    if (!std::isfinite(fb) || !std::isfinite(prev_f)) {
      prev_b = b;
      prev_f = fb;
      continue;
    }
    if (prev_f != 0.0 && (fb == 0.0 || (fb < 0.0) != (prev_f < 0.0))) {
      const double root = fb == 0.0 ? b : bisect(f, nu, s, v, prev_b, b, prev_f);
      const double res = relative_residual(f, nu, s, v, root);
      if (res < 1e-6) {
        ModeSolution m;
        m.family = f;
        m.nu = nu;
        m.b = root;
        m.n_eff = at_b(s, v, root).n_eff;
        m.residual = res;
        found.push_back(m);
      } else {
        out.failures.push_back({f, nu, prev_b, b});
      }
    }
    prev_b = b;
    prev_f = fb;
  }
  std::sort(found.begin(), found.end(), [](const ModeSolution& a, const ModeSolution& b) { return a.n_eff > b.n_eff; });
  for (std::size_t k = 0; k < found.size(); ++k) found[k].m = static_cast<int>(k) + 1;
  out.modes.insert(out.modes.end(), found.begin(), found.end());
}

}  // namespace

void WaveguideSpec::validate() const {
  if (!(diameter > 0.0)) throw InvalidArgument("waveguide diameter must be positive");
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  if (!(n_clad >= 1.0)) throw InvalidArgument("cladding index must be >= 1");
  if (!(n_core > n_clad)) throw InvalidArgument("core index must exceed the cladding index");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::TE: return "TE";
    case Family::TM: return "TM";
    case Family::HE: return "HE";
    case Family::EH: return "EH";
  }
  return "?";
}

std::string ModeSolution::label() const { return family_name(family) + std::to_string(nu) + std::to_string(m); }

double v_number(const WaveguideSpec& spec) {
  spec.validate();
  return kPi * spec.diameter / spec.wavelength *
         std::sqrt(spec.n_core * spec.n_core - spec.n_clad * spec.n_clad);
}

double characteristic_residual(Family family, int nu, const WaveguideSpec& spec, double n_eff) {
  const double v = v_number(spec);
  const double n1 = spec.n_core, n2 = spec.n_clad;
  if (!(n_eff > n2 && n_eff < n1)) throw InvalidArgument("n_eff outside (n_clad, n_core)");
  const double b = (n_eff * n_eff - n2 * n2) / (n1 * n1 - n2 * n2);
  return relative_residual(family, nu, spec, v, b);
}

ModeSearch solve_modes(const WaveguideSpec& spec, int nu_max) {
  if (nu_max < 0) throw InvalidArgument("nu_max must be >= 0");
  const double v = v_number(spec);
  const std::vector<double> pts = scan_points(spec, v);
  ModeSearch out;
  solve_family(Family::TE, 0, spec, v, pts, out);
  solve_family(Family::TM, 0, spec, v, pts, out);
  for (int nu = 1; nu <= nu_max; ++nu) {
    solve_family(Family::HE, nu, spec, v, pts, out);
    solve_family(Family::EH, nu, spec, v, pts, out);
  }
  return out;
}

int mode_count(const WaveguideSpec& spec) {
  const double v = v_number(spec);
  const std::vector<double> pts = scan_points(spec, v);
  ModeSearch out;
  solve_family(Family::TE, 0, spec, v, pts, out);
  solve_family(Family::TM, 0, spec, v, pts, out);
  for (int nu = 1;; ++nu) {
    const std::size_t before = out.modes.size();
    solve_family(Family::HE, nu, spec, v, pts, out);
    solve_family(Family::EH, nu, spec, v, pts, out);
    if (out.modes.size() == before) break;
  }
  if (!out.failures.empty()) {
    const auto& f = out.failures.front();
    throw NumericalError("mode search could not resolve a bracket for " + family_name(f.family) +
                         std::to_string(f.nu));
  }
  return static_cast<int>(out.modes.size());
}

double first_j0_zero() {
  double lo = 2.0, hi = 3.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (std::cyl_bessel_j(0, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double single_mode_cutoff_diameter(double n_core, double n_clad, double wavelength) {
  WaveguideSpec s{1.0, n_core, n_clad, wavelength};
  s.validate();
  return first_j0_zero() * wavelength / (kPi * std::sqrt(n_core * n_core - n_clad * n_clad));
}

void write_modes_csv(std::ostream& out, const std::vector<ModeSolution>& modes, const std::string& provenance_line) {
  out << provenance_line << "\r\n";
  csv::write_row(out, {"family", "nu", "m", "n_eff", "b"});
  for (const auto& m : modes)
    csv::write_row(out, {family_name(m.family), std::to_string(m.nu), std::to_string(m.m), csv::format_number(m.n_eff),
                         csv::format_number(m.b)});
}

}  // namespace nwsps::modes
