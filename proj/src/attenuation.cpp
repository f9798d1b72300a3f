#include "nwsps/attenuation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "nwsps/csv.hpp"

namespace nwsps::attenuation {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxIterations = 500;
constexpr double kTolerance = 1e-8;

// Fit in scaled coordinates t = (x - x0) / L, y = I / S with
// y(t) = a exp(-b t) + c.
struct Scaled {
  std::vector<double> t;
  std::vector<double> y;
  double x0 = 0.0;
  double length = 1.0;
  double scale = 1.0;
};

double ssr(const Scaled& s, const Eigen::Vector3d& q) {
  double acc = 0.0;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const double r = s.y[k] - (q[0] * std::exp(-q[1] * s.t[k]) + q[2]);
    acc += r * r;
  }
  return acc;
}

Eigen::Vector3d project(Eigen::Vector3d q) {
  q[1] = std::max(q[1], 0.0);
  q[2] = std::max(q[2], 0.0);
  return q;
}

Eigen::Vector3d initial_guess(const Scaled& s) {
  const double c0 = std::max(s.y.back(), 0.0);
  const double a0 = s.y.front() - c0;
  // log-linear fit of (y - c0) over the points where it is positive
  double sw = 0, st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    const double d = s.y[k] - c0;
    if (d <= 0.0) continue;
    const double l = std::log(d);
    sw += 1;
    st += s.t[k];
    sl += l;
    stt += s.t[k] * s.t[k];
    stl += s.t[k] * l;
  }
  double b0 = 1.0;
  const double den = sw * stt - st * st;
  if (sw >= 2 && den > 0.0) {
    const double slope = (sw * stl - st * sl) / den;
    if (slope < 0.0 && std::isfinite(slope)) b0 = -slope;
  }
  return Eigen::Vector3d(a0, b0, c0);
}

DecayFit unscale(const Scaled& s, const Eigen::Vector3d& q, const DecaySeries& series, int iterations) {
  DecayFit fit;
  fit.amplitude = q[0] * s.scale * std::exp(q[1] * s.x0 / s.length);
  fit.alpha = q[1] / s.length;
  fit.offset = q[2] * s.scale;
  fit.iterations = iterations;
  const std::size_t n = series.x.size();
  Eigen::MatrixXd jac(n, 3);
  double sum = 0.0;
  fit.residuals.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = series.intensity[k] - model_intensity(fit.amplitude, fit.alpha, fit.offset, series.x[k]);
    fit.residuals[k] = r;
    sum += r * r;
    const auto g = model_jacobian(fit.amplitude, fit.alpha, fit.offset, series.x[k]);
    for (int c = 0; c < 3; ++c) jac(static_cast<Eigen::Index>(k), c) = g[c];
  }
  fit.rms = std::sqrt(sum / static_cast<double>(n));
  const double s2 = sum / static_cast<double>(n - 3);
  const Eigen::Matrix3d jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::Matrix3d cov = s2 * lu.inverse();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) fit.covariance[r][c] = cov(r, c);
  }
  return fit;
}

}  // namespace

void DecaySeries::validate() const {
  if (x.size() != intensity.size()) throw InvalidArgument("decay series: positions and intensities differ in length");
  if (x.size() < 4) throw InvalidArgument("decay series: at least 4 points are required for a 3-parameter fit");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k]) || !std::isfinite(intensity[k]))
      throw InvalidArgument("decay series: non-finite value at point " + std::to_string(k));
    if (x[k] < 0.0) throw InvalidArgument("decay series: negative position at point " + std::to_string(k));
    if (intensity[k] < 0.0) throw InvalidArgument("decay series: negative intensity at point " + std::to_string(k));
    if (k > 0 && !(x[k] > x[k - 1]))
      throw InvalidArgument("decay series: positions must be strictly increasing (point " + std::to_string(k) + ")");
  }
}

double DecayFit::alpha_sigma() const { return std::sqrt(std::max(covariance[1][1], 0.0)); }

bool DecayFit::has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

double model_intensity(double amplitude, double alpha, double offset, double x) {
  return amplitude * std::exp(-alpha * x) + offset;
}

std::array<double, 3> model_jacobian(double amplitude, double alpha, double, double x) {
  const double e = std::exp(-alpha * x);
  return {e, -amplitude * x * e, 1.0};
}

DecayFit fit_decay(const DecaySeries& series) {
  series.validate();
  const auto [lo, hi] = std::minmax_element(series.intensity.begin(), series.intensity.end());
  if (*hi - *lo <= 1e-12 * std::max(std::abs(*hi), 1e-300)) {
    DecayFit fit;
    fit.offset = series.intensity.front();
    fit.residuals.assign(series.x.size(), 0.0);
    fit.flags.push_back("flat");
    return fit;
  }

  Scaled s;
  s.x0 = series.x.front();
  s.length = series.x.back() - series.x.front();
  s.scale = *hi;
  for (std::size_t k = 0; k < series.x.size(); ++k) {
    s.t.push_back((series.x[k] - s.x0) / s.length);
    s.y.push_back(series.intensity[k] / s.scale);
  }

  Eigen::Vector3d q = project(initial_guess(s));
  double cost = ssr(s, q);
  double lambda = 1e-3;
  const std::size_t n = s.t.size();
  for (int it = 1; it <= kMaxIterations; ++it) {
    Eigen::MatrixXd jac(n, 3);
    Eigen::VectorXd res(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = std::exp(-q[1] * s.t[k]);
      const auto i = static_cast<Eigen::Index>(k);
      res(i) = s.y[k] - (q[0] * e + q[2]);
      jac(i, 0) = e;
      jac(i, 1) = -q[0] * s.t[k] * e;
      jac(i, 2) = 1.0;
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d jtr = jac.transpose() * res;

    bool accepted = false;
    Eigen::Vector3d next = q;
    while (lambda < 1e16) {
      Eigen::Matrix3d damped = jtj;
      for (int d = 0; d < 3; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-12);
      next = project(q + damped.ldlt().solve(jtr));
      const double trial = ssr(s, next);
      if (std::isfinite(trial) && trial <= cost) {
        cost = trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    // No step lowers the cost any further: at the minimum to rounding.
    if (!accepted) next = q;

    double change = 0.0;
    for (int d = 0; d < 3; ++d) change = std::max(change, std::abs(next[d] - q[d]) / std::max(std::abs(next[d]), 1e-12));
    q = next;
    if (change < kTolerance) {
      DecayFit fit = unscale(s, q, series, it);
      if (fit.alpha * s.length < 0.2) fit.flags.push_back("weakly constrained");
      return fit;
    }
  }
  throw FitNotConverged("decay fit did not converge after " + std::to_string(kMaxIterations) + " iterations",
                        unscale(s, q, series, kMaxIterations));
}

double bulk_alpha(double, double k, double wavelength) {
  if (k < 0.0) throw InvalidArgument("extinction coefficient k must be >= 0");
  if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
  return 4.0 * kPi * k / wavelength;
}

DecaySeries synthesize(const SyntheticDecay& truth, std::uint64_t seed) {
  if (truth.points < 2) throw InvalidArgument("synthetic series needs at least 2 points");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DecaySeries s;
  s.wavelength = truth.wavelength;
  for (int k = 0; k < truth.points; ++k) {
    const double x = truth.length * k / (truth.points - 1);
    const double clean = model_intensity(truth.amplitude, truth.alpha, truth.offset, x);
    s.x.push_back(x);
    s.intensity.push_back(std::max(0.0, clean * (1.0 + truth.noise * gauss(rng))));
  }
  return s;
}

std::vector<double> monte_carlo_alphas(const SyntheticDecay& truth, int trials, std::uint64_t seed) {
  std::vector<double> out(static_cast<std::size_t>(std::max(trials, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < trials; ++k) {
    out[static_cast<std::size_t>(k)] = fit_decay(synthesize(truth, seed + static_cast<std::uint64_t>(k))).alpha;
  }
  return out;
}

DecaySeries read_series_csv(std::istream& in, double wavelength) {
  const csv::Table t = csv::read(in);
  const std::size_t cx = t.column("x_um"), ci = t.column("intensity");
  DecaySeries s;
  s.wavelength = wavelength;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    try {
      s.x.push_back(std::stod(t.rows[r][cx]) * 1e-6);
      s.intensity.push_back(std::stod(t.rows[r][ci]));
    } catch (const std::logic_error&) {
      throw InvalidArgument("decay CSV row " + std::to_string(r + 1) + ": not a number");
    }
  }
  s.validate();
  return s;
}

void write_series_csv(std::ostream& out, const DecaySeries& series, const std::string& provenance_line) {
  out << provenance_line << "\r\n";
  csv::write_row(out, {"x_um", "intensity"});
  for (std::size_t k = 0; k < series.x.size(); ++k)
    csv::write_row(out, {csv::format_number(series.x[k] * 1e6), csv::format_number(series.intensity[k])});
}

nlohmann::json fit_to_json(const DecayFit& fit) {
  nlohmann::json j;
  j["A"] = fit.amplitude;
  j["alpha_per_cm"] = fit.alpha * 1e-2;
  j["alpha_sigma_per_cm"] = fit.alpha_sigma() * 1e-2;
  j["C"] = fit.offset;
  j["rms"] = fit.rms;
  j["iterations"] = fit.iterations;
  j["flags"] = fit.flags;
  return j;
}

}  // namespace nwsps::attenuation
