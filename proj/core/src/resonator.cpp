#include "stsfit/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "stsfit/common.hpp"
#include "stsfit/errors.hpp"
#include "stsfit/parallel.hpp"
#include "stsfit/simplex.hpp"
#include "stsfit/synth.hpp"

namespace stsfit {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void derotate_into(std::span<const double> freqs, std::span<const std::complex<double>> s21,
                   double tau, std::vector<std::complex<double>>& out) {
  out.resize(s21.size());
  for (std::size_t i = 0; i < s21.size(); ++i)
    out[i] = s21[i] * std::exp(std::complex<double>(0.0, -kTwoPi * freqs[i] * tau));
}

/// Golden-section minimum of a unimodal 1-D function on [lo, hi].
template <typename F>
double golden_min(const F& f, double lo, double hi, int iterations) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    sxx += dx * dx;
    sxy += dx * (ys[i] - my);
  }
  if (sxx == 0.0) return 0.0;
  return sxy / sxx;
}

double phase_model(double f, double theta0, double q, double f_r) {
  return theta0 + 2.0 * std::atan(2.0 * q * (1.0 - f / f_r));
}

double median_of_window(std::span<const double> v, std::size_t i, std::size_t half) {
  const std::size_t lo = i >= half ? i - half : 0;
  const std::size_t hi = std::min(v.size() - 1, i + half);
  double buf[8];
  std::size_t n = 0;
  for (std::size_t k = lo; k <= hi; ++k) buf[n++] = v[k];
  std::sort(buf, buf + n);
  return (n % 2 == 1) ? buf[n / 2] : 0.5 * (buf[n / 2 - 1] + buf[n / 2]);
}

}  // namespace

void unwrap_phases(std::span<double> phases_rad) {
  for (std::size_t i = 1; i < phases_rad.size(); ++i) {
    const double step = wrap_to_pi(phases_rad[i] - phases_rad[i - 1]);
    phases_rad[i] = phases_rad[i - 1] + step;
  }
}

double robust_noise_sd(std::span<const double> amplitudes) {
  if (amplitudes.size() < 3) return 0.0;
  std::vector<double> diffs(amplitudes.size() - 1);
  for (std::size_t i = 0; i + 1 < amplitudes.size(); ++i)
    diffs[i] = amplitudes[i + 1] - amplitudes[i];
  const double med = median(diffs);
  for (double& d : diffs) d = std::abs(d - med);
  // 1.4826 rescales the MAD to a Gaussian SD; dividing by sqrt(2) maps the
  // SD of a first difference back to the SD of a single sample.
  return 1.4826 * median(std::move(diffs)) / std::numbers::sqrt2;
}

double dip_contrast(std::span<const double> amplitudes) {
  if (amplitudes.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    const double m = median_of_window(amplitudes, i, 2);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi - lo;
}

CircleFit fit_circle(std::span<const std::complex<double>> points) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("fit_circle: need at least 3 points");

  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.real();
    mean_y += p.imag();
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double mxx = 0, myy = 0, mxy = 0, mxz = 0, myz = 0, mzz = 0;
  for (const auto& p : points) {
    const double x = p.real() - mean_x;
    const double y = p.imag() - mean_y;
    const double z = x * x + y * y;
    mxx += x * x;
    myy += y * y;
    mxy += x * y;
    mxz += x * z;
    myz += y * z;
    mzz += z * z;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  mxx *= inv_n;
  myy *= inv_n;
  mxy *= inv_n;
  mxz *= inv_n;
  myz *= inv_n;
  mzz *= inv_n;

  // Collinear or coincident input has a (near-)singular scatter matrix.
  const double tr = mxx + myy;
  const double det_cov = mxx * myy - mxy * mxy;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det_cov));
  const double lambda_min = 0.5 * (tr - disc);
  if (!(tr > 0.0) || lambda_min <= 1e-12 * tr)
    throw std::invalid_argument("fit_circle: degenerate (collinear or coincident) points");

  const double mz = mxx + myy;
  const double cov_xy = mxx * myy - mxy * mxy;
  const double var_z = mzz - mz * mz;
  const double a3 = 4.0 * mz;
  const double a2 = -3.0 * mz * mz - mzz;
  const double a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
  const double a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
  const double a22 = a2 + a2;
  const double a33 = a3 + a3 + a3;

  // Newton on the Taubin characteristic polynomial, starting from 0.
  double x = 0.0;
  double y = a0;
  for (int it = 0; it < 99; ++it) {
    const double dy = a1 + x * (a22 + x * a33);
    if (dy == 0.0) break;
    const double x_new = x - y / dy;
    if (!std::isfinite(x_new) || x_new == x) break;
    const double y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
    if (std::abs(y_new) >= std::abs(y)) break;
    x = x_new;
    y = y_new;
  }

  const double det = x * x - x * mz + cov_xy;
  if (det == 0.0 || !std::isfinite(det))
    throw std::invalid_argument("fit_circle: degenerate configuration");
  const double xc = (mxz * (myy - x) - myz * mxy) / det / 2.0;
  const double yc = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
  const double r2 = xc * xc + yc * yc + mz;
  if (!(r2 > 0.0) || !std::isfinite(r2))
    throw std::invalid_argument("fit_circle: degenerate configuration");

  CircleFit fit;
  fit.center = {xc + mean_x, yc + mean_y};
  fit.radius = std::sqrt(r2);
  double ss = 0.0;
  for (const auto& p : points) {
    const double dev = std::abs(p - fit.center) - fit.radius;
    ss += dev * dev;
  }
  fit.rms_residual = std::sqrt(ss * inv_n);
  return fit;
}

double estimate_delay(std::span<const double> freqs_hz,
                      std::span<const std::complex<double>> s21) {
  const std::size_t n = freqs_hz.size();
  if (n < 8 || s21.size() != n) throw std::invalid_argument("estimate_delay: need >= 8 points");

  std::vector<double> phases(n);
  for (std::size_t i = 0; i < n; ++i) phases[i] = std::arg(s21[i]);
  unwrap_phases(phases);

  const std::size_t wing = std::max<std::size_t>(2, n / 5);
  std::vector<double> xs, ys;
  xs.reserve(2 * wing);
  ys.reserve(2 * wing);
  for (std::size_t i = 0; i < wing; ++i) {
    xs.push_back(freqs_hz[i]);
    ys.push_back(phases[i]);
  }
  for (std::size_t i = n - wing; i < n; ++i) {
    xs.push_back(freqs_hz[i]);
    ys.push_back(phases[i]);
  }
  const double tau0 = least_squares_slope(xs, ys) / kTwoPi;

  const double span = freqs_hz.back() - freqs_hz.front();
  if (!(span > 0.0)) return tau0;
  const double window = 0.5 / span;

  std::vector<std::complex<double>> buf;
  auto residual_at = [&](double tau) {
    derotate_into(freqs_hz, s21, tau, buf);
    try {
      return fit_circle(buf).rms_residual;
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::max();
    }
  };

  // The residual minimum in tau is a narrow notch (width ~ 1/(2 pi span)) on
  // an almost flat background, so a plain 1-D descent can slide past it.
  // Locate it on a grid fine enough to resolve the notch, then polish.
  constexpr int kGridSamples = 64;
  double best_tau = tau0;
  double best_res = residual_at(tau0);
  const double step = 2.0 * window / kGridSamples;
  for (int k = 0; k <= kGridSamples; ++k) {
    const double tau = tau0 - window + k * step;
    const double res = residual_at(tau);
    if (res < best_res) {
      best_res = res;
      best_tau = tau;
    }
  }
  return golden_min(residual_at, best_tau - step, best_tau + step, 36);
}

PhaseFit fit_phase(std::span<const double> freqs_hz, std::span<const double> angles_rad,
                   double residual_bound_rad) {
  const std::size_t n = freqs_hz.size();
  if (n < 5 || angles_rad.size() != n) throw std::invalid_argument("fit_phase: need >= 5 points");
  const double f_lo = freqs_hz.front();
  const double f_hi = freqs_hz.back();
  const double span = f_hi - f_lo;
  if (!(span > 0.0)) throw std::invalid_argument("fit_phase: frequencies must be ascending");

  // Seeds: theta0 halfway between the wing asymptotes, f_r where the angle
  // crosses it, Q_l from the local slope there.
  const double theta0_seed = 0.5 * (angles_rad.front() + angles_rad.back());
  std::size_t cross = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::abs(angles_rad[i] - theta0_seed);
    if (dist < best_dist) {
      best_dist = dist;
      cross = i;
    }
  }
  const double f_r_seed = freqs_hz[cross];
  const std::size_t w_lo = cross >= 2 ? cross - 2 : 0;
  const std::size_t w_hi = std::min(n - 1, cross + 2);
  const double slope = least_squares_slope(freqs_hz.subspan(w_lo, w_hi - w_lo + 1),
                                           angles_rad.subspan(w_lo, w_hi - w_lo + 1));
  double q_seed = -slope * f_r_seed / 4.0;
  if (!(q_seed > 0.0)) q_seed = 2.0 * f_r_seed / span;

  auto objective = [&](std::span<const double> p) {
    const double theta0 = p[0], q = p[1], f_r = p[2];
    if (!(q > 0.0) || f_r < f_lo - span || f_r > f_hi + span)
      return std::numeric_limits<double>::infinity();
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double res = angles_rad[i] - phase_model(freqs_hz[i], theta0, q, f_r);
      ss += res * res;
    }
    return ss;
  };

  // Gauss-Newton with Levenberg damping; drives the least-squares optimum to
  // machine precision once inside the basin.
  auto gauss_newton = [&](double theta0, double q, double f_r) {
    std::array<double, 4> state = {theta0, q, f_r, 0.0};
    const double start[3] = {theta0, q, f_r};
    double loss = objective(start);
    double lambda = 1e-8;
    for (int it = 0; it < 30 && std::isfinite(loss); ++it) {
      Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
      Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
      for (std::size_t i = 0; i < n; ++i) {
        const double u = 2.0 * state[1] * (1.0 - freqs_hz[i] / state[2]);
        const double denom = 1.0 + u * u;
        Eigen::Vector3d j;
        j << 1.0, 4.0 * (1.0 - freqs_hz[i] / state[2]) / denom,
            4.0 * state[1] * freqs_hz[i] / (state[2] * state[2] * denom);
        const double res = angles_rad[i] - (state[0] + 2.0 * std::atan(u));
        jtj += j * j.transpose();
        jtr += j * res;
      }
      bool accepted = false;
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::Matrix3d damped = jtj;
        for (int k = 0; k < 3; ++k) damped(k, k) += lambda * (jtj(k, k) + 1e-30);
        const Eigen::Vector3d delta = damped.ldlt().solve(jtr);
        const double trial[3] = {state[0] + delta(0), state[1] + delta(1), state[2] + delta(2)};
        const double loss_n = objective(trial);
        if (loss_n < loss) {
          const double rel_step = std::abs(delta(2)) / span + std::abs(delta(1)) / state[1];
          state = {trial[0], trial[1], trial[2], 0.0};
          loss = loss_n;
          lambda = std::max(lambda * 0.25, 1e-14);
          accepted = true;
          if (rel_step < 1e-13) it = 30;
          break;
        }
        lambda *= 10.0;
      }
      if (!accepted) break;
    }
    state[3] = loss;
    return state;
  };

  auto best = gauss_newton(theta0_seed, q_seed, f_r_seed);
  // Fall back to a coarse simplex search over a few Q seeds when the direct
  // descent did not reach a credible optimum.
  if (!(std::sqrt(best[3] / static_cast<double>(n)) < 0.25 * residual_bound_rad)) {
    SimplexOptions opts;
    opts.diameter_tol = 1e-6;
    opts.loss_spread_tol = 1e-10;
    opts.max_iterations = 150;
    for (double qf : {1.0, 0.25, 4.0}) {
      const double x0[3] = {theta0_seed, q_seed * qf, f_r_seed};
      const double step[3] = {0.1, 0.3 * q_seed * qf, span / 50.0};
      const auto run = nelder_mead(objective, x0, step, opts);
      const auto polished = gauss_newton(run.x[0], run.x[1], run.x[2]);
      if (polished[3] < best[3]) best = polished;
    }
  }

  PhaseFit fit;
  fit.theta0_rad = best[0];
  fit.q_loaded = best[1];
  fit.f_r_hz = best[2];
  fit.rms_residual_rad = std::sqrt(best[3] / static_cast<double>(n));
  fit.converged = fit.rms_residual_rad <= residual_bound_rad && fit.q_loaded > 0.0 &&
                  fit.f_r_hz >= f_lo && fit.f_r_hz <= f_hi;
  return fit;
}

namespace {

NotchFitResult fit_notch_slice_impl(std::span<const double> freqs_hz,
                                    std::span<const std::complex<double>> s21,
                                    const SliceFitConfig& cfg, bool run_precheck) {
  NotchFitResult result;
  const std::size_t n = freqs_hz.size();
  if (n < 8 || s21.size() != n) return result;

  if (run_precheck) {
    std::vector<double> amps(n);
    for (std::size_t i = 0; i < n; ++i) amps[i] = std::abs(s21[i]);
    if (dip_contrast(amps) <= cfg.threshold_k * robust_noise_sd(amps)) return result;
  }

  try {
    const double tau = estimate_delay(freqs_hz, s21);
    std::vector<std::complex<double>> derot;
    derotate_into(freqs_hz, s21, tau, derot);
    const CircleFit circle = fit_circle(derot);

    std::vector<double> angles(n);
    for (std::size_t i = 0; i < n; ++i) angles[i] = std::arg(derot[i] - circle.center);
    unwrap_phases(angles);
    const PhaseFit phase = fit_phase(freqs_hz, angles, cfg.phase_residual_bound_rad);

    // Off-resonant point: diametrically opposite the resonance on the circle.
    const std::complex<double> off =
        circle.center + circle.radius * std::exp(std::complex<double>(0.0, phase.theta0_rad +
                                                                               std::numbers::pi));
    result.f_r_hz = phase.f_r_hz;
    result.q_loaded = phase.q_loaded;
    result.amplitude_a = std::abs(off);
    result.alpha_rad = std::arg(off);
    result.tau_s = tau;
    result.q_ext_mag = phase.q_loaded * result.amplitude_a / (2.0 * circle.radius);
    result.q_ext_phase_rad =
        wrap_to_pi(phase.theta0_rad - result.alpha_rad - std::numbers::pi);

    NotchNuisanceParams nuisance;
    nuisance.amplitude_a = result.amplitude_a;
    nuisance.alpha_rad = result.alpha_rad;
    nuisance.tau_s = result.tau_s;
    nuisance.q_loaded = result.q_loaded;
    nuisance.q_ext_mag = result.q_ext_mag;
    nuisance.q_ext_phase_rad = result.q_ext_phase_rad;
    double ss = 0.0;
    bool model_ok = result.amplitude_a > 0.0 && result.q_loaded > 0.0 && result.q_ext_mag > 0.0 &&
                    result.f_r_hz > 0.0;
    if (model_ok) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto dev = s21[i] - notch_s21(freqs_hz[i], result.f_r_hz, nuisance);
        ss += std::norm(dev);
      }
      result.rms_residual = std::sqrt(ss / static_cast<double>(n));
    }
    result.converged = model_ok && phase.converged &&
                       result.f_r_hz >= freqs_hz.front() && result.f_r_hz <= freqs_hz.back() &&
                       result.rms_residual <= cfg.rms_rel_bound * result.amplitude_a;
  } catch (const std::exception&) {
    result.converged = false;
  }
  return result;
}

}  // namespace

NotchFitResult fit_notch_slice(std::span<const double> freqs_hz,
                               std::span<const std::complex<double>> s21,
                               const SliceFitConfig& cfg) {
  return fit_notch_slice_impl(freqs_hz, s21, cfg, true);
}

ExtractedSpectrum extract_spectrum(const StsHeatmap& map, const ExtractConfig& cfg) {
  map.validate();
  const std::size_t n = map.n_currents();
  const std::size_t m = map.n_freqs();

  ExtractedSpectrum spectrum;
  spectrum.current_step_a = map.current_step_a();
  spectrum.slice_fits.resize(n);
  std::vector<ExclusionReason> reasons(n, ExclusionReason::fit_failed);
  std::vector<char> accepted(n, 0);

  parallel_for(n, cfg.workers, [&](std::size_t row) {
    auto slice = map.slice(row);
    if (m < 8) {
      reasons[row] = ExclusionReason::too_few_points;
      return;
    }
    std::vector<double> amps(m);
    for (std::size_t i = 0; i < m; ++i) amps[i] = std::abs(slice[i]);
    if (dip_contrast(amps) <= cfg.slice.threshold_k * robust_noise_sd(amps)) {
      reasons[row] = ExclusionReason::below_threshold;
      return;
    }
    const NotchFitResult fit = fit_notch_slice_impl(map.probe_freqs_hz, slice, cfg.slice, false);
    spectrum.slice_fits[row] = fit;
    accepted[row] = fit.converged ? 1 : 0;
  });

  for (std::size_t row = 0; row < n; ++row) {
    if (accepted[row]) {
      spectrum.points.push_back({row, map.currents_a[row], spectrum.slice_fits[row].f_r_hz});
    } else {
      spectrum.excluded.push_back({row, reasons[row]});
    }
  }
  if (spectrum.points.size() < 8)
    throw EmptySpectrumError("extract_spectrum: fewer than 8 slices accepted");

  double sum = 0.0;
  for (const auto& p : spectrum.points) sum += p.f_r_hz;
  spectrum.mean_f_r_hz = sum / static_cast<double>(spectrum.points.size());
  return spectrum;
}

}  // namespace stsfit
