#include "stsfit/uncertainty.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "stsfit/parallel.hpp"

namespace stsfit {

namespace {

using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Unchecked model frequency: the smooth even extension of the model in d
/// (and g), so that finite-difference stencils may step slightly outside the
/// nominal parameter domain without tripping the validation guards.
std::pair<double, Branch> model_mu(const std::array<double, kNumParams>& w, double i_a,
                                   double probe_span_hz) {
  const double x = std::numbers::pi * (i_a - w[3]) / w[2];
  const double c = std::cos(x), s = std::sin(x);
  const double k = std::sqrt(c * c + w[5] * w[5] * s * s);
  const double f_ge = w[4] * std::sqrt(k);
  const double mid = 0.5 * (w[0] + f_ge);
  const double det = f_ge - w[0];
  const double gap = std::sqrt(w[1] * w[1] + 0.25 * det * det);
  const double f_plus = mid + gap;
  if (std::abs(f_plus - w[0]) < 0.5 * probe_span_hz) return {f_plus, Branch::plus};
  return {mid - gap, Branch::minus};
}

Vector6 fd_steps(const std::array<double, kNumParams>& w) {
  // Relative step 1e-6 with floors of 1 Hz for frequencies and 1e-8 for the
  // asymmetry. The two current axes are floored at 1e-5 of the period
  // (~1 nA on a typical 88 uA period) so the step geometry, and with it the
  // Fisher matrix, is covariant under rescaling the current unit.
  const double current_floor = 1e-5 * std::abs(w[2]);
  const Vector6 floors = {1.0, 1.0, current_floor, current_floor, 1.0, 1e-8};
  Vector6 h{};
  for (std::size_t k = 0; k < kNumParams; ++k) {
    double step = std::max(1e-6 * std::abs(w[k]), floors[k]);
    // Snap to an exactly representable offset to cancel rounding in w +- h.
    volatile double bumped = w[k] + step;
    h[k] = bumped - w[k];
  }
  return h;
}

/// All model evaluations needed for gradient, Hessian and both Fisher forms
/// at one data point, from a single shared stencil.
struct Stencil {
  double mu0 = 0.0;
  Vector6 plus{}, minus{};
  std::array<std::array<double, 4>, 15> cross{};  ///< (++, +-, -+, --) per pair
  Vector6 h{};
  bool discontinuity = false;
};

constexpr std::size_t pair_index(std::size_t k, std::size_t l) {
  // k < l; flat index into the 15 upper-triangle pairs of a 6x6 matrix.
  return k * (2 * kNumParams - k - 1) / 2 + (l - k - 1);
}

Stencil evaluate_stencil(const std::array<double, kNumParams>& w, double i_a,
                         double probe_span_hz) {
  Stencil st;
  st.h = fd_steps(w);
  const auto center = model_mu(w, i_a, probe_span_hz);
  st.mu0 = center.first;
  const Branch b0 = center.second;

  auto eval = [&](std::array<double, kNumParams> wt) {
    const auto r = model_mu(wt, i_a, probe_span_hz);
    if (r.second != b0) st.discontinuity = true;
    return r.first;
  };

  for (std::size_t k = 0; k < kNumParams; ++k) {
    auto wp = w, wm = w;
    wp[k] += st.h[k];
    wm[k] -= st.h[k];
    st.plus[k] = eval(wp);
    st.minus[k] = eval(wm);
  }
  for (std::size_t k = 0; k < kNumParams; ++k) {
    for (std::size_t l = k + 1; l < kNumParams; ++l) {
      auto& out = st.cross[pair_index(k, l)];
      const double sk[2] = {st.h[k], -st.h[k]};
      const double sl[2] = {st.h[l], -st.h[l]};
      std::size_t idx = 0;
      for (double dk : sk) {
        for (double dl : sl) {
          auto wt = w;
          wt[k] += dk;
          wt[l] += dl;
          out[idx++] = eval(wt);
        }
      }
    }
  }
  return st;
}

GradHess grad_hess_from_stencil(const Stencil& st) {
  GradHess gh;
  gh.branch_discontinuity = st.discontinuity;
  for (std::size_t k = 0; k < kNumParams; ++k) {
    gh.gradient[k] = (st.plus[k] - st.minus[k]) / (2.0 * st.h[k]);
    gh.hessian[k][k] = (st.plus[k] - 2.0 * st.mu0 + st.minus[k]) / (st.h[k] * st.h[k]);
  }
  for (std::size_t k = 0; k < kNumParams; ++k) {
    for (std::size_t l = k + 1; l < kNumParams; ++l) {
      const auto& c = st.cross[pair_index(k, l)];
      const double v = (c[0] - c[1] - c[2] + c[3]) / (4.0 * st.h[k] * st.h[l]);
      gh.hessian[k][l] = v;
      gh.hessian[l][k] = v;
    }
  }
  return gh;
}

/// [H(mu^2) - 2 mu H(mu)] / 2 from the same stencil values. With
/// q(w) = (mu(w) - mu0)^2 this equals the corresponding stencil of q, since
/// mu^2 - 2 mu0 mu = q - mu0^2 and the constant drops out of every second
/// difference. Evaluating q directly avoids the catastrophic cancellation of
/// differencing mu^2 (whose ulp is ~4 kHz at GHz scales).
Matrix6 half_hessian_identity_form(const Stencil& st) {
  Matrix6 out{};
  const double mu0 = st.mu0;
  auto q = [mu0](double v) {
    const double diff = v - mu0;
    return diff * diff;
  };
  for (std::size_t k = 0; k < kNumParams; ++k) {
    const double h2 = st.h[k] * st.h[k];
    out[k][k] = 0.5 * (q(st.plus[k]) + q(st.minus[k])) / h2;
  }
  for (std::size_t k = 0; k < kNumParams; ++k) {
    for (std::size_t l = k + 1; l < kNumParams; ++l) {
      const auto& c = st.cross[pair_index(k, l)];
      const double v = 0.5 * (q(c[0]) - q(c[1]) - q(c[2]) + q(c[3])) / (4.0 * st.h[k] * st.h[l]);
      out[k][l] = v;
      out[l][k] = v;
    }
  }
  return out;
}

double frobenius(const Matrix6& m) {
  double s = 0.0;
  for (const auto& row : m)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

Matrix6d to_eigen(const Matrix6& m) {
  Matrix6d out;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) out(r, c) = m[r][c];
  return out;
}

}  // namespace

double estimate_sigma2(std::span<const double> residuals_hz, std::size_t n_params) {
  if (residuals_hz.size() <= n_params)
    throw std::invalid_argument("estimate_sigma2: need more residuals than parameters");
  double chi2 = 0.0;
  for (double r : residuals_hz) chi2 += r * r;
  return chi2 / static_cast<double>(residuals_hz.size() - n_params);
}

GradHess model_gradient_hessian(const HamiltonianParams& params, double i_a,
                                double probe_span_hz) {
  const Stencil st = evaluate_stencil(to_param_array(params), i_a, probe_span_hz);
  return grad_hess_from_stencil(st);
}

FisherResult fisher_matrix(const ExtractedSpectrum& spectrum, const HamiltonianParams& params,
                           double sigma2_hz2, double probe_span_hz) {
  if (!(sigma2_hz2 > 0.0)) throw std::invalid_argument("fisher_matrix: sigma2 must be positive");

  const auto w = to_param_array(params);
  const std::size_t n = spectrum.points.size();
  std::vector<Stencil> stencils(n);
  parallel_for(n, 0, [&](std::size_t i) {
    stencils[i] = evaluate_stencil(w, spectrum.points[i].current_a, probe_span_hz);
  });

  FisherResult result;
  for (std::size_t i = 0; i < n; ++i) {
    const Stencil& st = stencils[i];
    if (st.discontinuity) {
      ++result.excluded_points;
      continue;
    }
    const GradHess gh = grad_hess_from_stencil(st);
    const Matrix6 analytic = half_hessian_identity_form(st);
    for (std::size_t r = 0; r < kNumParams; ++r) {
      for (std::size_t c = 0; c < kNumParams; ++c) {
        result.fisher[r][c] += gh.gradient[r] * gh.gradient[c] / sigma2_hz2;
        result.fisher_hessian_form[r][c] += analytic[r][c] / sigma2_hz2;
      }
    }
  }

  Matrix6 diff{};
  for (std::size_t r = 0; r < kNumParams; ++r)
    for (std::size_t c = 0; c < kNumParams; ++c)
      diff[r][c] = result.fisher[r][c] - result.fisher_hessian_form[r][c];
  const double denom = frobenius(result.fisher);
  result.cross_check_rel_err = denom > 0.0 ? frobenius(diff) / denom : 0.0;
  return result;
}

CrlbResult crlb(const Matrix6& fisher) {
  const Matrix6d m = 0.5 * (to_eigen(fisher) + to_eigen(fisher).transpose());

  CrlbResult result;
  // Normalize to unit diagonal first. The raw matrix mixes Hz^-2 and A^-2
  // scales across ~25 orders of magnitude; the correlation-like form keeps
  // the inversion unit-covariant and numerically sane. Parameters with no
  // diagonal information are unbounded outright.
  Eigen::Matrix<double, 6, 1> d;
  std::vector<int> active;
  for (int k = 0; k < 6; ++k) {
    d(k) = std::sqrt(std::max(m(k, k), 0.0));
    if (d(k) > 0.0) {
      active.push_back(k);
    } else {
      result.unbounded[static_cast<std::size_t>(k)] = true;
      result.sd[static_cast<std::size_t>(k)] = std::numeric_limits<double>::infinity();
      ++result.floored_directions;
    }
  }
  if (active.empty()) return result;

  const int n = static_cast<int>(active.size());
  Eigen::MatrixXd corr(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      corr(r, c) = m(active[r], active[c]) / (d(active[r]) * d(active[c]));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const double floor = 1e-14 * values(n - 1);

  Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
  for (int dir = 0; dir < n; ++dir) {
    if (!(values(dir) > floor) || !(values(dir) > 0.0)) {
      ++result.floored_directions;
      for (int r = 0; r < n; ++r)
        if (vectors(r, dir) * vectors(r, dir) > 1e-6)
          result.unbounded[static_cast<std::size_t>(active[r])] = true;
    } else {
      pinv += vectors.col(dir) * vectors.col(dir).transpose() / values(dir);
    }
  }
  for (int r = 0; r < n; ++r) {
    const auto k = static_cast<std::size_t>(active[r]);
    result.sd[k] = result.unbounded[k] ? std::numeric_limits<double>::infinity()
                                       : std::sqrt(pinv(r, r)) / d(active[r]);
  }
  return result;
}

std::vector<EigenPair> hessian_pca(const Matrix6& matrix) {
  const Matrix6d m = 0.5 * (to_eigen(matrix) + to_eigen(matrix).transpose());
  Eigen::SelfAdjointEigenSolver<Matrix6d> solver(m);
  std::vector<EigenPair> pairs(kNumParams);
  for (int dir = 0; dir < 6; ++dir) {
    pairs[dir].value = solver.eigenvalues()(dir);
    Eigen::Matrix<double, 6, 1> v = solver.eigenvectors().col(dir);
    int arg = 0;
    for (int k = 1; k < 6; ++k)
      if (std::abs(v(k)) > std::abs(v(arg))) arg = k;
    if (v(arg) < 0.0) v = -v;
    for (std::size_t k = 0; k < kNumParams; ++k) pairs[dir].vector[k] = v(static_cast<int>(k));
  }
  return pairs;
}

Matrix6 to_display_units(const Matrix6& fisher_si) {
  // (f_c, g, period, i_ss, f_ge_max, d) -> (GHz, GHz, uA, uA, GHz, 1)
  const Vector6 scale = {1e9, 1e9, 1e-6, 1e-6, 1e9, 1.0};
  Matrix6 out{};
  for (std::size_t r = 0; r < kNumParams; ++r)
    for (std::size_t c = 0; c < kNumParams; ++c)
      out[r][c] = fisher_si[r][c] * scale[r] * scale[c];
  return out;
}

UncertaintyReport uncertainty_report_at(const ExtractedSpectrum& spectrum,
                                        const HamiltonianParams& params, double sigma2_hz2,
                                        double probe_span_hz) {
  UncertaintyReport report;
  report.sigma2_hz2 = sigma2_hz2;
  report.fisher = fisher_matrix(spectrum, params, sigma2_hz2, probe_span_hz);
  report.crlb = crlb(report.fisher.fisher);
  report.eigenpairs = hessian_pca(to_display_units(report.fisher.fisher));
  return report;
}

UncertaintyReport uncertainty_report(const ExtractedSpectrum& spectrum, const FitOutcome& fit,
                                     double probe_span_hz) {
  std::vector<double> residuals;
  residuals.reserve(fit.residuals.size());
  for (const auto& r : fit.residuals) residuals.push_back(r.residual_hz);
  const double sigma2 = estimate_sigma2(residuals, kNumParams);
  return uncertainty_report_at(spectrum, fit.params, sigma2, probe_span_hz);
}

}  // namespace stsfit
