#include "qrelay/tomography.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.283185307179586;

struct LinearFit {
  double a = 0.0;  // cos coefficient
  double b = 0.0;  // sin coefficient
  double c = 0.0;  // offset
  double wssr = 0.0;
  double wsum = 0.0;
};

// Weighted linear solve of y ~ a cos(w t) + b sin(w t) + c.
LinearFit solve_linear(const std::vector<double>& t, const std::vector<double>& y,
                       const std::vector<double>& w, double omega) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Eigen::Vector3d basis(std::cos(omega * t[i]), std::sin(omega * t[i]), 1.0);
    m += w[i] * basis * basis.transpose();
    rhs += w[i] * y[i] * basis;
  }
  LinearFit fit;
  const Eigen::Vector3d sol = m.fullPivLu().solve(rhs);
  fit.a = sol(0);
  fit.b = sol(1);
  fit.c = sol(2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double yhat =
        fit.a * std::cos(omega * t[i]) + fit.b * std::sin(omega * t[i]) + fit.c;
    fit.wssr += w[i] * (y[i] - yhat) * (y[i] - yhat);
    fit.wsum += w[i];
  }
  return fit;
}

}  // namespace

SinusoidFit fit_oscillation(const OscillationSeries& series, double omega_seed_rad_per_ps,
                            FreqMode mode) {
  const std::size_t n = series.tau2_ps.size();
  if (n != series.n_first.size() || n != series.n_second.size()) {
    throw std::domain_error("fit_oscillation: mismatched series lengths");
  }
  if (n < 8) throw std::domain_error("fit_oscillation: need at least 8 points");
  if (!(omega_seed_rad_per_ps > 0.0)) {
    throw std::domain_error("fit_oscillation: non-positive seed frequency");
  }
  const double span = series.tau2_ps.back() - series.tau2_ps.front();
  if (span * omega_seed_rad_per_ps < kTwoPi) {
    throw std::domain_error("fit_oscillation: span below one period");
  }

  std::vector<double> y(n), w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cnt =
        static_cast<double>(series.n_first[i]) + static_cast<double>(series.n_second[i]);
    y[i] = cnt > 0.0 ? static_cast<double>(series.n_first[i]) / cnt : 0.5;
    w[i] = cnt;  // inverse-variance up to the common fraction factor
    total += cnt;
  }
  if (total <= 0.0) throw std::domain_error("fit_oscillation: empty series");
  double spread = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += w[i] * y[i];
  mean /= total;
  for (std::size_t i = 0; i < n; ++i) spread += w[i] * (y[i] - mean) * (y[i] - mean);
  if (!(spread > 0.0)) throw std::domain_error("fit_oscillation: degenerate variance");

  double omega = omega_seed_rad_per_ps;
  LinearFit best = solve_linear(series.tau2_ps, y, w, omega);
  if (mode == FreqMode::kFree) {
    // coarse scan around the seed, then parabolic refinement on the WSSR
    const double lo = 0.7 * omega_seed_rad_per_ps;
    const double hi = 1.3 * omega_seed_rad_per_ps;
    const int steps = 240;
    const double dw = (hi - lo) / steps;
    double best_w = omega;
    for (int k = 0; k <= steps; ++k) {
      const double cand = lo + k * dw;
      const LinearFit f = solve_linear(series.tau2_ps, y, w, cand);
      if (f.wssr < best.wssr) {
        best = f;
        best_w = cand;
      }
    }
    const double sl = solve_linear(series.tau2_ps, y, w, best_w - dw).wssr;
    const double sr = solve_linear(series.tau2_ps, y, w, best_w + dw).wssr;
    const double denom = sl - 2.0 * best.wssr + sr;
    omega = best_w;
    if (std::abs(denom) > 1e-30) {
      omega = best_w + 0.5 * dw * (sl - sr) / denom;
      best = solve_linear(series.tau2_ps, y, w, omega);
    }
  }

  SinusoidFit fit;
  fit.angular_freq = omega;
  fit.amplitude = std::hypot(best.a, best.b);
  fit.phase_rad = fit.amplitude > 0.0 ? std::atan2(-best.b, best.a) : 0.0;
  if (fit.phase_rad <= -kPi) fit.phase_rad += kTwoPi;
  fit.offset = best.c;
  fit.residual_rms = std::sqrt(best.wssr / best.wsum);
  return fit;
}

DensityMatrix1Q state_tomography_static(double p_hv, double p_da, double p_rl) {
  for (const double p : {p_hv, p_da, p_rl}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("state_tomography_static: fraction outside [0, 1]");
    }
  }
  const Eigen::Vector3d s(2.0 * p_da - 1.0, 2.0 * p_rl - 1.0, 2.0 * p_hv - 1.0);
  return physicality_projection(DensityMatrix1Q::from_bloch(s).matrix());
}

DensityMatrix1Q state_tomography_oscillation(const SinusoidFit& fit, double p_hv,
                                             double phi0) {
  if (!(p_hv >= 0.0 && p_hv <= 1.0)) {
    throw std::domain_error("state_tomography_oscillation: fraction outside [0, 1]");
  }
  if (fit.amplitude > 0.5 + 1e-6) {
    throw std::domain_error("state_tomography_oscillation: amplitude above 1/2");
  }
  const double phi = fit.phase_rad + phi0;
  const Eigen::Vector3d s(2.0 * fit.amplitude * std::cos(phi),
                          2.0 * fit.amplitude * std::sin(phi), 2.0 * p_hv - 1.0);
  return physicality_projection(DensityMatrix1Q::from_bloch(s).matrix());
}

DensityMatrix1Q physicality_projection(const Matrix2c& rho_raw) {
  const Matrix2c herm = 0.5 * (rho_raw + rho_raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(herm);
  Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (tr <= 0.0) return DensityMatrix1Q::maximally_mixed();
  ev /= tr;
  const Matrix2c m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix1Q(m);
}

bool ProcessMatrix::is_physical(double tp_tol, double psd_tol) const {
  if ((chi - chi.adjoint()).cwiseAbs().maxCoeff() > 1e-8) return false;
  Matrix2c tp = Matrix2c::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      tp += chi(m, n) * PauliSet::get(n) * PauliSet::get(m);
    }
  }
  if ((tp - Matrix2c::Identity()).cwiseAbs().maxCoeff() > tp_tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(chi, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -psd_tol;
}

Matrix2c apply_process(const ProcessMatrix& chi, const Matrix2c& rho) {
  Matrix2c out = Matrix2c::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      out += chi.chi(m, n) * PauliSet::get(m) * rho * PauliSet::get(n);
    }
  }
  return out;
}

ProcessMatrix chi_from_kraus(const std::vector<Matrix2c>& kraus) {
  Matrix4c chi = Matrix4c::Zero();
  for (const auto& k : kraus) {
    Vector4c a;
    for (int m = 0; m < 4; ++m) a(m) = 0.5 * (PauliSet::get(m) * k).trace();
    chi += a * a.adjoint();
  }
  return {chi};
}

ProcessMatrix process_tomography(const std::array<DensityMatrix1Q, 4>& outputs) {
  const std::array<Vector2c, 4> inputs = {
      PolarizationState::h().vector(), PolarizationState::v().vector(),
      PolarizationState::d().vector(), PolarizationState::r().vector()};

  // 16 linear equations eps(rho_j)[r,c] = sum_mn chi_mn (sigma_m rho_j sigma_n)[r,c]
  Eigen::MatrixXcd a(16, 16);
  Eigen::VectorXcd b(16);
  for (int j = 0; j < 4; ++j) {
    const Matrix2c rho = inputs[static_cast<std::size_t>(j)] *
                         inputs[static_cast<std::size_t>(j)].adjoint();
    const Matrix2c& out = outputs[static_cast<std::size_t>(j)].matrix();
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        const int row = 4 * j + 2 * r + c;
        b(row) = out(r, c);
        for (int m = 0; m < 4; ++m) {
          for (int n = 0; n < 4; ++n) {
            a(row, 4 * m + n) = (PauliSet::get(m) * rho * PauliSet::get(n))(r, c);
          }
        }
      }
    }
  }
  const Eigen::VectorXcd x = a.fullPivLu().solve(b);
  Matrix4c chi;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = x(4 * m + n);
  }

  // physicality: hermitize, clip the eigenvalues, restore unit trace
  chi = 0.5 * (chi + chi.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(chi);
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0);
  const double tr = ev.sum();
  if (tr <= 0.0) throw std::domain_error("process_tomography: degenerate reconstruction");
  ev /= tr;
  chi = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return {chi};
}

double process_fidelity(const ProcessMatrix& chi, const Matrix2c& ideal_unitary) {
  Vector4c u;
  for (int m = 0; m < 4; ++m) u(m) = 0.5 * (PauliSet::get(m) * ideal_unitary).trace();
  return (u.adjoint() * chi.chi * u)(0).real();
}

double average_gate_fidelity(double process_fidelity) {
  return (2.0 * process_fidelity + 1.0) / 3.0;
}

FidelityLandscape fidelity_landscape(const ProcessMatrix& chi, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 1) {
    throw std::domain_error("fidelity_landscape: grid too small");
  }
  FidelityLandscape ls;
  ls.n_theta = n_theta;
  ls.n_phi = n_phi;
  ls.theta_rad.resize(static_cast<std::size_t>(n_theta));
  ls.phi_rad.resize(static_cast<std::size_t>(n_phi));
  ls.f.resize(static_cast<std::size_t>(n_theta * n_phi));
  ls.min_f = 1.0;
  ls.max_f = 0.0;

  for (int it = 0; it < n_theta; ++it) {
    ls.theta_rad[static_cast<std::size_t>(it)] = kPi * it / (n_theta - 1);
  }
  for (int ip = 0; ip < n_phi; ++ip) {
    ls.phi_rad[static_cast<std::size_t>(ip)] = kTwoPi * ip / n_phi;
  }

  for (int it = 0; it < n_theta; ++it) {
    const double theta = ls.theta_rad[static_cast<std::size_t>(it)];
    for (int ip = 0; ip < n_phi; ++ip) {
      const double phi = ls.phi_rad[static_cast<std::size_t>(ip)];
      Vector2c psi(std::cos(0.5 * theta),
                   Complex(std::cos(phi), std::sin(phi)) * std::sin(0.5 * theta));
      const Matrix2c rho = psi * psi.adjoint();
      const Vector2c ideal = PauliSet::get(1) * psi;
      const double f = (ideal.adjoint() * apply_process(chi, rho) * ideal)(0).real();
      ls.f[static_cast<std::size_t>(it * n_phi + ip)] = f;
      ls.min_f = std::min(ls.min_f, f);
      ls.max_f = std::max(ls.max_f, f);
    }
  }
  return ls;
}

}  // namespace qrelay
