#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qrelay/polarization.hpp"

namespace qrelay {

// Weighted sinusoid fit A cos(omega tau + phi) + c of a normalized outcome
// fraction.
struct SinusoidFit {
  double amplitude = 0.0;     // >= 0
  double phase_rad = 0.0;     // in (-pi, pi]
  double offset = 0.0;
  double angular_freq = 0.0;  // rad / ps
  double residual_rms = 0.0;
};

// Outcome counts versus tau2 in one analysis basis; the fraction fitted is
// n_first / (n_first + n_second).
struct OscillationSeries {
  std::vector<double> tau2_ps;
  std::vector<std::int64_t> n_first;
  std::vector<std::int64_t> n_second;
};

enum class FreqMode { kFixed, kFree };

// Fixed frequency reduces to a linear solve; free frequency scans a coarse
// grid around the seed and refines the minimum.  Requires at least 8 points
// spanning a full period of the seed frequency, throws std::domain_error
// otherwise (or when the counts carry no variance).
SinusoidFit fit_oscillation(const OscillationSeries& series, double omega_seed_rad_per_ps,
                            FreqMode mode);

// rho = (1 + s.sigma)/2 from the three principal-axis outcome fractions
// P(H), P(D), P(R); clipped to physicality.
DensityMatrix1Q state_tomography_static(double p_hv, double p_da, double p_rl);

// Equatorial components from the DA-basis oscillation at tau2 = 0:
//   s_x = 2A cos(phi + phi0),  s_y = 2A sin(phi + phi0),  s_z = 2 p_hv - 1,
// with phi0 the configured instrument phase offset.  With this convention a
// fit of (0.5, pi/2) at p_hv = 0.5 reconstructs |R>.  Amplitudes above
// 0.5 + tol are rejected as non-physical.
DensityMatrix1Q state_tomography_oscillation(const SinusoidFit& fit, double p_hv,
                                             double phi0 = 0.0);

// Nearest physical state: hermitize, clip negative eigenvalues, renormalize
// the trace.  Idempotent.
DensityMatrix1Q physicality_projection(const Matrix2c& rho_raw);

// Single-qubit process matrix in the Pauli basis {1, x, y, z}:
// eps(rho) = sum_mn chi_mn sigma_m rho sigma_n.
struct ProcessMatrix {
  Matrix4c chi;

  // Hermitian within 1e-8, trace preservation within tp_tol, PSD.
  bool is_physical(double tp_tol = 1e-6, double psd_tol = 1e-8) const;
};

Matrix2c apply_process(const ProcessMatrix& chi, const Matrix2c& rho);

ProcessMatrix chi_from_kraus(const std::vector<Matrix2c>& kraus);

// Linear-inversion chi reconstruction from the measured outputs for the
// four canonical inputs H, V, D, R (in that order), followed by the
// physicality projection (hermitize, clip, renormalize the trace).
ProcessMatrix process_tomography(const std::array<DensityMatrix1Q, 4>& outputs);

// Overlap of the process with an ideal unitary: F_p = u^dag chi u with
// u_m = tr(sigma_m U)/2; equals chi_xx when U = sigma_x.
double process_fidelity(const ProcessMatrix& chi, const Matrix2c& ideal_unitary);

// F_avg = (d F_p + 1)/(d + 1) with d = 2.
double average_gate_fidelity(double process_fidelity);

struct FidelityLandscape {
  int n_theta = 0;
  int n_phi = 0;
  std::vector<double> theta_rad;  // n_theta values in [0, pi]
  std::vector<double> phi_rad;    // n_phi values in [0, 2 pi)
  std::vector<double> f;          // row-major [i_theta][i_phi]
  double min_f = 0.0;
  double max_f = 0.0;

  double at(int it, int ip) const {
    return f[static_cast<std::size_t>(it * n_phi + ip)];
  }
};

// Fidelity of eps(|psi(theta, phi)>) to the ideal bit-flipped output over
// the pure-state sphere.
FidelityLandscape fidelity_landscape(const ProcessMatrix& chi, int n_theta, int n_phi);

}  // namespace qrelay
