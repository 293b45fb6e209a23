#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace qrelay {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector2c = Eigen::Vector2cd;
using Vector4c = Eigen::Vector4cd;

namespace constants {
// Reduced Planck constant in ueV*ps.  2*pi*hbar/S gives the pair-phase
// rotation period: 457 ps for S = 9.05 ueV.
inline constexpr double hbar_uev_ps = 658.2119569;
}  // namespace constants

// Pure polarization qubit a_h|H> + a_v|V>, kept normalized.  Canonical form
// has the H amplitude real and non-negative (V amplitude when a_h == 0), so
// equal states compare equal component-wise.
class PolarizationState {
 public:
  PolarizationState(Complex amp_h, Complex amp_v);

  Complex amp_h() const { return amp_h_; }
  Complex amp_v() const { return amp_v_; }
  Vector2c vector() const { return Vector2c(amp_h_, amp_v_); }

  PolarizationState canonicalized() const;
  bool is_canonical(double tol = 1e-9) const;

  static PolarizationState h() { return {1.0, 0.0}; }
  static PolarizationState v() { return {0.0, 1.0}; }
  static PolarizationState d();
  static PolarizationState a();
  static PolarizationState r();
  static PolarizationState l();

 private:
  Complex amp_h_;
  Complex amp_v_;
};

// Single-qubit density matrix in the (H, V) basis.
class DensityMatrix1Q {
 public:
  DensityMatrix1Q() : m_(0.5 * Matrix2c::Identity()) {}
  explicit DensityMatrix1Q(const Matrix2c& m);
  explicit DensityMatrix1Q(const PolarizationState& pure);

  const Matrix2c& matrix() const { return m_; }

  // Hermitian within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-10.
  bool is_physical(double tol = 1e-10) const;

  // Bloch components (s_x, s_y, s_z).
  Eigen::Vector3d bloch() const;
  static DensityMatrix1Q from_bloch(const Eigen::Vector3d& s);
  static DensityMatrix1Q maximally_mixed();

 private:
  Matrix2c m_;
};

// Two-photon polarization density matrix, basis order
// (H2x Hx, H2x Vx, V2x Hx, V2x Vx) with the 2X photon first.
class TwoQubitState {
 public:
  explicit TwoQubitState(const Matrix4c& m);
  explicit TwoQubitState(const Vector4c& pure);

  const Matrix4c& matrix() const { return m_; }
  bool is_physical(double tol = 1e-10) const;

  double fidelity_to(const Vector4c& pure_target) const;
  // Reduced state of one photon; photon 0 is the 2X photon.
  DensityMatrix1Q partial_trace(int keep_photon) const;

 private:
  Matrix4c m_;
};

// sigma_0..sigma_3 = identity, sigma_x, sigma_y, sigma_z.
struct PauliSet {
  static const std::array<Matrix2c, 4>& all();
  static const Matrix2c& get(int i) { return all()[static_cast<std::size_t>(i)]; }
};

// Bell state vectors in the basis order above.
Vector4c bell_phi_plus();
Vector4c bell_phi_minus();
Vector4c bell_psi_plus();
Vector4c bell_psi_minus();

// cos(theta/2)|H> + e^{i phi} sin(theta/2)|V>, canonicalized.
// theta in [0, pi], phi in [0, 2*pi); out-of-range angles throw
// std::domain_error.
PolarizationState pure_state(double theta, double phi);

// Pair state of Eq.-style cascade emission at 2X-X delay tau (ps) with
// fine-structure splitting s_split (ueV):
// (|HH> + e^{i S tau / hbar} |VV>) / sqrt(2), as a density matrix.
TwoQubitState entangled_pair_state(double tau_ps, double s_split_uev);

// Ideal teleporter output for a heralded input: bit flip plus the rotating
// pair phase, cos(theta/2)|V> + e^{i(phi - S tau2/hbar)} sin(theta/2)|H>.
// Requires a canonical input state.
PolarizationState expected_output(const PolarizationState& input, double tau2_ps,
                                  double s_split_uev);

// Uhlmann fidelity.  For qubits F = tr(a b) + 2 sqrt(det a * det b), which
// reduces to |<psi|phi>|^2 on pure states.  Throws std::domain_error for
// non-physical input.
double fidelity(const DensityMatrix1Q& a, const DensityMatrix1Q& b);

// Rank-1 projector onto (|HV> + |VH>)/sqrt(2).
Matrix4c bell_psi_plus_projector();

// Measurement bases on the Poincare sphere principal axes.  The first basis
// vector is the one whose detector fires for the "P" outcome (H, D, R), the
// second for "Q" (V, A, L).
enum class Basis { kHV, kDA, kRL };

std::pair<Vector2c, Vector2c> basis_vectors(Basis b);

enum class BellTarget { kPhiPlus, kPhiMinus };

struct CorrelationFidelity {
  double value = 0.0;
  bool outside_physical = false;  // set when the raw estimate leaves [0, 1]
};

// Fidelity estimate from the three basis correlations C_HV, C_DA, C_RL
// (each the same-minus-different coincidence fraction in that basis):
//   Phi+: (1 + C_HV + C_DA - C_RL) / 4
//   Phi-: (1 + C_HV - C_DA + C_RL) / 4
// Correlations outside [-1, 1] are accepted; the flag reports unphysical
// results without clamping the value.
CorrelationFidelity entanglement_fidelity_from_correlations(double c_hv, double c_da,
                                                            double c_rl,
                                                            BellTarget target = BellTarget::kPhiPlus);

}  // namespace qrelay
