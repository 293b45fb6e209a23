#include "qrelay/polarization.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kNormTol = 1e-12;

Complex phase_factor(double angle) { return Complex(std::cos(angle), std::sin(angle)); }
}  // namespace

PolarizationState::PolarizationState(Complex amp_h, Complex amp_v)
    : amp_h_(amp_h), amp_v_(amp_v) {
  const double n = std::sqrt(std::norm(amp_h_) + std::norm(amp_v_));
  if (n < 1e-300) {
    throw std::domain_error("PolarizationState: zero vector");
  }
  if (std::abs(n - 1.0) > kNormTol) {
    amp_h_ /= n;
    amp_v_ /= n;
  }
}

PolarizationState PolarizationState::canonicalized() const {
  const Complex ref = std::abs(amp_h_) > 1e-14 ? amp_h_ : amp_v_;
  const Complex u = std::conj(ref) / std::abs(ref);
  return PolarizationState(u * amp_h_, u * amp_v_);
}

bool PolarizationState::is_canonical(double tol) const {
  const Complex ref = std::abs(amp_h_) > 1e-14 ? amp_h_ : amp_v_;
  return std::abs(ref.imag()) <= tol && ref.real() >= -tol;
}

PolarizationState PolarizationState::d() { return {M_SQRT1_2, M_SQRT1_2}; }
PolarizationState PolarizationState::a() { return {M_SQRT1_2, -M_SQRT1_2}; }
PolarizationState PolarizationState::r() { return {M_SQRT1_2, Complex(0.0, M_SQRT1_2)}; }
PolarizationState PolarizationState::l() { return {M_SQRT1_2, Complex(0.0, -M_SQRT1_2)}; }

DensityMatrix1Q::DensityMatrix1Q(const Matrix2c& m) : m_(m) {}

DensityMatrix1Q::DensityMatrix1Q(const PolarizationState& pure) {
  const Vector2c v = pure.vector();
  m_ = v * v.adjoint();
}

bool DensityMatrix1Q::is_physical(double tol) const {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(m_.trace().real() - 1.0) > tol || std::abs(m_.trace().imag()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

Eigen::Vector3d DensityMatrix1Q::bloch() const {
  Eigen::Vector3d s;
  for (int i = 0; i < 3; ++i) {
    s[i] = (m_ * PauliSet::get(i + 1)).trace().real();
  }
  return s;
}

DensityMatrix1Q DensityMatrix1Q::from_bloch(const Eigen::Vector3d& s) {
  Matrix2c m = 0.5 * Matrix2c::Identity();
  for (int i = 0; i < 3; ++i) {
    m += 0.5 * s[i] * PauliSet::get(i + 1);
  }
  return DensityMatrix1Q(m);
}

DensityMatrix1Q DensityMatrix1Q::maximally_mixed() {
  return DensityMatrix1Q(Matrix2c(0.5 * Matrix2c::Identity()));
}

TwoQubitState::TwoQubitState(const Matrix4c& m) : m_(m) {}

TwoQubitState::TwoQubitState(const Vector4c& pure) { m_ = pure * pure.adjoint(); }

bool TwoQubitState::is_physical(double tol) const {
  if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(m_.trace().real() - 1.0) > tol || std::abs(m_.trace().imag()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

double TwoQubitState::fidelity_to(const Vector4c& pure_target) const {
  return (pure_target.adjoint() * m_ * pure_target)(0).real();
}

DensityMatrix1Q TwoQubitState::partial_trace(int keep_photon) const {
  Matrix2c r = Matrix2c::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        // basis index = 2 * (2X index) + (X index)
        const int row = keep_photon == 0 ? 2 * a + k : 2 * k + a;
        const int col = keep_photon == 0 ? 2 * b + k : 2 * k + b;
        r(a, b) += m_(row, col);
      }
    }
  }
  return DensityMatrix1Q(r);
}

const std::array<Matrix2c, 4>& PauliSet::all() {
  static const std::array<Matrix2c, 4> paulis = [] {
    std::array<Matrix2c, 4> p;
    p[0] << 1, 0, 0, 1;
    p[1] << 0, 1, 1, 0;
    p[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    return p;
  }();
  return paulis;
}

Vector4c bell_phi_plus() { return Vector4c(M_SQRT1_2, 0, 0, M_SQRT1_2); }
Vector4c bell_phi_minus() { return Vector4c(M_SQRT1_2, 0, 0, -M_SQRT1_2); }
Vector4c bell_psi_plus() { return Vector4c(0, M_SQRT1_2, M_SQRT1_2, 0); }
Vector4c bell_psi_minus() { return Vector4c(0, M_SQRT1_2, -M_SQRT1_2, 0); }

PolarizationState pure_state(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    throw std::domain_error("pure_state: theta outside [0, pi]");
  }
  if (!(phi >= 0.0 && phi < 2.0 * kPi)) {
    throw std::domain_error("pure_state: phi outside [0, 2*pi)");
  }
  const Complex h = std::cos(0.5 * theta);
  const Complex v = phase_factor(phi) * std::sin(0.5 * theta);
  return PolarizationState(h, v).canonicalized();
}

TwoQubitState entangled_pair_state(double tau_ps, double s_split_uev) {
  if (s_split_uev < 0.0) {
    throw std::domain_error("entangled_pair_state: negative splitting");
  }
  const double alpha = s_split_uev * tau_ps / constants::hbar_uev_ps;
  Vector4c psi = Vector4c::Zero();
  psi(0) = M_SQRT1_2;
  psi(3) = M_SQRT1_2 * phase_factor(alpha);
  return TwoQubitState(psi);
}

PolarizationState expected_output(const PolarizationState& input, double tau2_ps,
                                  double s_split_uev) {
  if (!input.is_canonical()) {
    throw std::domain_error("expected_output: input not canonical");
  }
  const double alpha = s_split_uev * tau2_ps / constants::hbar_uev_ps;
  // Bit flip; the V-turned-H amplitude picks up e^{-i S tau2 / hbar}.
  const Complex out_h = input.amp_v() * phase_factor(-alpha);
  const Complex out_v = input.amp_h();
  return PolarizationState(out_h, out_v).canonicalized();
}

double fidelity(const DensityMatrix1Q& a, const DensityMatrix1Q& b) {
  if (!a.is_physical(1e-8) || !b.is_physical(1e-8)) {
    throw std::domain_error("fidelity: non-physical density matrix");
  }
  const double cross = (a.matrix() * b.matrix()).trace().real();
  const double da = std::max(0.0, a.matrix().determinant().real());
  const double db = std::max(0.0, b.matrix().determinant().real());
  const double f = cross + 2.0 * std::sqrt(da * db);
  return std::min(1.0, std::max(0.0, f));
}

Matrix4c bell_psi_plus_projector() {
  const Vector4c psi = bell_psi_plus();
  return psi * psi.adjoint();
}

std::pair<Vector2c, Vector2c> basis_vectors(Basis b) {
  switch (b) {
    case Basis::kHV:
      return {PolarizationState::h().vector(), PolarizationState::v().vector()};
    case Basis::kDA:
      return {PolarizationState::d().vector(), PolarizationState::a().vector()};
    case Basis::kRL:
    default:
      return {PolarizationState::r().vector(), PolarizationState::l().vector()};
  }
}

CorrelationFidelity entanglement_fidelity_from_correlations(double c_hv, double c_da,
                                                            double c_rl, BellTarget target) {
  // Phi+ = (|HH>+|VV>)/sqrt(2) has (C_HV, C_DA, C_RL) = (1, 1, -1);
  // Phi- flips the sign of both equatorial correlations.
  double f;
  if (target == BellTarget::kPhiPlus) {
    f = 0.25 * (1.0 + c_hv + c_da - c_rl);
  } else {
    f = 0.25 * (1.0 + c_hv - c_da + c_rl);
  }
  return {f, f < 0.0 || f > 1.0};
}

}  // namespace qrelay
