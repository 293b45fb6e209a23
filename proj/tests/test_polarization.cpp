#include <doctest.h>

#include <cmath>

#include "qrelay/polarization.hpp"
#include "qrelay/random.hpp"

using namespace qrelay;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kOmega = 9.05 / constants::hbar_uev_ps;

bool states_close(const PolarizationState& a, const PolarizationState& b, double tol = 1e-12) {
  return std::abs(a.amp_h() - b.amp_h()) < tol && std::abs(a.amp_v() - b.amp_v()) < tol;
}

// basis correlations of a two-photon state, same-minus-different outcome
// fractions; used as the independent oracle for the fidelity formula
double correlation(const TwoQubitState& st, Basis basis) {
  const auto [p, q] = basis_vectors(basis);
  Vector4c pp, pq, qp, qq;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      pp(2 * i + k) = p(i) * p(k);
      pq(2 * i + k) = p(i) * q(k);
      qp(2 * i + k) = q(i) * p(k);
      qq(2 * i + k) = q(i) * q(k);
    }
  }
  const auto prob = [&](const Vector4c& v) {
    return (v.adjoint() * st.matrix() * v)(0).real();
  };
  return prob(pp) + prob(qq) - prob(pq) - prob(qp);
}
}  // namespace

TEST_CASE("pure_state poles and superpositions") {
  CHECK(states_close(pure_state(0.0, 0.0), PolarizationState::h()));
  CHECK(states_close(pure_state(kPi / 2, 0.0), PolarizationState::d()));
  CHECK(states_close(pure_state(kPi / 2, kPi / 2), PolarizationState::r()));
  CHECK_THROWS_AS(pure_state(-0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(pure_state(kPi + 0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(pure_state(1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(pure_state(1.0, 2.0 * kPi), std::domain_error);
}

TEST_CASE("entangled_pair_state phase evolution") {
  CHECK(entangled_pair_state(0.0, 9.05).fidelity_to(bell_phi_plus()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // half the 457 ps period lands on Phi- within 1e-3 rad of phase
  const double f_minus = entangled_pair_state(228.5, 9.05).fidelity_to(bell_phi_minus());
  const double phase_half = kOmega * 228.5;
  CHECK(std::abs(phase_half - kPi) < 1e-3);
  CHECK(f_minus > 1.0 - 1e-6);
  // a full period is back at Phi+
  const double f_plus = entangled_pair_state(457.0, 9.05).fidelity_to(bell_phi_plus());
  CHECK(std::abs(kOmega * 457.0 - 2.0 * kPi) < 1e-3);
  CHECK(f_plus > 1.0 - 1e-6);
  CHECK_THROWS_AS(entangled_pair_state(0.0, -1.0), std::domain_error);
}

TEST_CASE("expected_output bit flip and phase") {
  CHECK(states_close(expected_output(PolarizationState::h(), 123.0, 9.05),
                     PolarizationState::v()));
  CHECK(states_close(expected_output(PolarizationState::d(), 0.0, 9.05),
                     PolarizationState::d()));
  CHECK(states_close(expected_output(PolarizationState::r(), 0.0, 9.05),
                     PolarizationState::l().canonicalized()));
}

TEST_CASE("expected_output equals the explicit matrix route") {
  Rng rng(71);
  for (int i = 0; i < 100; ++i) {
    const double theta = rng.uniform() * kPi;
    const double phi = rng.uniform() * 2.0 * kPi * (1.0 - 1e-15);
    const double tau2 = rng.uniform() * 2000.0 - 500.0;
    const PolarizationState in = pure_state(theta, phi);
    const PolarizationState out = expected_output(in, tau2, 9.05);

    const double alpha = kOmega * tau2;
    Matrix2c m;
    m << 0.0, Complex(std::cos(-alpha), std::sin(-alpha)), 1.0, 0.0;
    const Vector2c v = m * in.vector();
    const PolarizationState ref = PolarizationState(v(0), v(1)).canonicalized();
    CHECK(states_close(out, ref, 1e-12));
  }
}

TEST_CASE("fidelity basics") {
  const DensityMatrix1Q h{PolarizationState::h()};
  const DensityMatrix1Q v{PolarizationState::v()};
  const DensityMatrix1Q d{PolarizationState::d()};
  CHECK(fidelity(d, d) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(h, v) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fidelity(d, DensityMatrix1Q::maximally_mixed()) == doctest::Approx(0.5).epsilon(1e-12));
  Matrix2c bad;
  bad << 2.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(fidelity(DensityMatrix1Q(bad), h), std::domain_error);
}

TEST_CASE("bell psi+ projector") {
  const Matrix4c p = bell_psi_plus_projector();
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(p.trace().real() - 1.0) < 1e-14);

  Vector4c hv = Vector4c::Zero();
  hv(1) = 1.0;  // |H V>
  CHECK((hv.adjoint() * p * hv)(0).real() == doctest::Approx(0.5).epsilon(1e-12));
  Vector4c hh = Vector4c::Zero();
  hh(0) = 1.0;
  CHECK((hh.adjoint() * p * hh)(0).real() == doctest::Approx(0.0).epsilon(1e-12));

  // orthogonal Bell families at every delay
  const Vector4c psi = bell_psi_plus();
  for (double tau = 0.0; tau <= 900.0; tau += 57.0) {
    CHECK(entangled_pair_state(tau, 9.05).fidelity_to(psi) < 1e-12);
  }
}

TEST_CASE("entanglement fidelity from correlations") {
  CHECK(entanglement_fidelity_from_correlations(1.0, 1.0, -1.0).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(entanglement_fidelity_from_correlations(0.0, 0.0, 0.0).value ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK_FALSE(entanglement_fidelity_from_correlations(1.0, 1.0, -1.0).outside_physical);
  CHECK(entanglement_fidelity_from_correlations(1.0, 1.5, -1.0).outside_physical);

  // oracle: correlations computed from the exact state reproduce the direct
  // overlap with both Bell targets, at tau = 0 and along the oscillation
  for (double tau : {0.0, 57.0, 228.5, 330.0, 457.0}) {
    const TwoQubitState st = entangled_pair_state(tau, 9.05);
    const double c_hv = correlation(st, Basis::kHV);
    const double c_da = correlation(st, Basis::kDA);
    const double c_rl = correlation(st, Basis::kRL);
    const double f_plus =
        entanglement_fidelity_from_correlations(c_hv, c_da, c_rl, BellTarget::kPhiPlus).value;
    const double f_minus =
        entanglement_fidelity_from_correlations(c_hv, c_da, c_rl, BellTarget::kPhiMinus).value;
    CHECK(f_plus == doctest::Approx(st.fidelity_to(bell_phi_plus())).epsilon(1e-12));
    CHECK(f_minus == doctest::Approx(st.fidelity_to(bell_phi_minus())).epsilon(1e-12));
  }
  CHECK(entanglement_fidelity_from_correlations(1.0, 1.0, -1.0, BellTarget::kPhiPlus).value ==
        doctest::Approx(1.0));
}

TEST_CASE("pair fidelity follows (1 + cos)/2") {
  for (double tau = 0.0; tau <= 1000.0; tau += 7.0) {
    const double expect = 0.5 * (1.0 + std::cos(kOmega * tau));
    CHECK(std::abs(entangled_pair_state(tau, 9.05).fidelity_to(bell_phi_plus()) - expect) <
          1e-10);
  }
}

TEST_CASE("partial traces of the pair state are maximally mixed") {
  for (double tau : {0.0, 100.0, 228.5}) {
    const TwoQubitState st = entangled_pair_state(tau, 9.05);
    for (int keep : {0, 1}) {
      const Matrix2c r = st.partial_trace(keep).matrix();
      CHECK((r - 0.5 * Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("canonicalization is idempotent and fidelity-preserving") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Complex h(rng.normal(1.0), rng.normal(1.0));
    const Complex v(rng.normal(1.0), rng.normal(1.0));
    const PolarizationState raw(h, v);
    const PolarizationState c1 = raw.canonicalized();
    const PolarizationState c2 = c1.canonicalized();
    CHECK(c1.is_canonical());
    CHECK(states_close(c1, c2, 1e-12));
    CHECK(fidelity(DensityMatrix1Q(raw), DensityMatrix1Q(c1)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("pauli set relations") {
  const auto& s = PauliSet::all();
  CHECK((s[0] - Matrix2c::Identity()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 4; ++i) {
    CHECK((s[i] * s[i] - Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    for (int j = 0; j < 4; ++j) {
      const double expect = i == j ? 2.0 : 0.0;
      CHECK(std::abs((s[i] * s[j]).trace().real() - expect) < 1e-15);
      CHECK(std::abs((s[i] * s[j]).trace().imag()) < 1e-15);
    }
  }
}

TEST_CASE("density matrix physicality checks") {
  CHECK(DensityMatrix1Q::maximally_mixed().is_physical());
  CHECK(DensityMatrix1Q(PolarizationState::d()).is_physical());
  Matrix2c m;
  m << 1.2, 0.0, 0.0, -0.2;
  CHECK_FALSE(DensityMatrix1Q(m).is_physical());
  m << 0.5, Complex(0.0, 0.3), Complex(0.0, 0.3), 0.5;  // not Hermitian
  CHECK_FALSE(DensityMatrix1Q(m).is_physical());
}
