#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qrelay/polarization.hpp"
#include "qrelay/random.hpp"
#include "qrelay/source_model.hpp"
#include "qrelay/time_tags.hpp"

namespace qrelay {

// Laser-2X pairs separated by more than this never interfere in the model;
// the pairwise indistinguishability has decayed below 2e-3 of its peak by
// here for the default 95 ps coherence time.
inline constexpr double kInteractionHorizonPs = 608.0;

// One teleportation run: Alice's input state, the physical device parameters
// and Bob's analysis basis.
struct RelayScenario {
  PolarizationState input_state = PolarizationState::h();
  QdSourceParams src;
  LaserParams laser;
  DetectorParams det;
  CouplerParams coupler;
  Basis bob_basis = Basis::kHV;
  // Fixed phase added to the teleported output phase (decay before maximum
  // 2X population shifts the apparent tau2 origin).
  double phase_offset_rad = 0.0;

  // Detected singles rates implied by the parameters.
  double detected_2x_cps() const;
  double detected_laser_cps() const;
  double detected_x_cps() const;

  void validate() const;
};

// Common (tau1, tau2) binning for densities and coincidence maps.  All
// bounds are multiples of bin_ps; bins are [lo, lo + bin_ps).
struct MapGrid {
  int bin_ps = 8;
  int t1_min_ps = -256;
  int t1_max_ps = 256;
  int t2_min_ps = -200;
  int t2_max_ps = 800;

  int n1() const { return (t1_max_ps - t1_min_ps) / bin_ps; }
  int n2() const { return (t2_max_ps - t2_min_ps) / bin_ps; }
  double t1_center(int i) const { return t1_min_ps + (i + 0.5) * bin_ps; }
  double t2_center(int j) const { return t2_min_ps + (j + 0.5) * bin_ps; }
  void validate() const;  // throws std::domain_error; requires bin_ps <= 8
};

// Expected three-fold rate density over the grid, one sheet per Bob outcome
// (index 0 = D3, 1 = D4), bin-averaged, in counts / (s * ps^2).
struct RateDensity3F {
  MapGrid grid;
  std::array<std::vector<double>, 2> density;

  double at(int outcome, int i1, int i2) const {
    return density[static_cast<std::size_t>(outcome)]
                  [static_cast<std::size_t>(i1 * grid.n2() + i2)];
  }
  double& at(int outcome, int i1, int i2) {
    return density[static_cast<std::size_t>(outcome)]
                  [static_cast<std::size_t>(i1 * grid.n2() + i2)];
  }
};

// Analytic expectation of the heralded three-fold coincidence density.
//
// Model, shared exactly with simulate_time_tags: a laser photon and a 2X
// photon at true separation dt herald D1&D2 with probability 1/2.  A herald
// is Psi+ coherent with probability max(0, nu(dt)) where nu is the pairwise
// indistinguishability; the heralded X photon then carries the bit-flipped
// input with the rotating pair phase (mixed with the depolarization weight).
// The remaining heralds leave the HV-dephased bit-flipped state, i.e. the
// heralded state is  F_v T[rho_in, tau2] + (1 - F_v) rho_deph.  Laser-laser
// and dark heralds have no partnered Bob photon and only enter through the
// uniform accidental floor (uncorrelated X photons plus Bob dark counts);
// dot-dot heralds are removed inside the map range by the emission
// refractory gap.  Detection times carry per-tag Gaussian jitter, which
// correlates the recorded tau1 and tau2 through the shared D1 tag.
RateDensity3F analytic_threefold_density(const RelayScenario& scn, const MapGrid& grid,
                                         bool include_floor = true);

// Event-by-event sampling of all four detector channels.  Identical seed,
// scenario and duration give a bit-identical stream.  Tags outside
// [0, duration) are dropped so segmented runs concatenate cleanly.
TimeTagStream simulate_time_tags(Rng& rng, const RelayScenario& scn, double duration_s);

// Expected D1&D2 coincidence rate (per second) with tau1 inside
// [t1_min_ps, t1_max_ps]: the singles product plus the refractory-gap
// deficit of dot-dot pairs.
double herald_rate(const RelayScenario& scn, double t1_min_ps, double t1_max_ps);

}  // namespace qrelay
