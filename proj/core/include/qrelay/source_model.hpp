#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qrelay/polarization.hpp"
#include "qrelay/random.hpp"
#include "qrelay/time_tags.hpp"

namespace qrelay {

// Quantum-dot pair source parameters.
struct QdSourceParams {
  double fss_uev = 9.05;          // exciton fine-structure splitting S
  double coh2x_ps = 95.0;         // 2X first-order coherence time
  double x_lifetime_ps = 1000.0;  // X radiative lifetime
  double pair_rate_cps = 1.0e7;   // cascade emission rate into the fibers
  double depolarization = 0.0493; // white-noise admixture lambda in [0, 1]
  double linewidth_ghz = 3.0;     // emission linewidth (informational)

  void validate() const;
};

struct LaserParams {
  double detuning_ghz = 0.0;    // input laser minus 2X center frequency
  double linewidth_khz = 400.0; // narrow enough to be treated as a delta line
  double intensity_ratio = 0.9; // detected laser rate / detected 2X rate

  void validate() const;
};

struct DetectorParams {
  double jitter_fwhm_ps = 70.0;      // cross-channel timing jitter
  double dark_cps = 100.0;           // per channel
  double efficiency = 0.8;           // in [0, 1]
  double extinction_ratio_db = 30.0; // polarization analyzer extinction

  void validate() const;
  // Gaussian sigma of a measured two-channel delay.
  double cross_sigma_ps() const { return jitter_fwhm_ps / 2.3548200450309493; }
  // Per-tag sigma; two independent tags reproduce the cross-channel value.
  double tag_sigma_ps() const { return cross_sigma_ps() / 1.4142135623730951; }
  // Probability of reading the wrong analyzer output.
  double extinction_leak() const;
};

struct CouplerParams {
  double split_ratio = 0.5;  // fraction of the QD arm sent toward the Bell PBS

  void validate() const;
};

struct PairEmission {
  double t_2x_ps;
  double t_x_ps;
};

// (1 - lambda) |Phi(tau)><Phi(tau)| + lambda * I/4.
TwoQubitState mixed_pair_state(double tau_ps, const QdSourceParams& src);

// Cascade emissions over a duration: 2X times from a Poisson process with a
// short refractory gap (5 X lifetimes) so the dot cannot emit two cascades
// inside an analysis window, X delayed by Exp(x_lifetime).  The rate is
// gap-corrected so the mean count stays rate * duration.
std::vector<PairEmission> sample_pair_emissions(Rng& rng, const QdSourceParams& src,
                                                double duration_s);

// Effective two-photon interference visibility between the laser input and
// the 2X photon at Bell-measurement delay tau1:
//
//   V(tau1) = V0 * [ e^{-|t|/coh2x} cos(2 pi delta t) ] (x) Gaussian(jitter)
//
// with V0 = 2g/(1+g^2) from the Poissonian photon statistics of the input
// (2g/(1+g)^2 interference weight over the (1+g^2)/(1+g)^2 two-photon rate).
// The coherence envelope decays with the 2X coherence time alone: the
// 400 kHz laser is four orders of magnitude narrower than the dot line and
// acts as a monochromatic reference, so the beat carries a single e^{-|t|/tc}
// factor.  The raw signed value is returned; clamp at zero for fidelity use.
double hom_visibility(double tau1_ps, const LaserParams& laser, const QdSourceParams& src,
                      const DetectorParams& det, double g);

// Unpolarized pairwise indistinguishability e^{-|t|/tc} cos(2 pi delta t)
// without the photon-statistics prefactor or jitter smearing; the relay
// engine applies its own time-recording model on top of this.
double pairwise_indistinguishability(double dt_ps, const LaserParams& laser,
                                     const QdSourceParams& src);

// Homogeneous Poisson dark counts on all four channels.
TimeTagStream dark_count_stream(Rng& rng, const DetectorParams& det, double duration_s);

// Two-fold pair-correlation data in the three principal bases, binned over
// the measured 2X-X delay.
struct PairCorrelationSeries {
  int bin_ps = 8;
  std::vector<double> tau_ps;  // bin centers
  std::array<std::vector<std::int64_t>, 3> n_same;  // indexed by Basis
  std::array<std::vector<std::int64_t>, 3> n_diff;
};

// Expected basis correlations of the measured (jitter-smeared, bin-averaged)
// pair state on a tau grid.
struct PairCorrelations {
  int bin_ps = 8;
  std::vector<double> tau_ps;
  std::vector<double> c_hv;
  std::vector<double> c_da;
  std::vector<double> c_rl;
  double omega_rad_per_ps = 0.0;  // pair-phase angular frequency S/hbar
  double smear = 1.0;             // jitter+bin damping of the oscillating correlations
};

// Damping of an oscillation at omega recorded with the given jitter and bin
// width (Gaussian characteristic function times the bin-average sinc).
double oscillation_smear(double omega_rad_per_ps, const DetectorParams& det, int bin_ps);

PairCorrelations analytic_pair_correlations(const QdSourceParams& src,
                                            const DetectorParams& det, int bin_ps,
                                            int n_bins, double tau_start_ps = 0.0);

PairCorrelationSeries sample_pair_correlations(Rng& rng, const QdSourceParams& src,
                                               const DetectorParams& det, int bin_ps,
                                               int n_bins, double duration_s,
                                               double tau_start_ps = 0.0);

}  // namespace qrelay
