#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qrelay/relay_engine.hpp"
#include "qrelay/source_model.hpp"
#include "qrelay/time_tags.hpp"

namespace qrelay {

// Three-fold coincidence histogram over (tau1, tau2), one sheet per Bob
// outcome (0 = D3, 1 = D4).
struct CoincidenceMap {
  MapGrid grid;
  std::array<std::vector<std::int64_t>, 2> counts;

  std::int64_t at(int outcome, int i1, int i2) const {
    return counts[static_cast<std::size_t>(outcome)]
                 [static_cast<std::size_t>(i1 * grid.n2() + i2)];
  }
  std::int64_t total() const;
  void add(const CoincidenceMap& other);  // same-grid accumulation
};

// Rectangular post-selection window, dt1 x dt2 around (center_t1, center_t2).
// Extents must be positive multiples of the map bin; the window is realized
// as the dt/bin_ps bins whose middle bin contains the center.
struct Window {
  int dt1_ps = 88;
  int dt2_ps = 120;
  int center_t1_ps = 0;
  int center_t2_ps = 0;
};

struct FidelityEstimate {
  double value = 0.0;
  double sigma = 0.0;
  std::int64_t n_correct = 0;
  std::int64_t n_wrong = 0;

  bool valid() const { return n_correct + n_wrong > 0; }
};

// For every D1 tag, every D2 tag with tau1 = t_D2 - t_D1 in range and every
// D3/D4 tag with tau2 = t_Bob - t_D1 in range increments the matching bin.
// Merge-join over the sorted stream, linear in the tags for bounded ranges.
// Throws std::invalid_argument on unsorted input.
CoincidenceMap build_threefold_map(const TimeTagStream& tags, const MapGrid& grid);

// Raw windowed fidelity: counts in the expected Bob channel over all counts
// inside the window, with binomial (Poisson-propagated) sigma.
FidelityEstimate teleportation_fidelity(const CoincidenceMap& map, const Window& win,
                                        Channel expected_outcome);

// Expected windowed fraction of the analytic density (same window snapping).
double analytic_window_fidelity(const RateDensity3F& density, const Window& win,
                                Channel expected_outcome);

// Picks the tau2 window center (tau2 >= t2_floor_ps region) maximizing the
// windowed |D3 - D4| excess of the analytic density, i.e. the phase-aligned
// envelope crest; returns the snapped center and the dominant channel.
std::pair<int, Channel> choose_window_center(const RateDensity3F& density, int dt1_ps,
                                             int dt2_ps, int center_t1_ps = 0,
                                             int t2_floor_ps = 0);

struct SweepEntry {
  double sqrt_area_ps = 0.0;
  int dt1_ps = 0;
  int dt2_ps = 0;
  double mean_f = 0.0;
  double sigma = 0.0;   // of the mean
  double min_f = 0.0;   // worst individual input
  bool all_above_75 = false;
  std::int64_t n_total = 0;  // counts across all four windows
};

// Mean 4-state fidelity for every window size (in bin steps), each input
// evaluated in its own fixed center and expected channel.
std::vector<SweepEntry> window_sweep(const std::array<CoincidenceMap, 4>& maps,
                                     const std::array<Channel, 4>& expected,
                                     const std::array<Window, 4>& base_windows);

// Highest-significance flagged entry: maximizes (mean_f - 0.75) / sigma over
// entries whose individual fidelities all exceed 75 %.
std::optional<SweepEntry> best_flagged_window(const std::vector<SweepEntry>& sweep);

struct DetuningPoint {
  double delta_ghz = 0.0;
  double f_analytic = 0.0;
  double f_mc = 0.0;
  double sigma_mc = 0.0;
  std::int64_t mc_heralds = 0;
};

// Teleportation fidelity of input |D> versus laser detuning.  The window
// center is chosen from the analytic density per point and shared by both
// backends; mc_duration_s == 0 skips the Monte Carlo column.
std::vector<DetuningPoint> detuning_sweep(const RelayScenario& base,
                                          const std::vector<double>& deltas_ghz,
                                          const MapGrid& grid, int dt1_ps, int dt2_ps,
                                          double mc_duration_s, std::uint64_t seed,
                                          int threads = 1);

struct EntanglementCurve {
  std::vector<double> tau_ps;
  std::vector<double> f_phi_plus;
  std::vector<double> f_phi_minus;
  std::vector<double> f_evolving;
  std::vector<double> sigma;  // per-point statistical error, zero for analytic
};

// Fidelity-versus-delay curves for the static Phi+ / Phi- targets and the
// co-rotating target.  The static curves keep the measurement smearing; the
// evolving-target value removes the known jitter/bin response, reporting the
// source-state fidelity (constant in the analytic case).
EntanglementCurve entanglement_fidelity_curve(const PairCorrelations& pc);
EntanglementCurve entanglement_fidelity_curve(const PairCorrelationSeries& series,
                                              const QdSourceParams& src,
                                              const DetectorParams& det);

// Dominant oscillation period by discrete periodogram with parabolic peak
// refinement.
double oscillation_period_ps(const std::vector<double>& tau_ps,
                             const std::vector<double>& values);

// Segmented Monte Carlo map accumulation: duration is split into fixed
// 0.125 s segments simulated with seeds derived from (seed, index), binned
// independently and summed, so the result is independent of thread count.
CoincidenceMap mc_coincidence_map(const RelayScenario& scn, const MapGrid& grid,
                                  std::uint64_t seed, double duration_s, int threads = 1);

}  // namespace qrelay
