#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "qrelay/coincidence.hpp"
#include "qrelay/config.hpp"
#include "qrelay/security.hpp"
#include "qrelay/tomography.hpp"

namespace qrelay {

// A scenario result that breaks a physical invariant (negative counts,
// fractions outside [0, 1], non-physical matrices, ...).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitInvariantViolation = 3;

// QRELAY_THREADS environment override, otherwise the hardware count.
int default_thread_count();

struct TeleportationRun {
  std::string input_name;
  Basis basis = Basis::kHV;
  Channel expected = Channel::kD3;
  Window window;
  double f_analytic = 0.0;
  FidelityEstimate mc;  // zero counts when the Monte Carlo backend is off
};

struct Bb84Result {
  std::array<TeleportationRun, 4> runs;  // H, V, D, A
  double mean_analytic = 0.0;
  double mean_mc = 0.0;
  double sigma_mc = 0.0;
  std::vector<SweepEntry> sweep;
  std::optional<SweepEntry> best;
};

struct OscillationResult {
  OscillationSeries d_series;
  OscillationSeries r_series;
  SinusoidFit d_fit;       // fixed frequency
  SinusoidFit r_fit;       // fixed frequency
  SinusoidFit d_fit_free;  // free frequency, for the period
  double phase_diff_rad = 0.0;  // |phi_R - phi_D| wrapped into [0, pi]
  double period_ps = 0.0;
};

struct TomographyRunResult {
  std::array<DensityMatrix1Q, 4> outputs;  // for inputs H, V, D, R
  std::array<SinusoidFit, 4> fits;
  std::array<double, 4> p_hv{};
  ProcessMatrix chi;
  double chi_xx = 0.0;
  double f_process = 0.0;
  double f_avg = 0.0;
};

struct EntanglementResult {
  EntanglementCurve analytic;
  std::optional<EntanglementCurve> mc;
  double period_ps = 0.0;
  double peak_phi_minus = 0.0;
  double evolving = 0.0;
};

// Pipeline entry points (also used by the acceptance suite).  Monte Carlo
// is run when the config backend includes it; duration_override_s > 0
// replaces the configured duration.
EntanglementResult run_entanglement(const BenchConfig& cfg);
Bb84Result run_bb84(const BenchConfig& cfg, int threads);
std::vector<DetuningPoint> run_detuning(const BenchConfig& cfg, int threads);
OscillationResult run_oscillation(const BenchConfig& cfg, int threads,
                                  double duration_override_s = 0.0);
TomographyRunResult run_tomography_pipeline(const BenchConfig& cfg, int threads);

// Runs one named scenario (entanglement, bb84-sweep, detuning, oscillation,
// tomography, landscape, full-report), writing CSV/SVG artifacts and a
// summary into out_dir.  Returns kExitOk; throws ConfigError for an unknown
// name and InvariantViolation when a result breaks its bounds.
int run_scenario(const std::string& name, const BenchConfig& cfg,
                 const std::string& out_dir, int threads);

}  // namespace qrelay
