#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrelay/polarization.hpp"
#include "qrelay/relay_engine.hpp"
#include "qrelay/source_model.hpp"

namespace qrelay {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Backend { kAnalytic, kMonteCarlo, kBoth };

std::string backend_name(Backend b);
Backend parse_backend(const std::string& name);  // throws ConfigError

struct AnalysisConfig {
  int map_t1_min_ps = -256;
  int map_t1_max_ps = 256;
  int map_t2_min_ps = -200;
  int map_t2_max_ps = 800;
  int window_dt1_ps = 88;
  int window_dt2_ps = 120;
  std::vector<double> detuning_list_ghz = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  int detuning_window_dt1_ps = 24;
  int detuning_window_dt2_ps = 32;
  int osc_bin_t1_ps = 72;
  int osc_bin_t2_ps = 56;
  int tomo_window_t1_ps = 104;
  int tomo_span_t2_ps = 1008;
};

// Full experiment description: physical parameters plus run controls.  The
// file format is JSON with one object per parameter group; unknown keys are
// rejected and every value is bounds-checked.
struct BenchConfig {
  QdSourceParams source;
  LaserParams laser;
  DetectorParams detector;
  CouplerParams coupler;
  double phase_offset_rad = 0.0;

  std::uint64_t seed = 12345;
  double duration_s = 4.0;
  Backend backend = Backend::kBoth;
  int bin_ps = 8;
  std::string output_dir = "out";

  AnalysisConfig analysis;

  void validate() const;  // throws ConfigError

  MapGrid map_grid() const;
  RelayScenario scenario(const PolarizationState& input, Basis basis) const;
};

BenchConfig default_config();

BenchConfig parse_config(const std::string& json_text);  // throws ConfigError
BenchConfig load_config(const std::string& path);        // throws ConfigError
std::string serialize_config(const BenchConfig& cfg);    // canonical JSON

// FNV-1a of the canonical serialization; stamped into tag dumps.
std::uint64_t config_hash(const BenchConfig& cfg);

}  // namespace qrelay
