#include "qrelay/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qrelay {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
  }
}

double get_num(const json& j, const std::string& where, const std::string& key,
               double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& where, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(where + "." + key + ": expected an integer");
  }
  return j.at(key).get<int>();
}

}  // namespace

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::kAnalytic: return "analytic";
    case Backend::kMonteCarlo: return "montecarlo";
    case Backend::kBoth:
    default: return "both";
  }
}

Backend parse_backend(const std::string& name) {
  if (name == "analytic") return Backend::kAnalytic;
  if (name == "montecarlo") return Backend::kMonteCarlo;
  if (name == "both") return Backend::kBoth;
  throw ConfigError("unknown backend '" + name + "'");
}

void BenchConfig::validate() const {
  try {
    source.validate();
    laser.validate();
    detector.validate();
    coupler.validate();
    map_grid().validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  if (duration_s <= 0.0) throw ConfigError("run.duration_s must be positive");
  if (bin_ps < 1 || bin_ps > 8) throw ConfigError("run.bin_ps outside [1, 8]");
  if (output_dir.empty()) throw ConfigError("run.output_dir must not be empty");
  if (analysis.window_dt1_ps <= 0 || analysis.window_dt1_ps % bin_ps != 0 ||
      analysis.window_dt2_ps <= 0 || analysis.window_dt2_ps % bin_ps != 0) {
    throw ConfigError("analysis.window extents must be positive multiples of bin_ps");
  }
  if (analysis.detuning_window_dt1_ps <= 0 ||
      analysis.detuning_window_dt1_ps % bin_ps != 0 ||
      analysis.detuning_window_dt2_ps <= 0 ||
      analysis.detuning_window_dt2_ps % bin_ps != 0) {
    throw ConfigError("analysis.detuning window extents must be positive multiples of bin_ps");
  }
  if (analysis.osc_bin_t1_ps <= 0 || analysis.osc_bin_t1_ps % bin_ps != 0 ||
      analysis.osc_bin_t2_ps <= 0 || analysis.osc_bin_t2_ps % bin_ps != 0) {
    throw ConfigError("analysis.osc bins must be positive multiples of bin_ps");
  }
  if (analysis.tomo_window_t1_ps <= 0 || analysis.tomo_window_t1_ps % bin_ps != 0 ||
      analysis.tomo_span_t2_ps < 8 * analysis.osc_bin_t2_ps ||
      analysis.tomo_span_t2_ps % analysis.osc_bin_t2_ps != 0) {
    throw ConfigError("analysis.tomo window invalid (span must hold >= 8 osc bins)");
  }
  for (const double d : analysis.detuning_list_ghz) {
    if (d < 0.0 || d > 100.0) throw ConfigError("analysis.detuning_list_ghz outside [0, 100]");
  }
}

MapGrid BenchConfig::map_grid() const {
  MapGrid g;
  g.bin_ps = bin_ps;
  g.t1_min_ps = analysis.map_t1_min_ps;
  g.t1_max_ps = analysis.map_t1_max_ps;
  g.t2_min_ps = analysis.map_t2_min_ps;
  g.t2_max_ps = analysis.map_t2_max_ps;
  return g;
}

RelayScenario BenchConfig::scenario(const PolarizationState& input, Basis basis) const {
  RelayScenario scn;
  scn.input_state = input.canonicalized();
  scn.src = source;
  scn.laser = laser;
  scn.det = detector;
  scn.coupler = coupler;
  scn.bob_basis = basis;
  scn.phase_offset_rad = phase_offset_rad;
  return scn;
}

BenchConfig default_config() { return BenchConfig{}; }

BenchConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  BenchConfig cfg;
  check_keys(j, "config",
             {"source", "laser", "detector", "coupler", "relay", "run", "analysis"});

  if (j.contains("source")) {
    const auto& s = j.at("source");
    check_keys(s, "source", {"fss_ueV", "coh2x_ps", "x_lifetime_ps", "pair_rate_cps",
                             "depolarization", "linewidth_ghz"});
    cfg.source.fss_uev = get_num(s, "source", "fss_ueV", cfg.source.fss_uev);
    cfg.source.coh2x_ps = get_num(s, "source", "coh2x_ps", cfg.source.coh2x_ps);
    cfg.source.x_lifetime_ps = get_num(s, "source", "x_lifetime_ps", cfg.source.x_lifetime_ps);
    cfg.source.pair_rate_cps = get_num(s, "source", "pair_rate_cps", cfg.source.pair_rate_cps);
    cfg.source.depolarization = get_num(s, "source", "depolarization", cfg.source.depolarization);
    cfg.source.linewidth_ghz = get_num(s, "source", "linewidth_ghz", cfg.source.linewidth_ghz);
  }
  if (j.contains("laser")) {
    const auto& s = j.at("laser");
    check_keys(s, "laser", {"detuning_ghz", "linewidth_khz", "intensity_ratio"});
    cfg.laser.detuning_ghz = get_num(s, "laser", "detuning_ghz", cfg.laser.detuning_ghz);
    cfg.laser.linewidth_khz = get_num(s, "laser", "linewidth_khz", cfg.laser.linewidth_khz);
    cfg.laser.intensity_ratio = get_num(s, "laser", "intensity_ratio", cfg.laser.intensity_ratio);
  }
  if (j.contains("detector")) {
    const auto& s = j.at("detector");
    check_keys(s, "detector",
               {"jitter_fwhm_ps", "dark_cps", "efficiency", "extinction_ratio_db"});
    cfg.detector.jitter_fwhm_ps =
        get_num(s, "detector", "jitter_fwhm_ps", cfg.detector.jitter_fwhm_ps);
    cfg.detector.dark_cps = get_num(s, "detector", "dark_cps", cfg.detector.dark_cps);
    cfg.detector.efficiency = get_num(s, "detector", "efficiency", cfg.detector.efficiency);
    cfg.detector.extinction_ratio_db =
        get_num(s, "detector", "extinction_ratio_db", cfg.detector.extinction_ratio_db);
  }
  if (j.contains("coupler")) {
    const auto& s = j.at("coupler");
    check_keys(s, "coupler", {"split_ratio"});
    cfg.coupler.split_ratio = get_num(s, "coupler", "split_ratio", cfg.coupler.split_ratio);
  }
  if (j.contains("relay")) {
    const auto& s = j.at("relay");
    check_keys(s, "relay", {"phase_offset_rad"});
    cfg.phase_offset_rad = get_num(s, "relay", "phase_offset_rad", cfg.phase_offset_rad);
  }
  if (j.contains("run")) {
    const auto& s = j.at("run");
    check_keys(s, "run", {"seed", "duration_s", "backend", "bin_ps", "output_dir"});
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned() && !s.at("seed").is_number_integer()) {
        throw ConfigError("run.seed: expected an integer");
      }
      cfg.seed = s.at("seed").get<std::uint64_t>();
    }
    cfg.duration_s = get_num(s, "run", "duration_s", cfg.duration_s);
    if (s.contains("backend")) {
      if (!s.at("backend").is_string()) throw ConfigError("run.backend: expected a string");
      cfg.backend = parse_backend(s.at("backend").get<std::string>());
    }
    cfg.bin_ps = get_int(s, "run", "bin_ps", cfg.bin_ps);
    if (s.contains("output_dir")) {
      if (!s.at("output_dir").is_string()) {
        throw ConfigError("run.output_dir: expected a string");
      }
      cfg.output_dir = s.at("output_dir").get<std::string>();
    }
  }
  if (j.contains("analysis")) {
    const auto& s = j.at("analysis");
    check_keys(s, "analysis",
               {"map_t1_range_ps", "map_t2_range_ps", "window_dt1_ps", "window_dt2_ps",
                "detuning_list_ghz", "detuning_window_ps", "osc_bin_t1_ps", "osc_bin_t2_ps",
                "tomo_window_t1_ps", "tomo_span_t2_ps"});
    auto range = [&](const char* key, int& lo, int& hi) {
      if (!s.contains(key)) return;
      const auto& r = s.at(key);
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError(std::string("analysis.") + key + ": expected [lo, hi]");
      }
      lo = r.at(0).get<int>();
      hi = r.at(1).get<int>();
    };
    range("map_t1_range_ps", cfg.analysis.map_t1_min_ps, cfg.analysis.map_t1_max_ps);
    range("map_t2_range_ps", cfg.analysis.map_t2_min_ps, cfg.analysis.map_t2_max_ps);
    cfg.analysis.window_dt1_ps =
        get_int(s, "analysis", "window_dt1_ps", cfg.analysis.window_dt1_ps);
    cfg.analysis.window_dt2_ps =
        get_int(s, "analysis", "window_dt2_ps", cfg.analysis.window_dt2_ps);
    if (s.contains("detuning_list_ghz")) {
      const auto& r = s.at("detuning_list_ghz");
      if (!r.is_array()) throw ConfigError("analysis.detuning_list_ghz: expected an array");
      cfg.analysis.detuning_list_ghz.clear();
      for (const auto& v : r) cfg.analysis.detuning_list_ghz.push_back(v.get<double>());
    }
    if (s.contains("detuning_window_ps")) {
      const auto& r = s.at("detuning_window_ps");
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError("analysis.detuning_window_ps: expected [dt1, dt2]");
      }
      cfg.analysis.detuning_window_dt1_ps = r.at(0).get<int>();
      cfg.analysis.detuning_window_dt2_ps = r.at(1).get<int>();
    }
    cfg.analysis.osc_bin_t1_ps = get_int(s, "analysis", "osc_bin_t1_ps", cfg.analysis.osc_bin_t1_ps);
    cfg.analysis.osc_bin_t2_ps = get_int(s, "analysis", "osc_bin_t2_ps", cfg.analysis.osc_bin_t2_ps);
    cfg.analysis.tomo_window_t1_ps =
        get_int(s, "analysis", "tomo_window_t1_ps", cfg.analysis.tomo_window_t1_ps);
    cfg.analysis.tomo_span_t2_ps =
        get_int(s, "analysis", "tomo_span_t2_ps", cfg.analysis.tomo_span_t2_ps);
  }

  cfg.validate();
  return cfg;
}

BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const BenchConfig& cfg) {
  json j;
  j["source"] = {{"fss_ueV", cfg.source.fss_uev},
                 {"coh2x_ps", cfg.source.coh2x_ps},
                 {"x_lifetime_ps", cfg.source.x_lifetime_ps},
                 {"pair_rate_cps", cfg.source.pair_rate_cps},
                 {"depolarization", cfg.source.depolarization},
                 {"linewidth_ghz", cfg.source.linewidth_ghz}};
  j["laser"] = {{"detuning_ghz", cfg.laser.detuning_ghz},
                {"linewidth_khz", cfg.laser.linewidth_khz},
                {"intensity_ratio", cfg.laser.intensity_ratio}};
  j["detector"] = {{"jitter_fwhm_ps", cfg.detector.jitter_fwhm_ps},
                   {"dark_cps", cfg.detector.dark_cps},
                   {"efficiency", cfg.detector.efficiency},
                   {"extinction_ratio_db", cfg.detector.extinction_ratio_db}};
  j["coupler"] = {{"split_ratio", cfg.coupler.split_ratio}};
  j["relay"] = {{"phase_offset_rad", cfg.phase_offset_rad}};
  j["run"] = {{"seed", cfg.seed},
              {"duration_s", cfg.duration_s},
              {"backend", backend_name(cfg.backend)},
              {"bin_ps", cfg.bin_ps},
              {"output_dir", cfg.output_dir}};
  j["analysis"] = {
      {"map_t1_range_ps", {cfg.analysis.map_t1_min_ps, cfg.analysis.map_t1_max_ps}},
      {"map_t2_range_ps", {cfg.analysis.map_t2_min_ps, cfg.analysis.map_t2_max_ps}},
      {"window_dt1_ps", cfg.analysis.window_dt1_ps},
      {"window_dt2_ps", cfg.analysis.window_dt2_ps},
      {"detuning_list_ghz", cfg.analysis.detuning_list_ghz},
      {"detuning_window_ps",
       {cfg.analysis.detuning_window_dt1_ps, cfg.analysis.detuning_window_dt2_ps}},
      {"osc_bin_t1_ps", cfg.analysis.osc_bin_t1_ps},
      {"osc_bin_t2_ps", cfg.analysis.osc_bin_t2_ps},
      {"tomo_window_t1_ps", cfg.analysis.tomo_window_t1_ps},
      {"tomo_span_t2_ps", cfg.analysis.tomo_span_t2_ps}};
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const BenchConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qrelay
