#include "qrelay/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "qrelay/svg_plot.hpp"

namespace qrelay {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check(bool ok, const std::string& msg) {
  if (!ok) throw InvariantViolation(msg);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::ofstream os(std::filesystem::path(dir) / name);
  if (!os) throw std::runtime_error("cannot open output file " + name + " in " + dir);
  return os;
}

struct InputSpec {
  const char* name;
  PolarizationState state;
  Basis basis;
};

std::array<InputSpec, 4> bb84_inputs() {
  return {InputSpec{"H", PolarizationState::h(), Basis::kHV},
          InputSpec{"V", PolarizationState::v(), Basis::kHV},
          InputSpec{"D", PolarizationState::d(), Basis::kDA},
          InputSpec{"A", PolarizationState::a(), Basis::kDA}};
}

bool mc_enabled(const BenchConfig& cfg) { return cfg.backend != Backend::kAnalytic; }

// tau2-binned outcome series inside a tau1 window centered on zero.
OscillationSeries series_from_map(const CoincidenceMap& map, int dt1_ps, int bin2_ps,
                                  int span2_ps) {
  OscillationSeries s;
  for (int lo = 0; lo + bin2_ps <= span2_ps; lo += bin2_ps) {
    Window w;
    w.dt1_ps = dt1_ps;
    w.dt2_ps = bin2_ps;
    w.center_t1_ps = 0;
    w.center_t2_ps = lo + bin2_ps / 2;
    const FidelityEstimate fe = teleportation_fidelity(map, w, Channel::kD3);
    s.tau2_ps.push_back(lo + 0.5 * bin2_ps);
    s.n_first.push_back(fe.n_correct);
    s.n_second.push_back(fe.n_wrong);
  }
  return s;
}

OscillationSeries series_from_density(const RateDensity3F& density, int dt1_ps, int bin2_ps,
                                      int span2_ps) {
  // pseudo-counts at a fixed scale: only relative weights matter to the fit
  OscillationSeries s;
  for (int lo = 0; lo + bin2_ps <= span2_ps; lo += bin2_ps) {
    Window w;
    w.dt1_ps = dt1_ps;
    w.dt2_ps = bin2_ps;
    w.center_t1_ps = 0;
    w.center_t2_ps = lo + bin2_ps / 2;
    const double f3 = analytic_window_fidelity(density, w, Channel::kD3);
    // recover the masses from fraction * total via a second call
    const double f4 = 1.0 - f3;
    // total mass in the window, rebuilt from the grid directly
    const MapGrid& g = density.grid;
    const int nb1 = dt1_ps / g.bin_ps;
    const int nb2 = bin2_ps / g.bin_ps;
    const int lo1 = static_cast<int>(std::lround((0.0 - 0.5 * dt1_ps - g.t1_min_ps) / g.bin_ps));
    const int lo2 = (lo - g.t2_min_ps) / g.bin_ps;
    double total = 0.0;
    for (int i1 = lo1; i1 < lo1 + nb1; ++i1) {
      for (int i2 = lo2; i2 < lo2 + nb2; ++i2) {
        total += density.at(0, i1, i2) + density.at(1, i1, i2);
      }
    }
    const double scale = 1e9;
    s.tau2_ps.push_back(lo + 0.5 * bin2_ps);
    s.n_first.push_back(static_cast<std::int64_t>(std::llround(scale * total * f3)));
    s.n_second.push_back(static_cast<std::int64_t>(std::llround(scale * total * f4)));
  }
  return s;
}

// Polar inputs give a flat DA fraction with no variance to fit; report a
// zero-amplitude sinusoid instead of failing.
SinusoidFit fit_or_flat(const OscillationSeries& s, double omega) {
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < s.tau2_ps.size(); ++i) {
    const auto n = static_cast<double>(s.n_first[i] + s.n_second[i]);
    if (n <= 0.0) continue;
    mean += static_cast<double>(s.n_first[i]);
    wsum += n;
  }
  mean = wsum > 0.0 ? mean / wsum : 0.5;
  double spread = 0.0;
  for (std::size_t i = 0; i < s.tau2_ps.size(); ++i) {
    const auto n = static_cast<double>(s.n_first[i] + s.n_second[i]);
    if (n <= 0.0) continue;
    const double y = static_cast<double>(s.n_first[i]) / n;
    spread += n * (y - mean) * (y - mean);
  }
  if (spread > 0.0) return fit_oscillation(s, omega, FreqMode::kFixed);
  SinusoidFit f;
  f.angular_freq = omega;
  f.offset = mean;
  return f;
}

MapGrid grid_for_span(const BenchConfig& cfg, int span2_ps) {
  MapGrid g = cfg.map_grid();
  const int needed = ((span2_ps + cfg.bin_ps - 1) / cfg.bin_ps) * cfg.bin_ps;
  g.t2_max_ps = std::max(g.t2_max_ps, needed);
  return g;
}

double wrap_phase_diff(double d) {
  d = std::fmod(std::abs(d), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

struct MapPair {
  RateDensity3F density;
  std::optional<CoincidenceMap> map;
};

MapPair make_maps(const BenchConfig& cfg, const RelayScenario& scn, const MapGrid& grid,
                  std::uint64_t seed_index, int threads) {
  MapPair mp{analytic_threefold_density(scn, grid), std::nullopt};
  for (const double v : mp.density.density[0]) check(v >= 0.0, "negative analytic density");
  for (const double v : mp.density.density[1]) check(v >= 0.0, "negative analytic density");
  if (mc_enabled(cfg)) {
    mp.map = mc_coincidence_map(scn, grid, derive_seed(cfg.seed, seed_index),
                                cfg.duration_s, threads);
  }
  return mp;
}

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("QRELAY_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(std::min(hc, 8u));
}

EntanglementResult run_entanglement(const BenchConfig& cfg) {
  cfg.validate();
  EntanglementResult res;
  const int n_bins = 4096 / cfg.bin_ps;
  const PairCorrelations pc =
      analytic_pair_correlations(cfg.source, cfg.detector, cfg.bin_ps, n_bins);
  res.analytic = entanglement_fidelity_curve(pc);
  res.period_ps = oscillation_period_ps(res.analytic.tau_ps, res.analytic.f_phi_plus);
  res.peak_phi_minus =
      *std::max_element(res.analytic.f_phi_minus.begin(), res.analytic.f_phi_minus.end());
  res.evolving = res.analytic.f_evolving.front();

  for (std::size_t i = 0; i < res.analytic.tau_ps.size(); ++i) {
    check(res.analytic.f_phi_plus[i] >= -1e-9 && res.analytic.f_phi_plus[i] <= 1.0 + 1e-9,
          "entanglement curve outside [0, 1]");
  }

  if (mc_enabled(cfg)) {
    Rng rng(derive_seed(cfg.seed, 9001));
    const double duration = std::min(cfg.duration_s, 2.0);
    const PairCorrelationSeries series = sample_pair_correlations(
        rng, cfg.source, cfg.detector, cfg.bin_ps, n_bins, duration);
    res.mc = entanglement_fidelity_curve(series, cfg.source, cfg.detector);
  }
  return res;
}

Bb84Result run_bb84(const BenchConfig& cfg, int threads) {
  cfg.validate();
  const MapGrid grid = cfg.map_grid();
  Bb84Result res;
  std::array<CoincidenceMap, 4> maps;
  std::array<Channel, 4> expected{};
  std::array<Window, 4> windows{};
  const auto inputs = bb84_inputs();

  double sum_an = 0.0, sum_mc = 0.0, var_mc = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const RelayScenario scn = cfg.scenario(inputs[i].state, inputs[i].basis);
    MapPair mp = make_maps(cfg, scn, grid, 100 + i, threads);

    TeleportationRun run;
    run.input_name = inputs[i].name;
    run.basis = inputs[i].basis;
    const auto [center, channel] = choose_window_center(
        mp.density, cfg.analysis.window_dt1_ps, cfg.analysis.window_dt2_ps);
    run.expected = channel;
    run.window.dt1_ps = cfg.analysis.window_dt1_ps;
    run.window.dt2_ps = cfg.analysis.window_dt2_ps;
    run.window.center_t2_ps = center;
    run.f_analytic = analytic_window_fidelity(mp.density, run.window, channel);
    check(run.f_analytic >= 0.0 && run.f_analytic <= 1.0, "analytic fidelity outside [0, 1]");
    sum_an += run.f_analytic;

    if (mp.map) {
      run.mc = teleportation_fidelity(*mp.map, run.window, channel);
      check(run.mc.valid(), "empty Monte Carlo window for input " + run.input_name);
      sum_mc += run.mc.value;
      var_mc += run.mc.sigma * run.mc.sigma;
      maps[i] = std::move(*mp.map);
    }
    expected[i] = channel;
    windows[i] = run.window;
    res.runs[i] = run;
  }
  res.mean_analytic = 0.25 * sum_an;
  if (mc_enabled(cfg)) {
    res.mean_mc = 0.25 * sum_mc;
    res.sigma_mc = 0.25 * std::sqrt(var_mc);
    res.sweep = window_sweep(maps, expected, windows);
    res.best = best_flagged_window(res.sweep);
  }
  return res;
}

std::vector<DetuningPoint> run_detuning(const BenchConfig& cfg, int threads) {
  cfg.validate();
  const RelayScenario base = cfg.scenario(PolarizationState::d(), Basis::kDA);
  const double mc_duration = mc_enabled(cfg) ? cfg.duration_s : 0.0;
  auto points = detuning_sweep(base, cfg.analysis.detuning_list_ghz, cfg.map_grid(),
                               cfg.analysis.detuning_window_dt1_ps,
                               cfg.analysis.detuning_window_dt2_ps, mc_duration,
                               derive_seed(cfg.seed, 200), threads);
  for (const auto& p : points) {
    check(p.f_analytic >= 0.0 && p.f_analytic <= 1.0, "detuning fidelity outside [0, 1]");
  }
  return points;
}

OscillationResult run_oscillation(const BenchConfig& cfg, int threads,
                                  double duration_override_s) {
  cfg.validate();
  const int span = cfg.analysis.tomo_span_t2_ps;
  const MapGrid grid = grid_for_span(cfg, span);
  const double omega = cfg.source.fss_uev / constants::hbar_uev_ps;

  BenchConfig local = cfg;
  if (duration_override_s > 0.0) local.duration_s = duration_override_s;

  OscillationResult res;
  const std::array<InputSpec, 2> inputs = {
      InputSpec{"D", PolarizationState::d(), Basis::kDA},
      InputSpec{"R", PolarizationState::r(), Basis::kDA}};
  std::array<OscillationSeries, 2> series;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const RelayScenario scn = local.scenario(inputs[i].state, inputs[i].basis);
    if (mc_enabled(local)) {
      const CoincidenceMap map = mc_coincidence_map(
          scn, grid, derive_seed(local.seed, 300 + i), local.duration_s, threads);
      series[i] = series_from_map(map, local.analysis.osc_bin_t1_ps,
                                  local.analysis.osc_bin_t2_ps, span);
    } else {
      const RateDensity3F density = analytic_threefold_density(scn, grid);
      series[i] = series_from_density(density, local.analysis.osc_bin_t1_ps,
                                      local.analysis.osc_bin_t2_ps, span);
    }
  }
  res.d_series = series[0];
  res.r_series = series[1];
  res.d_fit = fit_oscillation(res.d_series, omega, FreqMode::kFixed);
  res.r_fit = fit_oscillation(res.r_series, omega, FreqMode::kFixed);
  res.d_fit_free = fit_oscillation(res.d_series, omega, FreqMode::kFree);
  res.phase_diff_rad = wrap_phase_diff(res.r_fit.phase_rad - res.d_fit.phase_rad);
  res.period_ps = 2.0 * kPi / res.d_fit_free.angular_freq;
  return res;
}

TomographyRunResult run_tomography_pipeline(const BenchConfig& cfg, int threads) {
  cfg.validate();
  const int span = cfg.analysis.tomo_span_t2_ps;
  const MapGrid grid = grid_for_span(cfg, span);
  const double omega = cfg.source.fss_uev / constants::hbar_uev_ps;
  const int dt1 = cfg.analysis.tomo_window_t1_ps;

  const std::array<InputSpec, 4> inputs = {
      InputSpec{"H", PolarizationState::h(), Basis::kHV},
      InputSpec{"V", PolarizationState::v(), Basis::kHV},
      InputSpec{"D", PolarizationState::d(), Basis::kDA},
      InputSpec{"R", PolarizationState::r(), Basis::kDA}};

  TomographyRunResult res;
  std::array<DensityMatrix1Q, 4> outputs = {
      DensityMatrix1Q::maximally_mixed(), DensityMatrix1Q::maximally_mixed(),
      DensityMatrix1Q::maximally_mixed(), DensityMatrix1Q::maximally_mixed()};

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    // HV projection over the full tomography window
    const RelayScenario scn_hv = cfg.scenario(inputs[i].state, Basis::kHV);
    Window full;
    full.dt1_ps = dt1;
    full.dt2_ps = span;
    full.center_t1_ps = 0;
    full.center_t2_ps = span / 2;
    double p_hv;
    if (mc_enabled(cfg)) {
      const CoincidenceMap map = mc_coincidence_map(
          scn_hv, grid, derive_seed(cfg.seed, 400 + i), cfg.duration_s, threads);
      const FidelityEstimate fe = teleportation_fidelity(map, full, Channel::kD3);
      check(fe.valid(), "tomography: empty HV window");
      p_hv = fe.value;
    } else {
      const RateDensity3F density = analytic_threefold_density(scn_hv, grid);
      p_hv = analytic_window_fidelity(density, full, Channel::kD3);
    }

    // DA-basis oscillation
    const RelayScenario scn_da = cfg.scenario(inputs[i].state, Basis::kDA);
    OscillationSeries series;
    if (mc_enabled(cfg)) {
      const CoincidenceMap map = mc_coincidence_map(
          scn_da, grid, derive_seed(cfg.seed, 450 + i), cfg.duration_s, threads);
      series = series_from_map(map, dt1, cfg.analysis.osc_bin_t2_ps, span);
    } else {
      const RateDensity3F density = analytic_threefold_density(scn_da, grid);
      series = series_from_density(density, dt1, cfg.analysis.osc_bin_t2_ps, span);
    }
    const SinusoidFit fit = fit_or_flat(series, omega);
    res.fits[i] = fit;
    res.p_hv[i] = p_hv;
    outputs[i] = state_tomography_oscillation(fit, p_hv, cfg.phase_offset_rad);
    check(outputs[i].is_physical(1e-8), "tomography output state not physical");
  }

  res.outputs = outputs;
  res.chi = process_tomography(outputs);
  res.chi_xx = res.chi.chi(1, 1).real();
  res.f_process = process_fidelity(res.chi, PauliSet::get(1));
  res.f_avg = average_gate_fidelity(res.f_process);
  check(res.f_process >= 0.0 && res.f_process <= 1.0 + 1e-9,
        "process fidelity outside [0, 1]");
  return res;
}

namespace {

void write_entanglement(const BenchConfig& cfg, const std::string& dir,
                        const EntanglementResult& res, nlohmann::json& summary) {
  auto os = open_out(dir, "entanglement_curve.csv");
  os << "tau_ps,f_phi_plus,f_phi_minus,f_evolving,sigma_mc\n";
  const auto& a = res.analytic;
  for (std::size_t i = 0; i < a.tau_ps.size(); ++i) {
    const double sig = res.mc && i < res.mc->sigma.size() ? res.mc->sigma[i] : 0.0;
    os << num(a.tau_ps[i]) << ',' << num(a.f_phi_plus[i]) << ',' << num(a.f_phi_minus[i])
       << ',' << num(a.f_evolving[i]) << ',' << num(sig) << '\n';
  }
  if (res.mc) {
    auto os2 = open_out(dir, "entanglement_curve_mc.csv");
    os2 << "tau_ps,f_phi_plus,f_phi_minus,f_evolving,sigma\n";
    for (std::size_t i = 0; i < res.mc->tau_ps.size(); ++i) {
      os2 << num(res.mc->tau_ps[i]) << ',' << num(res.mc->f_phi_plus[i]) << ','
          << num(res.mc->f_phi_minus[i]) << ',' << num(res.mc->f_evolving[i]) << ','
          << num(res.mc->sigma[i]) << '\n';
    }
  }
  write_line_chart(std::filesystem::path(dir) / "entanglement_curve.svg",
                   "Pair fidelity vs emission delay", "tau (ps)", "fidelity",
                   {{"Phi+", a.tau_ps, a.f_phi_plus},
                    {"Phi-", a.tau_ps, a.f_phi_minus},
                    {"evolving", a.tau_ps, a.f_evolving}});
  summary["entanglement"] = {{"period_ps", res.period_ps},
                             {"peak_phi_minus", res.peak_phi_minus},
                             {"evolving", res.evolving}};
  (void)cfg;
}

void write_bb84(const BenchConfig& cfg, const std::string& dir, const Bb84Result& res,
                nlohmann::json& summary) {
  {
    auto os = open_out(dir, "bb84_fidelities.csv");
    os << "input,expected_channel,center_t2_ps,f_analytic,f_mc,sigma_mc,n_correct,n_wrong\n";
    for (const auto& run : res.runs) {
      os << run.input_name << ',' << (run.expected == Channel::kD3 ? "D3" : "D4") << ','
         << run.window.center_t2_ps << ',' << num(run.f_analytic) << ',' << num(run.mc.value)
         << ',' << num(run.mc.sigma) << ',' << run.mc.n_correct << ',' << run.mc.n_wrong
         << '\n';
    }
  }
  if (!res.sweep.empty()) {
    auto os = open_out(dir, "bb84_window_sweep.csv");
    os << "sqrt_area_ps,dt1_ps,dt2_ps,mean_f,sigma,min_f,flag\n";
    for (const auto& e : res.sweep) {
      os << num(e.sqrt_area_ps) << ',' << e.dt1_ps << ',' << e.dt2_ps << ',' << num(e.mean_f)
         << ',' << num(e.sigma) << ',' << num(e.min_f) << ',' << (e.all_above_75 ? 1 : 0)
         << '\n';
    }
    PlotSeries pts{"mean fidelity", {}, {}};
    for (const auto& e : res.sweep) {
      pts.x.push_back(e.sqrt_area_ps);
      pts.y.push_back(e.mean_f);
    }
    write_line_chart(std::filesystem::path(dir) / "bb84_sweep.svg",
                     "4-state mean fidelity vs window size", "sqrt window area (ps)",
                     "mean fidelity", {pts});
  }
  nlohmann::json jruns = nlohmann::json::array();
  for (const auto& run : res.runs) {
    jruns.push_back({{"input", run.input_name},
                     {"f_analytic", run.f_analytic},
                     {"f_mc", run.mc.value},
                     {"sigma_mc", run.mc.sigma}});
  }
  summary["bb84"] = {{"runs", jruns},
                     {"mean_analytic", res.mean_analytic},
                     {"mean_mc", res.mean_mc},
                     {"sigma_mc", res.sigma_mc}};
  if (res.best) {
    summary["bb84"]["best_window"] = {{"dt1_ps", res.best->dt1_ps},
                                      {"dt2_ps", res.best->dt2_ps},
                                      {"mean_f", res.best->mean_f},
                                      {"sigma", res.best->sigma}};
  }
  const double mean = mc_enabled(cfg) ? res.mean_mc : res.mean_analytic;
  const ThresholdReport rep = threshold_report(std::clamp(mean, 0.0, 1.0));
  summary["security"] = {{"fidelity", rep.fidelity},
                         {"passes_universal_2_3", rep.passes_universal_2_3},
                         {"passes_4state_75", rep.passes_4state_75},
                         {"passes_6state_724", rep.passes_6state_724},
                         {"passes_ec_80", rep.passes_ec_80},
                         {"secure_bits_per_coincidence", rep.secure_bits_per_coincidence}};
}

void write_detuning(const std::string& dir, const std::vector<DetuningPoint>& points,
                    nlohmann::json& summary) {
  auto os = open_out(dir, "detuning_curve.csv");
  os << "delta_ghz,f,sigma,f_analytic,mc_heralds\n";
  PlotSeries an{"analytic", {}, {}};
  PlotSeries mc{"monte carlo", {}, {}};
  nlohmann::json jp = nlohmann::json::array();
  for (const auto& p : points) {
    os << num(p.delta_ghz) << ',' << num(p.f_mc) << ',' << num(p.sigma_mc) << ','
       << num(p.f_analytic) << ',' << p.mc_heralds << '\n';
    an.x.push_back(p.delta_ghz);
    an.y.push_back(p.f_analytic);
    if (p.mc_heralds > 0) {
      mc.x.push_back(p.delta_ghz);
      mc.y.push_back(p.f_mc);
    }
    jp.push_back({{"delta_ghz", p.delta_ghz},
                  {"f_analytic", p.f_analytic},
                  {"f_mc", p.f_mc},
                  {"sigma_mc", p.sigma_mc}});
  }
  std::vector<PlotSeries> series{an};
  if (!mc.x.empty()) series.push_back(mc);
  write_line_chart(std::filesystem::path(dir) / "detuning_curve.svg",
                   "Input D teleportation fidelity vs laser detuning", "detuning (GHz)",
                   "fidelity", series);
  summary["detuning"] = jp;
}

void write_oscillation(const BenchConfig& cfg, const std::string& dir,
                       const OscillationResult& res, nlohmann::json& summary) {
  {
    auto os = open_out(dir, "oscillation_cut.csv");
    os << "tau2_ps,input,n_first,n_second,fraction\n";
    const auto dump = [&](const char* name, const OscillationSeries& s) {
      for (std::size_t i = 0; i < s.tau2_ps.size(); ++i) {
        const double tot = static_cast<double>(s.n_first[i] + s.n_second[i]);
        const double frac = tot > 0 ? static_cast<double>(s.n_first[i]) / tot : 0.5;
        os << num(s.tau2_ps[i]) << ',' << name << ',' << s.n_first[i] << ',' << s.n_second[i]
           << ',' << num(frac) << '\n';
      }
    };
    dump("D", res.d_series);
    dump("R", res.r_series);
  }
  {
    auto os = open_out(dir, "oscillation_fits.csv");
    os << "input,freq_mode,amplitude,phase_rad,offset,residual_rms,period_ps\n";
    const auto dump = [&](const char* name, const char* mode, const SinusoidFit& f) {
      os << name << ',' << mode << ',' << num(f.amplitude) << ',' << num(f.phase_rad) << ','
         << num(f.offset) << ',' << num(f.residual_rms) << ','
         << num(2.0 * kPi / f.angular_freq) << '\n';
    };
    dump("D", "fixed", res.d_fit);
    dump("R", "fixed", res.r_fit);
    dump("D", "free", res.d_fit_free);
  }
  PlotSeries d{"input D", {}, {}};
  PlotSeries r{"input R", {}, {}};
  for (std::size_t i = 0; i < res.d_series.tau2_ps.size(); ++i) {
    const double tot =
        static_cast<double>(res.d_series.n_first[i] + res.d_series.n_second[i]);
    d.x.push_back(res.d_series.tau2_ps[i]);
    d.y.push_back(tot > 0 ? static_cast<double>(res.d_series.n_first[i]) / tot : 0.5);
  }
  for (std::size_t i = 0; i < res.r_series.tau2_ps.size(); ++i) {
    const double tot =
        static_cast<double>(res.r_series.n_first[i] + res.r_series.n_second[i]);
    r.x.push_back(res.r_series.tau2_ps[i]);
    r.y.push_back(tot > 0 ? static_cast<double>(res.r_series.n_first[i]) / tot : 0.5);
  }
  write_line_chart(std::filesystem::path(dir) / "oscillation_cut.svg",
                   "Teleported-state oscillation along tau2", "tau2 (ps)", "D fraction",
                   {d, r});
  summary["oscillation"] = {{"phase_diff_rad", res.phase_diff_rad},
                            {"period_ps", res.period_ps},
                            {"d_amplitude", res.d_fit.amplitude},
                            {"r_amplitude", res.r_fit.amplitude}};
  (void)cfg;
}

void write_map_csv(const std::string& dir, const std::string& name,
                   const CoincidenceMap& map) {
  auto os = open_out(dir, name);
  os << "i_t1,i_t2,d3,d4\n";
  for (int i1 = 0; i1 < map.grid.n1(); ++i1) {
    for (int i2 = 0; i2 < map.grid.n2(); ++i2) {
      os << i1 << ',' << i2 << ',' << map.at(0, i1, i2) << ',' << map.at(1, i1, i2) << '\n';
    }
  }
}

void write_tomography(const std::string& dir, const TomographyRunResult& res,
                      nlohmann::json& summary) {
  {
    auto os = open_out(dir, "tomography_fits.csv");
    os << "input,amplitude,phase_rad,offset,residual_rms,p_hv\n";
    const char* names[4] = {"H", "V", "D", "R"};
    for (int i = 0; i < 4; ++i) {
      const auto& f = res.fits[static_cast<std::size_t>(i)];
      os << names[i] << ',' << num(f.amplitude) << ',' << num(f.phase_rad) << ','
         << num(f.offset) << ',' << num(f.residual_rms) << ','
         << num(res.p_hv[static_cast<std::size_t>(i)]) << '\n';
    }
  }
  {
    auto os = open_out(dir, "output_states.csv");
    os << "input,s_x,s_y,s_z\n";
    const char* names[4] = {"H", "V", "D", "R"};
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d s = res.outputs[static_cast<std::size_t>(i)].bloch();
      os << names[i] << ',' << num(s[0]) << ',' << num(s[1]) << ',' << num(s[2]) << '\n';
    }
  }
  {
    auto os = open_out(dir, "chi_matrix.csv");
    os << "m,n,re,im\n";
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        os << m << ',' << n << ',' << num(res.chi.chi(m, n).real()) << ','
           << num(res.chi.chi(m, n).imag()) << '\n';
      }
    }
  }
  summary["tomography"] = {{"chi_xx", res.chi_xx},
                           {"process_fidelity", res.f_process},
                           {"average_gate_fidelity", res.f_avg}};
}

void write_landscape(const std::string& dir, const FidelityLandscape& ls,
                     nlohmann::json& summary) {
  {
    auto os = open_out(dir, "landscape.csv");
    os << "theta_rad,phi_rad,fidelity\n";
    for (int it = 0; it < ls.n_theta; ++it) {
      for (int ip = 0; ip < ls.n_phi; ++ip) {
        os << num(ls.theta_rad[static_cast<std::size_t>(it)]) << ','
           << num(ls.phi_rad[static_cast<std::size_t>(ip)]) << ',' << num(ls.at(it, ip))
           << '\n';
      }
    }
  }
  write_heatmap(std::filesystem::path(dir) / "landscape.svg",
                "Relay fidelity over pure input states", "phi (rad)", "theta (rad)",
                ls.n_theta, ls.n_phi, ls.f, 0.0, 2.0 * kPi, 0.0, kPi);
  double polar = 1.0;
  for (int ip = 0; ip < ls.n_phi; ++ip) {
    polar = std::min({polar, ls.at(0, ip), ls.at(ls.n_theta - 1, ip)});
  }
  summary["landscape"] = {{"min_f", ls.min_f}, {"max_f", ls.max_f}, {"polar_min_f", polar}};
}

}  // namespace

int run_scenario(const std::string& name, const BenchConfig& cfg, const std::string& out_dir,
                 int threads) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  nlohmann::json summary;
  summary["scenario"] = name;
  summary["seed"] = cfg.seed;
  summary["backend"] = backend_name(cfg.backend);

  if (name == "entanglement") {
    write_entanglement(cfg, out_dir, run_entanglement(cfg), summary);
  } else if (name == "bb84-sweep") {
    write_bb84(cfg, out_dir, run_bb84(cfg, threads), summary);
  } else if (name == "detuning") {
    write_detuning(out_dir, run_detuning(cfg, threads), summary);
  } else if (name == "oscillation") {
    const OscillationResult res = run_oscillation(cfg, threads);
    write_oscillation(cfg, out_dir, res, summary);
    if (mc_enabled(cfg)) {
      const RelayScenario scn = cfg.scenario(PolarizationState::d(), Basis::kDA);
      const MapGrid grid = grid_for_span(cfg, cfg.analysis.tomo_span_t2_ps);
      const CoincidenceMap map =
          mc_coincidence_map(scn, grid, derive_seed(cfg.seed, 300), cfg.duration_s, threads);
      write_map_csv(out_dir, "oscillation_map.csv", map);
    }
  } else if (name == "tomography") {
    write_tomography(out_dir, run_tomography_pipeline(cfg, threads), summary);
  } else if (name == "landscape") {
    const TomographyRunResult res = run_tomography_pipeline(cfg, threads);
    write_tomography(out_dir, res, summary);
    write_landscape(out_dir, fidelity_landscape(res.chi, 61, 120), summary);
  } else if (name == "full-report") {
    write_entanglement(cfg, out_dir, run_entanglement(cfg), summary);
    write_bb84(cfg, out_dir, run_bb84(cfg, threads), summary);
    write_detuning(out_dir, run_detuning(cfg, threads), summary);
    const OscillationResult osc = run_oscillation(cfg, threads);
    write_oscillation(cfg, out_dir, osc, summary);
    const TomographyRunResult tomo = run_tomography_pipeline(cfg, threads);
    write_tomography(out_dir, tomo, summary);
    write_landscape(out_dir, fidelity_landscape(tomo.chi, 61, 120), summary);
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }

  auto os = open_out(out_dir, "summary.json");
  os << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace qrelay
