#include "qrelay/coincidence.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qrelay {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kSegmentSeconds = 0.125;

struct BinRect {
  int lo1 = 0;
  int n1 = 0;
  int lo2 = 0;
  int n2 = 0;
};

BinRect window_rect(const MapGrid& g, const Window& w) {
  if (w.dt1_ps <= 0 || w.dt2_ps <= 0 || w.dt1_ps % g.bin_ps != 0 || w.dt2_ps % g.bin_ps != 0) {
    throw std::domain_error("Window: extents must be positive multiples of bin_ps");
  }
  BinRect r;
  r.n1 = w.dt1_ps / g.bin_ps;
  r.n2 = w.dt2_ps / g.bin_ps;
  r.lo1 = static_cast<int>(std::lround((w.center_t1_ps - 0.5 * w.dt1_ps - g.t1_min_ps) /
                                       static_cast<double>(g.bin_ps)));
  r.lo2 = static_cast<int>(std::lround((w.center_t2_ps - 0.5 * w.dt2_ps - g.t2_min_ps) /
                                       static_cast<double>(g.bin_ps)));
  if (r.lo1 < 0 || r.lo2 < 0 || r.lo1 + r.n1 > g.n1() || r.lo2 + r.n2 > g.n2()) {
    throw std::domain_error("Window: outside the map");
  }
  return r;
}

double binomial_sigma(double f, double n) {
  if (n <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, f * (1.0 - f)) / n);
}

// Linear least squares of  a cos(omega t) + b sin(omega t)  on (t, y, w).
std::pair<double, double> quadrature_fit(const std::vector<double>& t,
                                         const std::vector<double>& y,
                                         const std::vector<double>& w, double omega) {
  double scc = 0.0, sss = 0.0, scs = 0.0, syc = 0.0, sys = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double c = std::cos(omega * t[i]);
    const double s = std::sin(omega * t[i]);
    scc += w[i] * c * c;
    sss += w[i] * s * s;
    scs += w[i] * c * s;
    syc += w[i] * y[i] * c;
    sys += w[i] * y[i] * s;
  }
  const double det = scc * sss - scs * scs;
  if (std::abs(det) < 1e-30) return {0.0, 0.0};
  return {(syc * sss - sys * scs) / det, (sys * scc - syc * scs) / det};
}

}  // namespace

std::int64_t CoincidenceMap::total() const {
  std::int64_t n = 0;
  for (const auto& sheet : counts) {
    for (const auto c : sheet) n += c;
  }
  return n;
}

void CoincidenceMap::add(const CoincidenceMap& other) {
  if (other.grid.bin_ps != grid.bin_ps || other.counts[0].size() != counts[0].size() ||
      other.grid.t1_min_ps != grid.t1_min_ps || other.grid.t2_min_ps != grid.t2_min_ps) {
    throw std::invalid_argument("CoincidenceMap::add: grid mismatch");
  }
  for (int q = 0; q < 2; ++q) {
    auto& dst = counts[static_cast<std::size_t>(q)];
    const auto& srcv = other.counts[static_cast<std::size_t>(q)];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += srcv[i];
  }
}

CoincidenceMap build_threefold_map(const TimeTagStream& tags, const MapGrid& grid) {
  grid.validate();
  if (!is_sorted_stream(tags)) {
    throw std::invalid_argument("build_threefold_map: tags not sorted");
  }

  CoincidenceMap map;
  map.grid = grid;
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  map.counts[0].assign(static_cast<std::size_t>(n1 * n2), 0);
  map.counts[1].assign(static_cast<std::size_t>(n1 * n2), 0);

  std::vector<std::int64_t> d1, d2;
  std::vector<std::pair<std::int64_t, int>> bob;  // (t, outcome)
  for (const auto& tag : tags) {
    switch (tag.channel) {
      case Channel::kD1: d1.push_back(tag.t_ps); break;
      case Channel::kD2: d2.push_back(tag.t_ps); break;
      case Channel::kD3: bob.emplace_back(tag.t_ps, 0); break;
      case Channel::kD4: bob.emplace_back(tag.t_ps, 1); break;
    }
  }

  std::size_t d2_lo = 0, d2_hi = 0, b_lo = 0, b_hi = 0;
  for (const auto t1 : d1) {
    while (d2_lo < d2.size() && d2[d2_lo] < t1 + grid.t1_min_ps) ++d2_lo;
    if (d2_hi < d2_lo) d2_hi = d2_lo;
    while (d2_hi < d2.size() && d2[d2_hi] < t1 + grid.t1_max_ps) ++d2_hi;
    while (b_lo < bob.size() && bob[b_lo].first < t1 + grid.t2_min_ps) ++b_lo;
    if (b_hi < b_lo) b_hi = b_lo;
    while (b_hi < bob.size() && bob[b_hi].first < t1 + grid.t2_max_ps) ++b_hi;
    if (d2_lo == d2_hi || b_lo == b_hi) continue;

    for (std::size_t k = d2_lo; k < d2_hi; ++k) {
      const int i1 = static_cast<int>((d2[k] - t1 - grid.t1_min_ps) / grid.bin_ps);
      for (std::size_t m = b_lo; m < b_hi; ++m) {
        const int i2 = static_cast<int>((bob[m].first - t1 - grid.t2_min_ps) / grid.bin_ps);
        ++map.counts[static_cast<std::size_t>(bob[m].second)]
                    [static_cast<std::size_t>(i1 * n2 + i2)];
      }
    }
  }
  return map;
}

FidelityEstimate teleportation_fidelity(const CoincidenceMap& map, const Window& win,
                                        Channel expected_outcome) {
  const BinRect r = window_rect(map.grid, win);
  const int expected = expected_outcome == Channel::kD3 ? 0 : 1;
  if (expected_outcome != Channel::kD3 && expected_outcome != Channel::kD4) {
    throw std::domain_error("teleportation_fidelity: expected outcome must be D3 or D4");
  }
  std::int64_t n_exp = 0, n_other = 0;
  for (int i1 = r.lo1; i1 < r.lo1 + r.n1; ++i1) {
    for (int i2 = r.lo2; i2 < r.lo2 + r.n2; ++i2) {
      n_exp += map.at(expected, i1, i2);
      n_other += map.at(1 - expected, i1, i2);
    }
  }
  FidelityEstimate est;
  est.n_correct = n_exp;
  est.n_wrong = n_other;
  const auto n = n_exp + n_other;
  if (n > 0) {
    est.value = static_cast<double>(n_exp) / static_cast<double>(n);
    est.sigma = binomial_sigma(est.value, static_cast<double>(n));
  }
  return est;
}

double analytic_window_fidelity(const RateDensity3F& density, const Window& win,
                                Channel expected_outcome) {
  const BinRect r = window_rect(density.grid, win);
  const int expected = expected_outcome == Channel::kD3 ? 0 : 1;
  double m_exp = 0.0, m_other = 0.0;
  for (int i1 = r.lo1; i1 < r.lo1 + r.n1; ++i1) {
    for (int i2 = r.lo2; i2 < r.lo2 + r.n2; ++i2) {
      m_exp += density.at(expected, i1, i2);
      m_other += density.at(1 - expected, i1, i2);
    }
  }
  const double total = m_exp + m_other;
  return total > 0.0 ? m_exp / total : 0.0;
}

std::pair<int, Channel> choose_window_center(const RateDensity3F& density, int dt1_ps,
                                             int dt2_ps, int center_t1_ps, int t2_floor_ps) {
  const MapGrid& g = density.grid;
  const int nb2 = dt2_ps / g.bin_ps;
  double best = -1.0;
  int best_center = 0;
  Channel best_channel = Channel::kD3;
  for (int lo2 = 0; lo2 + nb2 <= g.n2(); ++lo2) {
    const double center = g.t2_min_ps + (lo2 + 0.5 * nb2) * g.bin_ps;
    if (center < t2_floor_ps) continue;
    Window w;
    w.dt1_ps = dt1_ps;
    w.dt2_ps = dt2_ps;
    w.center_t1_ps = center_t1_ps;
    w.center_t2_ps = static_cast<int>(std::lround(center));
    BinRect r{};
    try {
      r = window_rect(g, w);
    } catch (const std::domain_error&) {
      continue;
    }
    double d3 = 0.0, d4 = 0.0;
    for (int i1 = r.lo1; i1 < r.lo1 + r.n1; ++i1) {
      for (int i2 = r.lo2; i2 < r.lo2 + r.n2; ++i2) {
        d3 += density.at(0, i1, i2);
        d4 += density.at(1, i1, i2);
      }
    }
    const double excess = std::abs(d3 - d4);
    if (excess > best) {
      best = excess;
      best_center = w.center_t2_ps;
      best_channel = d3 >= d4 ? Channel::kD3 : Channel::kD4;
    }
  }
  return {best_center, best_channel};
}

std::vector<SweepEntry> window_sweep(const std::array<CoincidenceMap, 4>& maps,
                                     const std::array<Channel, 4>& expected,
                                     const std::array<Window, 4>& base_windows) {
  const MapGrid& g = maps[0].grid;
  std::vector<SweepEntry> out;
  for (int dt1 = g.bin_ps; dt1 <= g.t1_max_ps - g.t1_min_ps; dt1 += g.bin_ps) {
    for (int dt2 = g.bin_ps; dt2 <= g.t2_max_ps - g.t2_min_ps; dt2 += g.bin_ps) {
      SweepEntry e;
      e.dt1_ps = dt1;
      e.dt2_ps = dt2;
      e.sqrt_area_ps = std::sqrt(static_cast<double>(dt1) * dt2);
      double sum_f = 0.0;
      double sum_var = 0.0;
      double min_f = 1.0;
      std::int64_t n_total = 0;
      bool ok = true;
      bool fits = true;
      for (int m = 0; m < 4 && fits; ++m) {
        Window w = base_windows[static_cast<std::size_t>(m)];
        w.dt1_ps = dt1;
        w.dt2_ps = dt2;
        FidelityEstimate fe;
        try {
          fe = teleportation_fidelity(maps[static_cast<std::size_t>(m)], w,
                                      expected[static_cast<std::size_t>(m)]);
        } catch (const std::domain_error&) {
          fits = false;
          break;
        }
        if (!fe.valid()) {
          fits = false;
          break;
        }
        sum_f += fe.value;
        sum_var += fe.sigma * fe.sigma;
        min_f = std::min(min_f, fe.value);
        n_total += fe.n_correct + fe.n_wrong;
        ok = ok && fe.value > 0.75;
      }
      if (!fits) continue;
      e.n_total = n_total;
      e.mean_f = 0.25 * sum_f;
      e.sigma = 0.25 * std::sqrt(sum_var);
      e.min_f = min_f;
      e.all_above_75 = ok;
      out.push_back(e);
    }
  }
  return out;
}

std::optional<SweepEntry> best_flagged_window(const std::vector<SweepEntry>& sweep) {
  std::optional<SweepEntry> best;
  double best_sig = -1.0;
  for (const auto& e : sweep) {
    if (!e.all_above_75 || e.sigma <= 0.0) continue;
    const double sig = (e.mean_f - 0.75) / e.sigma;
    if (sig > best_sig) {
      best_sig = sig;
      best = e;
    }
  }
  return best;
}

std::vector<DetuningPoint> detuning_sweep(const RelayScenario& base,
                                          const std::vector<double>& deltas_ghz,
                                          const MapGrid& grid, int dt1_ps, int dt2_ps,
                                          double mc_duration_s, std::uint64_t seed,
                                          int threads) {
  std::vector<DetuningPoint> out;
  out.reserve(deltas_ghz.size());
  for (std::size_t i = 0; i < deltas_ghz.size(); ++i) {
    RelayScenario scn = base;
    scn.input_state = PolarizationState::d();
    scn.bob_basis = Basis::kDA;
    scn.laser.detuning_ghz = deltas_ghz[i];

    const RateDensity3F density = analytic_threefold_density(scn, grid);
    const auto [center, channel] = choose_window_center(density, dt1_ps, dt2_ps);
    Window w;
    w.dt1_ps = dt1_ps;
    w.dt2_ps = dt2_ps;
    w.center_t2_ps = center;

    DetuningPoint p;
    p.delta_ghz = deltas_ghz[i];
    p.f_analytic = analytic_window_fidelity(density, w, channel);
    if (mc_duration_s > 0.0) {
      const CoincidenceMap map =
          mc_coincidence_map(scn, grid, derive_seed(seed, i), mc_duration_s, threads);
      const FidelityEstimate fe = teleportation_fidelity(map, w, channel);
      p.f_mc = fe.value;
      p.sigma_mc = fe.sigma;
      p.mc_heralds = map.total();
    }
    out.push_back(p);
  }
  return out;
}

EntanglementCurve entanglement_fidelity_curve(const PairCorrelations& pc) {
  EntanglementCurve curve;
  curve.tau_ps = pc.tau_ps;
  const std::size_t n = pc.tau_ps.size();
  curve.f_phi_plus.resize(n);
  curve.f_phi_minus.resize(n);
  curve.f_evolving.resize(n);
  curve.sigma.assign(n, 0.0);

  std::vector<double> osc(n), weights(n, 1.0);
  double c_hv_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    curve.f_phi_plus[i] =
        entanglement_fidelity_from_correlations(pc.c_hv[i], pc.c_da[i], pc.c_rl[i],
                                                BellTarget::kPhiPlus).value;
    curve.f_phi_minus[i] =
        entanglement_fidelity_from_correlations(pc.c_hv[i], pc.c_da[i], pc.c_rl[i],
                                                BellTarget::kPhiMinus).value;
    osc[i] = 0.5 * (pc.c_da[i] - pc.c_rl[i]);
    c_hv_mean += pc.c_hv[i];
  }
  c_hv_mean /= static_cast<double>(n);

  // Co-rotating target: remove the known jitter/bin response from the
  // oscillation amplitude so the curve reports the source-state fidelity.
  const auto [a, b] = quadrature_fit(pc.tau_ps, osc, weights, pc.omega_rad_per_ps);
  const double amp = std::hypot(a, b) / std::max(1e-12, pc.smear);
  const double f_ev = 0.25 * (1.0 + c_hv_mean) + 0.5 * amp;
  for (std::size_t i = 0; i < n; ++i) curve.f_evolving[i] = f_ev;
  return curve;
}

EntanglementCurve entanglement_fidelity_curve(const PairCorrelationSeries& series,
                                              const QdSourceParams& src,
                                              const DetectorParams& det) {
  const std::size_t n = series.tau_ps.size();
  PairCorrelations pc;
  pc.bin_ps = series.bin_ps;
  pc.tau_ps = series.tau_ps;
  pc.omega_rad_per_ps = src.fss_uev / constants::hbar_uev_ps;
  pc.smear = oscillation_smear(pc.omega_rad_per_ps, det, series.bin_ps);
  pc.c_hv.resize(n);
  pc.c_da.resize(n);
  pc.c_rl.resize(n);

  std::vector<double> var(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum_var = 0.0;
    for (int basis = 0; basis < 3; ++basis) {
      const auto s = static_cast<double>(series.n_same[static_cast<std::size_t>(basis)][i]);
      const auto d = static_cast<double>(series.n_diff[static_cast<std::size_t>(basis)][i]);
      const double tot = s + d;
      const double c = tot > 0.0 ? (s - d) / tot : 0.0;
      const double p = tot > 0.0 ? s / tot : 0.5;
      sum_var += tot > 0.0 ? 4.0 * p * (1.0 - p) / tot : 1.0;
      switch (static_cast<Basis>(basis)) {
        case Basis::kHV: pc.c_hv[i] = c; break;
        case Basis::kDA: pc.c_da[i] = c; break;
        case Basis::kRL: pc.c_rl[i] = c; break;
      }
    }
    var[i] = sum_var / 16.0;
  }
  EntanglementCurve curve = entanglement_fidelity_curve(pc);
  for (std::size_t i = 0; i < n; ++i) curve.sigma[i] = std::sqrt(var[i]);
  return curve;
}

double oscillation_period_ps(const std::vector<double>& tau_ps,
                             const std::vector<double>& values) {
  if (tau_ps.size() < 8 || tau_ps.size() != values.size()) {
    throw std::domain_error("oscillation_period_ps: need at least 8 samples");
  }
  const std::size_t n = tau_ps.size();
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(n);

  const double span = tau_ps.back() - tau_ps.front();
  const double dt = span / static_cast<double>(n - 1);
  const double f_min = 1.0 / span;
  const double f_max = 0.5 / dt;
  const double df = 1.0 / (8.0 * span);

  // Hann taper keeps spectral leakage from biasing the peak location when
  // the span holds a non-integer number of cycles.
  std::vector<double> taper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (tau_ps[i] - tau_ps.front()) / span;
    taper[i] = 0.5 - 0.5 * std::cos(kTwoPi * u);
  }

  auto power = [&](double f) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ph = kTwoPi * f * tau_ps[i];
      const double v = (values[i] - mean) * taper[i];
      re += v * std::cos(ph);
      im += v * std::sin(ph);
    }
    return re * re + im * im;
  };

  double best_f = f_min;
  double best_p = -1.0;
  for (double f = f_min; f <= f_max; f += df) {
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  // parabolic refinement on the periodogram peak
  const double pl = power(best_f - df);
  const double pr = power(best_f + df);
  const double denom = pl - 2.0 * best_p + pr;
  double f_hat = best_f;
  if (std::abs(denom) > 1e-30) {
    f_hat = best_f + 0.5 * df * (pl - pr) / denom;
  }
  return 1.0 / f_hat;
}

CoincidenceMap mc_coincidence_map(const RelayScenario& scn, const MapGrid& grid,
                                  std::uint64_t seed, double duration_s, int threads) {
  scn.validate();
  grid.validate();
  if (duration_s <= 0.0) throw std::domain_error("mc_coincidence_map: duration <= 0");

  const int n_seg = static_cast<int>(std::ceil(duration_s / kSegmentSeconds));
  std::vector<CoincidenceMap> partials(static_cast<std::size_t>(n_seg));
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_seg) return;
      const double seg = std::min(kSegmentSeconds, duration_s - i * kSegmentSeconds);
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      const TimeTagStream tags = simulate_time_tags(rng, scn, seg);
      partials[static_cast<std::size_t>(i)] = build_threefold_map(tags, grid);
    }
  };

  const int n_threads = std::max(1, std::min(threads, n_seg));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CoincidenceMap out = std::move(partials.front());
  for (std::size_t i = 1; i < partials.size(); ++i) out.add(partials[i]);
  return out;
}

}  // namespace qrelay
