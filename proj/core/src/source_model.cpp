#include "qrelay/source_model.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {
constexpr double kTwoPi = 6.283185307179586;

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

// sin(x)/x, stable near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}
}  // namespace

void QdSourceParams::validate() const {
  require(fss_uev >= 0.0, "QdSourceParams: fss_ueV < 0");
  require(coh2x_ps >= 0.0, "QdSourceParams: coh2x_ps < 0");
  require(x_lifetime_ps >= 0.0, "QdSourceParams: x_lifetime_ps < 0");
  require(pair_rate_cps >= 0.0, "QdSourceParams: pair_rate_cps < 0");
  require(depolarization >= 0.0 && depolarization <= 1.0,
          "QdSourceParams: depolarization outside [0, 1]");
  require(linewidth_ghz >= 0.0, "QdSourceParams: linewidth_ghz < 0");
}

void LaserParams::validate() const {
  require(linewidth_khz >= 0.0, "LaserParams: linewidth_khz < 0");
  require(intensity_ratio >= 0.0, "LaserParams: intensity_ratio < 0");
}

void DetectorParams::validate() const {
  require(jitter_fwhm_ps >= 0.0, "DetectorParams: jitter_fwhm_ps < 0");
  require(dark_cps >= 0.0, "DetectorParams: dark_cps < 0");
  require(efficiency >= 0.0 && efficiency <= 1.0,
          "DetectorParams: efficiency outside [0, 1]");
  require(extinction_ratio_db >= 0.0, "DetectorParams: extinction_ratio_db < 0");
}

double DetectorParams::extinction_leak() const {
  return std::pow(10.0, -extinction_ratio_db / 10.0);
}

void CouplerParams::validate() const {
  require(split_ratio > 0.0 && split_ratio < 1.0,
          "CouplerParams: split_ratio outside (0, 1)");
}

TwoQubitState mixed_pair_state(double tau_ps, const QdSourceParams& src) {
  src.validate();
  const double lambda = src.depolarization;
  const Matrix4c pure = entangled_pair_state(tau_ps, src.fss_uev).matrix();
  Matrix4c m = (1.0 - lambda) * pure + (lambda / 4.0) * Matrix4c::Identity();
  return TwoQubitState(m);
}

std::vector<PairEmission> sample_pair_emissions(Rng& rng, const QdSourceParams& src,
                                                double duration_s) {
  src.validate();
  require(duration_s > 0.0, "sample_pair_emissions: duration <= 0");
  std::vector<PairEmission> out;
  if (src.pair_rate_cps <= 0.0) return out;

  const double duration_ps = duration_s * 1e12;
  // Refractory gap after each cascade: the dot must be re-excited, so two 2X
  // emissions cannot fall inside one coincidence window.
  const double dead_ps = 5.0 * src.x_lifetime_ps;
  const double mean_gap_ps = 1e12 / src.pair_rate_cps;
  require(mean_gap_ps > dead_ps, "sample_pair_emissions: rate too high for dead time");
  const double exp_mean_ps = mean_gap_ps - dead_ps;

  out.reserve(static_cast<std::size_t>(duration_s * src.pair_rate_cps * 1.05) + 16);
  double t = rng.exponential(exp_mean_ps);
  while (t < duration_ps) {
    PairEmission e;
    e.t_2x_ps = t;
    e.t_x_ps = t + rng.exponential(src.x_lifetime_ps);
    out.push_back(e);
    t += dead_ps + rng.exponential(exp_mean_ps);
  }
  return out;
}

double pairwise_indistinguishability(double dt_ps, const LaserParams& laser,
                                     const QdSourceParams& src) {
  if (src.coh2x_ps <= 0.0) return 0.0;
  const double omega = kTwoPi * laser.detuning_ghz * 1e-3;  // rad / ps
  return std::exp(-std::abs(dt_ps) / src.coh2x_ps) * std::cos(omega * dt_ps);
}

double hom_visibility(double tau1_ps, const LaserParams& laser, const QdSourceParams& src,
                      const DetectorParams& det, double g) {
  src.validate();
  laser.validate();
  det.validate();
  require(g >= 0.0, "hom_visibility: g < 0");

  const double v0 = (g > 0.0) ? 2.0 * g / (1.0 + g * g) : 0.0;
  const double sigma = det.cross_sigma_ps();
  if (sigma <= 0.0) {
    return v0 * pairwise_indistinguishability(tau1_ps, laser, src);
  }
  // Dense symmetric trapezoid over the jitter kernel; a fixed symmetric grid
  // keeps V exactly even in tau1 when the detuning is zero.
  const double half = 8.0 * sigma;
  const int n = 1200;
  const double step = 2.0 * half / n;
  double acc = 0.0;
  double wsum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = -half + i * step;
    double w = std::exp(-0.5 * (s / sigma) * (s / sigma));
    if (i == 0 || i == n) w *= 0.5;
    acc += w * pairwise_indistinguishability(tau1_ps - s, laser, src);
    wsum += w;
  }
  return v0 * acc / wsum;
}

TimeTagStream dark_count_stream(Rng& rng, const DetectorParams& det, double duration_s) {
  det.validate();
  require(duration_s > 0.0, "dark_count_stream: duration <= 0");
  TimeTagStream tags;
  if (det.dark_cps <= 0.0) return tags;
  const double duration_ps = duration_s * 1e12;
  const double mean_gap_ps = 1e12 / det.dark_cps;
  for (int ch = 0; ch < 4; ++ch) {
    double t = rng.exponential(mean_gap_ps);
    while (t < duration_ps) {
      tags.push_back({static_cast<Channel>(ch), static_cast<std::int64_t>(std::llround(t))});
      t += rng.exponential(mean_gap_ps);
    }
  }
  sort_tags(tags);
  return tags;
}

double oscillation_smear(double omega_rad_per_ps, const DetectorParams& det, int bin_ps) {
  const double sigma = det.cross_sigma_ps();
  return std::exp(-0.5 * omega_rad_per_ps * omega_rad_per_ps * sigma * sigma) *
         sinc(0.5 * omega_rad_per_ps * bin_ps);
}

PairCorrelations analytic_pair_correlations(const QdSourceParams& src,
                                            const DetectorParams& det, int bin_ps,
                                            int n_bins, double tau_start_ps) {
  src.validate();
  det.validate();
  require(bin_ps > 0 && n_bins > 0, "analytic_pair_correlations: bad grid");
  const double lambda = src.depolarization;
  const double omega = src.fss_uev / constants::hbar_uev_ps;
  // Jitter convolution and bin integration each damp the oscillating
  // correlations; the HV correlation carries no phase and is untouched.
  const double damp = oscillation_smear(omega, det, bin_ps);

  PairCorrelations pc;
  pc.bin_ps = bin_ps;
  pc.omega_rad_per_ps = omega;
  pc.smear = damp;
  pc.tau_ps.resize(n_bins);
  pc.c_hv.resize(n_bins);
  pc.c_da.resize(n_bins);
  pc.c_rl.resize(n_bins);
  for (int i = 0; i < n_bins; ++i) {
    const double tau = tau_start_ps + (i + 0.5) * bin_ps;
    pc.tau_ps[i] = tau;
    pc.c_hv[i] = 1.0 - lambda;
    pc.c_da[i] = (1.0 - lambda) * damp * std::cos(omega * tau);
    pc.c_rl[i] = -(1.0 - lambda) * damp * std::cos(omega * tau);
  }
  return pc;
}

PairCorrelationSeries sample_pair_correlations(Rng& rng, const QdSourceParams& src,
                                               const DetectorParams& det, int bin_ps,
                                               int n_bins, double duration_s,
                                               double tau_start_ps) {
  src.validate();
  det.validate();
  require(bin_ps > 0 && n_bins > 0, "sample_pair_correlations: bad grid");

  PairCorrelationSeries s;
  s.bin_ps = bin_ps;
  s.tau_ps.resize(n_bins);
  for (int i = 0; i < n_bins; ++i) s.tau_ps[i] = tau_start_ps + (i + 0.5) * bin_ps;
  for (auto& v : s.n_same) v.assign(n_bins, 0);
  for (auto& v : s.n_diff) v.assign(n_bins, 0);

  const auto pairs = sample_pair_emissions(rng, src, duration_s);
  const double lambda = src.depolarization;
  const double omega = src.fss_uev / constants::hbar_uev_ps;
  const double sig = det.cross_sigma_ps();
  const double leak = det.extinction_leak();

  std::size_t index = 0;
  for (const auto& p : pairs) {
    // Both photons must be detected; bases are cycled round-robin, standing
    // in for the three separate acquisition runs.
    if (!rng.bernoulli(det.efficiency) || !rng.bernoulli(det.efficiency)) continue;
    const int basis = static_cast<int>(index++ % 3);
    const double delay = p.t_x_ps - p.t_2x_ps;
    const double measured = delay + (sig > 0.0 ? rng.normal(sig) : 0.0);
    const int bin = static_cast<int>(std::floor((measured - tau_start_ps) / bin_ps));
    if (bin < 0 || bin >= n_bins) continue;

    double p_same;
    const double c = std::cos(omega * delay);
    switch (static_cast<Basis>(basis)) {
      case Basis::kHV: p_same = (1.0 - lambda) + lambda * 0.5; break;
      case Basis::kDA: p_same = (1.0 - lambda) * 0.5 * (1.0 + c) + lambda * 0.5; break;
      case Basis::kRL:
      default: p_same = (1.0 - lambda) * 0.5 * (1.0 - c) + lambda * 0.5; break;
    }
    // Analyzer leakage on either arm flips the joint parity.
    const double flip = 2.0 * leak * (1.0 - leak);
    p_same = p_same * (1.0 - 2.0 * flip) + flip;
    if (rng.bernoulli(p_same)) {
      ++s.n_same[static_cast<std::size_t>(basis)][static_cast<std::size_t>(bin)];
    } else {
      ++s.n_diff[static_cast<std::size_t>(basis)][static_cast<std::size_t>(bin)];
    }
  }
  return s;
}

}  // namespace qrelay
