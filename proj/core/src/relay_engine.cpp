#include "qrelay/relay_engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {

constexpr double kPsPerSecond = 1e12;
constexpr double kRefractoryLifetimes = 5.0;

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

// Nodes (z, p) with sum(p) = 1 approximating E[f(Z)], Z ~ N(0,1), derived
// from the Hermite Jacobi matrix.
std::vector<std::pair<double, double>> gauss_hermite_unit(int n) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(0.5 * k);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  std::vector<std::pair<double, double>> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double w = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    nodes[static_cast<std::size_t>(i)] = {std::sqrt(2.0) * es.eigenvalues()(i), w};
  }
  return nodes;
}

// P-outcome probability of the heralded X photon as a function of the true
// sibling delay E:  p(E) = a + b cos(om E - phi0) + c sin(om E - phi0).
struct BornCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

BornCoeffs apply_noise(BornCoeffs raw, double lambda, double leak) {
  BornCoeffs out;
  out.a = leak + (1.0 - 2.0 * leak) * ((1.0 - lambda) * raw.a + 0.5 * lambda);
  out.b = (1.0 - 2.0 * leak) * (1.0 - lambda) * raw.b;
  out.c = (1.0 - 2.0 * leak) * (1.0 - lambda) * raw.c;
  return out;
}

// Coherent-herald output |s(E)> = c_V e^{i(phi0 - om E)} |H> + c_H |V>.
BornCoeffs coherent_coeffs(const Vector2c& basis_vec, Complex c_h, Complex c_v) {
  const Complex ph = basis_vec(0);
  const Complex pv = basis_vec(1);
  const double u = std::norm(ph) * std::norm(c_v) + std::norm(pv) * std::norm(c_h);
  const Complex w = 2.0 * std::conj(ph) * pv * c_v * std::conj(c_h);
  return {u, w.real(), w.imag()};
}

// Cumulative integrals of the jitter-convolved sibling-delay envelope and
// its phase-weighted variants, on a 1 ps grid.
struct Envelopes {
  double y0 = 0.0;
  double dy = 1.0;
  std::vector<double> c0, cc, cs;

  double lookup(const std::vector<double>& c, double y) const {
    const double idx = (y - y0) / dy;
    if (idx <= 0.0) return c.front();
    if (idx >= static_cast<double>(c.size() - 1)) return c.back();
    const auto k = static_cast<std::size_t>(idx);
    const double frac = idx - static_cast<double>(k);
    return c[k] + frac * (c[k + 1] - c[k]);
  }
  // integral of family f over [lo, hi)
  double mass(const std::vector<double>& c, double lo, double hi) const {
    return lookup(c, hi) - lookup(c, lo);
  }
};

Envelopes build_envelopes(double omega, double phi0, double x_lifetime_ps, double sigma_ps,
                          double ymin, double ymax) {
  Envelopes env;
  env.y0 = ymin;
  const auto n = static_cast<std::size_t>(std::ceil(ymax - ymin)) + 1;
  std::vector<double> g0(n, 0.0), gc(n, 0.0), gs(n, 0.0);
  const double tau = x_lifetime_ps;

  // Cell values represent the average density over [y_k, y_k + dy), so the
  // underlying pdf is sampled at cell midpoints.
  if (sigma_ps < 1e-9) {
    for (std::size_t k = 0; k < n; ++k) {
      const double y = ymin + static_cast<double>(k) + 0.5;
      if (y < 0.0 || tau <= 0.0) continue;
      const double pdf = std::exp(-y / tau) / tau;
      g0[k] = pdf;
      gc[k] = pdf * std::cos(omega * y - phi0);
      gs[k] = pdf * std::sin(omega * y - phi0);
    }
  } else {
    const int half = static_cast<int>(std::ceil(6.0 * sigma_ps));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double ksum = 0.0;
    for (int m = -half; m <= half; ++m) {
      const double w = std::exp(-0.5 * (m / sigma_ps) * (m / sigma_ps));
      kernel[static_cast<std::size_t>(m + half)] = w;
      ksum += w;
    }
    for (auto& w : kernel) w /= ksum;

    for (std::size_t k = 0; k < n; ++k) {
      const double y = ymin + static_cast<double>(k) + 0.5;
      double a0 = 0.0, ac = 0.0, as = 0.0;
      for (int m = -half; m <= half; ++m) {
        const double e = y - static_cast<double>(m);
        if (e < 0.0 || tau <= 0.0) continue;
        const double pdf = std::exp(-e / tau) / tau * kernel[static_cast<std::size_t>(m + half)];
        a0 += pdf;
        ac += pdf * std::cos(omega * e - phi0);
        as += pdf * std::sin(omega * e - phi0);
      }
      g0[k] = a0;
      gc[k] = ac;
      gs[k] = as;
    }
  }

  env.c0.resize(n + 1, 0.0);
  env.cc.resize(n + 1, 0.0);
  env.cs.resize(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    env.c0[k + 1] = env.c0[k] + g0[k] * env.dy;
    env.cc[k + 1] = env.cc[k] + gc[k] * env.dy;
    env.cs[k + 1] = env.cs[k] + gs[k] * env.dy;
  }
  // cumulative arrays are indexed by y grid directly
  env.c0.pop_back();
  env.cc.pop_back();
  env.cs.pop_back();
  return env;
}

// Gaussian mass over [lo, hi); recorded delays are integer ps, so bin edges
// sit half a picosecond below the nominal boundary.
double gaussian_bin_mass(double mu, double sigma, double lo, double hi) {
  if (sigma < 1e-9) {
    return (mu >= lo && mu < hi) ? 1.0 : 0.0;
  }
  const double inv = 1.0 / (sigma * 1.4142135623730951);
  return 0.5 * (std::erf((hi - mu) * inv) - std::erf((lo - mu) * inv));
}

struct DetectedPair {
  double t_2x = 0.0;
  double t_x = 0.0;
  bool det_2x = false;
  bool det_x = false;
  int laser_index = -1;  // matched laser photon, -1 when none
};

}  // namespace

double RelayScenario::detected_2x_cps() const {
  return src.pair_rate_cps * coupler.split_ratio * det.efficiency;
}

double RelayScenario::detected_laser_cps() const {
  return laser.intensity_ratio * detected_2x_cps();
}

double RelayScenario::detected_x_cps() const { return src.pair_rate_cps * det.efficiency; }

void RelayScenario::validate() const {
  src.validate();
  laser.validate();
  det.validate();
  coupler.validate();
}

void MapGrid::validate() const {
  require(bin_ps >= 1 && bin_ps <= 8, "MapGrid: bin_ps outside [1, 8]");
  require(t1_max_ps > t1_min_ps && t2_max_ps > t2_min_ps, "MapGrid: empty range");
  require(t1_min_ps % bin_ps == 0 && t1_max_ps % bin_ps == 0 && t2_min_ps % bin_ps == 0 &&
              t2_max_ps % bin_ps == 0,
          "MapGrid: bounds not multiples of bin_ps");
}

RateDensity3F analytic_threefold_density(const RelayScenario& scn, const MapGrid& grid,
                                         bool include_floor) {
  scn.validate();
  grid.validate();

  RateDensity3F out;
  out.grid = grid;
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  out.density[0].assign(static_cast<std::size_t>(n1 * n2), 0.0);
  out.density[1].assign(static_cast<std::size_t>(n1 * n2), 0.0);

  const double r_laser = scn.detected_laser_cps();
  const double r_2x = scn.detected_2x_cps();
  const double r_x = scn.detected_x_cps();
  const double eta = scn.det.efficiency;
  const double lambda = scn.src.depolarization;
  const double leak = scn.det.extinction_leak();
  const double sigma_tag = scn.det.tag_sigma_ps();
  const double omega = scn.src.fss_uev / constants::hbar_uev_ps;
  const double phi0 = scn.phase_offset_rad;
  const auto [vec_p, vec_q] = basis_vectors(scn.bob_basis);
  const Complex c_h = scn.input_state.amp_h();
  const Complex c_v = scn.input_state.amp_v();
  const double wh = std::norm(c_h);
  const double wv = std::norm(c_v);

  // Born coefficient sets per outcome for the three herald components.
  std::array<BornCoeffs, 2> coh, dist_h_sibling, dist_v_sibling;
  for (int q = 0; q < 2; ++q) {
    const Vector2c& bv = q == 0 ? vec_p : vec_q;
    coh[static_cast<std::size_t>(q)] = apply_noise(coherent_coeffs(bv, c_h, c_v), lambda, leak);
    dist_h_sibling[static_cast<std::size_t>(q)] =
        apply_noise({std::norm(bv(0)), 0.0, 0.0}, lambda, leak);
    dist_v_sibling[static_cast<std::size_t>(q)] =
        apply_noise({std::norm(bv(1)), 0.0, 0.0}, lambda, leak);
  }

  const auto jitter_nodes = sigma_tag < 1e-9
                                ? std::vector<std::pair<double, double>>{{0.0, 1.0}}
                                : gauss_hermite_unit(9);

  // Laser-2X separations contribute over the whole tau1 range (the
  // distinguishable component persists beyond the interaction horizon, where
  // the photons behave as independent); nu is cut off at the horizon.
  const double delta_half = std::max({kInteractionHorizonPs,
                                      std::abs(static_cast<double>(grid.t1_min_ps)),
                                      std::abs(static_cast<double>(grid.t1_max_ps))}) +
                            8.0 * sigma_tag + 2.0 * grid.bin_ps;

  // Sibling-delay envelope, jitter-convolved; arguments span the grid plus
  // the separation range and the largest jitter-node offset.
  const double slack = delta_half + 8.0 * sigma_tag + 16.0;
  const Envelopes env = build_envelopes(omega, phi0, scn.src.x_lifetime_ps, sigma_tag,
                                        grid.t2_min_ps - slack, grid.t2_max_ps + slack);

  const double d_delta = 2.0;  // midpoint separation grid
  const int n_delta = static_cast<int>(2.0 * delta_half / d_delta);
  const double pair_density = r_laser * r_2x / kPsPerSecond;  // per s per ps of dt

  std::vector<double> t2_mass0(static_cast<std::size_t>(n2));
  std::vector<double> t2_massc(static_cast<std::size_t>(n2));
  std::vector<double> t2_masss(static_cast<std::size_t>(n2));
  std::vector<double> t1_prof_coh(static_cast<std::size_t>(n1));
  std::vector<double> t1_prof_dist(static_cast<std::size_t>(n1));

  const double bin_area = static_cast<double>(grid.bin_ps) * grid.bin_ps;

  for (const auto& [z, pj] : jitter_nodes) {
    const double j = sigma_tag * z;

    // --- assignment "D1 = 2X": tau1 = -dt - j, tau2 = E - j ------------
    // The tau2 profile is dt-independent, so the dt sum factorizes.
    std::fill(t1_prof_coh.begin(), t1_prof_coh.end(), 0.0);
    std::fill(t1_prof_dist.begin(), t1_prof_dist.end(), 0.0);
    for (int k = 0; k < n_delta; ++k) {
      const double dt = -delta_half + (k + 0.5) * d_delta;
      const double nu_pos = std::abs(dt) > kInteractionHorizonPs
                                ? 0.0
                                : std::max(0.0, pairwise_indistinguishability(dt, scn.laser,
                                                                              scn.src));
      const double mu1 = -dt - j;
      const int lo_bin = std::max(0, static_cast<int>((mu1 - 6.0 * sigma_tag - grid.t1_min_ps) /
                                                      grid.bin_ps) - 1);
      const int hi_bin = std::min(n1 - 1, static_cast<int>((mu1 + 6.0 * sigma_tag -
                                                            grid.t1_min_ps) / grid.bin_ps) + 1);
      for (int i1 = lo_bin; i1 <= hi_bin; ++i1) {
        const double lo = grid.t1_min_ps + i1 * grid.bin_ps - 0.5;
        const double m = gaussian_bin_mass(mu1, sigma_tag, lo, lo + grid.bin_ps);
        if (m <= 0.0) continue;
        // coherent takes 1/4 nu+, the H-sibling dephased case (2X measured
        // H at D1) takes 1/2 (1 - nu+) wv
        t1_prof_coh[static_cast<std::size_t>(i1)] += 0.25 * nu_pos * m * d_delta;
        t1_prof_dist[static_cast<std::size_t>(i1)] += 0.5 * (1.0 - nu_pos) * wv * m * d_delta;
      }
    }
    for (int i2 = 0; i2 < n2; ++i2) {
      const double lo = grid.t2_min_ps + i2 * grid.bin_ps - 0.5 + j;
      const double hi = lo + grid.bin_ps;
      t2_mass0[static_cast<std::size_t>(i2)] = env.mass(env.c0, lo, hi);
      t2_massc[static_cast<std::size_t>(i2)] = env.mass(env.cc, lo, hi);
      t2_masss[static_cast<std::size_t>(i2)] = env.mass(env.cs, lo, hi);
    }
    for (int q = 0; q < 2; ++q) {
      const BornCoeffs& bc = coh[static_cast<std::size_t>(q)];
      const BornCoeffs& bh = dist_h_sibling[static_cast<std::size_t>(q)];
      auto& dens = out.density[static_cast<std::size_t>(q)];
      for (int i1 = 0; i1 < n1; ++i1) {
        const double wc = t1_prof_coh[static_cast<std::size_t>(i1)];
        const double wd = t1_prof_dist[static_cast<std::size_t>(i1)];
        if (wc <= 0.0 && wd <= 0.0) continue;
        for (int i2 = 0; i2 < n2; ++i2) {
          const double m0 = t2_mass0[static_cast<std::size_t>(i2)];
          const double mc = t2_massc[static_cast<std::size_t>(i2)];
          const double ms = t2_masss[static_cast<std::size_t>(i2)];
          const double coh_part = wc * (bc.a * m0 + bc.b * mc + bc.c * ms);
          const double dist_part = wd * bh.a * m0;
          dens[static_cast<std::size_t>(i1 * n2 + i2)] +=
              pj * pair_density * eta * (coh_part + dist_part) / bin_area;
        }
      }
    }

    // --- assignment "D1 = laser": tau1 = dt - j, tau2 = dt + E - j -----
    for (int k = 0; k < n_delta; ++k) {
      const double dt = -delta_half + (k + 0.5) * d_delta;
      const double nu_pos = std::abs(dt) > kInteractionHorizonPs
                                ? 0.0
                                : std::max(0.0, pairwise_indistinguishability(dt, scn.laser,
                                                                              scn.src));
      const double w_coh = 0.25 * nu_pos * d_delta;
      const double w_dist = 0.5 * (1.0 - nu_pos) * wh * d_delta;  // laser H at D1, sibling |V>
      if (w_coh <= 0.0 && w_dist <= 0.0) continue;
      const double mu1 = dt - j;
      const int lo_bin = std::max(0, static_cast<int>((mu1 - 6.0 * sigma_tag - grid.t1_min_ps) /
                                                      grid.bin_ps) - 1);
      const int hi_bin = std::min(n1 - 1, static_cast<int>((mu1 + 6.0 * sigma_tag -
                                                            grid.t1_min_ps) / grid.bin_ps) + 1);
      if (lo_bin > hi_bin) continue;
      for (int i2 = 0; i2 < n2; ++i2) {
        const double lo = grid.t2_min_ps + i2 * grid.bin_ps - 0.5 - dt + j;
        const double hi = lo + grid.bin_ps;
        t2_mass0[static_cast<std::size_t>(i2)] = env.mass(env.c0, lo, hi);
        t2_massc[static_cast<std::size_t>(i2)] = env.mass(env.cc, lo, hi);
        t2_masss[static_cast<std::size_t>(i2)] = env.mass(env.cs, lo, hi);
      }
      for (int i1 = lo_bin; i1 <= hi_bin; ++i1) {
        const double lo1 = grid.t1_min_ps + i1 * grid.bin_ps - 0.5;
        const double m1 = gaussian_bin_mass(mu1, sigma_tag, lo1, lo1 + grid.bin_ps);
        if (m1 <= 0.0) continue;
        for (int q = 0; q < 2; ++q) {
          const BornCoeffs& bc = coh[static_cast<std::size_t>(q)];
          const BornCoeffs& bq = dist_v_sibling[static_cast<std::size_t>(q)];
          auto& dens = out.density[static_cast<std::size_t>(q)];
          for (int i2 = 0; i2 < n2; ++i2) {
            const double m0 = t2_mass0[static_cast<std::size_t>(i2)];
            const double mc = t2_massc[static_cast<std::size_t>(i2)];
            const double ms = t2_masss[static_cast<std::size_t>(i2)];
            const double coh_part = w_coh * (bc.a * m0 + bc.b * mc + bc.c * ms);
            const double dist_part = w_dist * bq.a * m0;
            dens[static_cast<std::size_t>(i1 * n2 + i2)] +=
                pj * pair_density * eta * m1 * (coh_part + dist_part) / bin_area;
          }
        }
      }
    }
  }

  if (include_floor) {
    // Uniform accidental floor: every herald also pairs with uncorrelated
    // Bob tags (other pairs' X photons, unpolarized, plus dark counts).
    const double dead_ps = kRefractoryLifetimes * scn.src.x_lifetime_ps;
    const double in_dead = (std::abs(grid.t1_min_ps) < dead_ps &&
                            std::abs(grid.t1_max_ps) < dead_ps)
                               ? 1.0
                               : 0.0;
    const double a1 = r_laser * wh + 0.5 * r_2x + scn.det.dark_cps;
    const double a2 = r_laser * wv + 0.5 * r_2x + scn.det.dark_cps;
    const double herald_density = (a1 * a2 - in_dead * 0.25 * r_2x * r_2x) / kPsPerSecond;
    const double bob_rate = (0.5 * r_x + scn.det.dark_cps) / kPsPerSecond;
    const double floor = herald_density * bob_rate;
    for (int q = 0; q < 2; ++q) {
      for (auto& v : out.density[static_cast<std::size_t>(q)]) v += floor;
    }
  }
  return out;
}

double herald_rate(const RelayScenario& scn, double t1_min_ps, double t1_max_ps) {
  scn.validate();
  require(t1_max_ps > t1_min_ps, "herald_rate: empty window");
  const double r_laser = scn.detected_laser_cps();
  const double r_2x = scn.detected_2x_cps();
  const double wh = std::norm(scn.input_state.amp_h());
  const double wv = std::norm(scn.input_state.amp_v());
  const double a1 = r_laser * wh + 0.5 * r_2x + scn.det.dark_cps;
  const double a2 = r_laser * wv + 0.5 * r_2x + scn.det.dark_cps;
  const double width = t1_max_ps - t1_min_ps;
  const double dead_ps = kRefractoryLifetimes * scn.src.x_lifetime_ps;
  const double overlap = std::max(0.0, std::min(t1_max_ps, dead_ps) -
                                           std::max(t1_min_ps, -dead_ps));
  return (a1 * a2 * width - 0.25 * r_2x * r_2x * overlap) / kPsPerSecond;
}

TimeTagStream simulate_time_tags(Rng& rng, const RelayScenario& scn, double duration_s) {
  scn.validate();
  require(duration_s > 0.0, "simulate_time_tags: duration <= 0");

  const double duration_ps = duration_s * kPsPerSecond;
  const double r_laser = scn.detected_laser_cps();
  const double p_det_2x = scn.coupler.split_ratio * scn.det.efficiency;
  const double eta = scn.det.efficiency;
  const double lambda = scn.src.depolarization;
  const double leak = scn.det.extinction_leak();
  const double sigma_tag = scn.det.tag_sigma_ps();
  const double omega = scn.src.fss_uev / constants::hbar_uev_ps;
  const double phi0 = scn.phase_offset_rad;
  const auto [vec_p, vec_q] = basis_vectors(scn.bob_basis);
  const Complex c_h = scn.input_state.amp_h();
  const Complex c_v = scn.input_state.amp_v();
  const double wh = std::norm(c_h);

  TimeTagStream tags;
  tags.reserve(static_cast<std::size_t>(
      duration_s * (r_laser + scn.detected_2x_cps() + scn.detected_x_cps() +
                    4.0 * scn.det.dark_cps) * 1.05) + 64);

  auto emit = [&](Channel ch, double t) {
    const double jt = sigma_tag > 0.0 ? t + rng.normal(sigma_tag) : t;
    if (jt < 0.0 || jt >= duration_ps) return;
    tags.push_back({ch, static_cast<std::int64_t>(std::llround(jt))});
  };
  auto emit_bob = [&](double t, double p_d3) {
    const double p = leak + (1.0 - 2.0 * leak) * p_d3;
    emit(rng.bernoulli(p) ? Channel::kD3 : Channel::kD4, t);
  };
  auto born_d3 = [&](const Vector2c& state) {
    const Complex amp = vec_p.adjoint() * state;
    return std::norm(amp) / state.squaredNorm();
  };

  // 1. cascade emissions and detection thinning
  const auto emissions = sample_pair_emissions(rng, scn.src, duration_s);
  std::vector<DetectedPair> pairs(emissions.size());
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    pairs[i].t_2x = emissions[i].t_2x_ps;
    pairs[i].t_x = emissions[i].t_x_ps;
    pairs[i].det_2x = rng.bernoulli(p_det_2x);
    pairs[i].det_x = rng.bernoulli(eta);
  }

  // 2. laser photon arrivals
  std::vector<double> lasers;
  if (r_laser > 0.0) {
    lasers.reserve(static_cast<std::size_t>(duration_s * r_laser * 1.05) + 16);
    const double gap = kPsPerSecond / r_laser;
    for (double t = rng.exponential(gap); t < duration_ps; t += rng.exponential(gap)) {
      lasers.push_back(t);
    }
  }

  // 3. one-to-one nearest matching of detected 2X photons to laser photons
  std::vector<bool> laser_used(lasers.size(), false);
  std::size_t cursor = 0;
  for (auto& pr : pairs) {
    if (!pr.det_2x || lasers.empty()) continue;
    while (cursor < lasers.size() && lasers[cursor] < pr.t_2x) ++cursor;
    // candidates: nearest unused laser on either side
    std::ptrdiff_t best = -1;
    double best_dist = kInteractionHorizonPs;
    for (std::ptrdiff_t c = static_cast<std::ptrdiff_t>(cursor) - 1;
         c >= 0 && pr.t_2x - lasers[static_cast<std::size_t>(c)] <= best_dist; --c) {
      if (!laser_used[static_cast<std::size_t>(c)]) {
        best = c;
        best_dist = pr.t_2x - lasers[static_cast<std::size_t>(c)];
        break;
      }
    }
    for (std::size_t c = cursor; c < lasers.size() && lasers[c] - pr.t_2x < best_dist; ++c) {
      if (!laser_used[c]) {
        best = static_cast<std::ptrdiff_t>(c);
        best_dist = std::abs(lasers[c] - pr.t_2x);
        break;
      }
    }
    if (best >= 0) {
      laser_used[static_cast<std::size_t>(best)] = true;
      pr.laser_index = static_cast<int>(best);
    }
  }

  // 4. pair-by-pair outcome sampling, in emission order
  for (const auto& pr : pairs) {
    const double e_delay = pr.t_x - pr.t_2x;
    if (!pr.det_2x) {
      // 2X lost: the X photon is unpolarized on its own.
      if (pr.det_x) emit_bob(pr.t_x, 0.5);
      continue;
    }
    if (pr.laser_index < 0) {
      // lone detected 2X: unpolarized PBS outcome, HV-correlated sibling
      const bool two_x_h = rng.bernoulli(0.5);
      emit(two_x_h ? Channel::kD1 : Channel::kD2, pr.t_2x);
      if (pr.det_x) {
        double p_d3;
        if (rng.bernoulli(lambda)) {
          p_d3 = 0.5;
        } else {
          p_d3 = born_d3(two_x_h ? PolarizationState::h().vector()
                                 : PolarizationState::v().vector());
        }
        emit_bob(pr.t_x, p_d3);
      }
      continue;
    }

    const double t_laser = lasers[static_cast<std::size_t>(pr.laser_index)];
    const double nu = pairwise_indistinguishability(pr.t_2x - t_laser, scn.laser, scn.src);
    const double nu_pos = std::max(0.0, nu);

    double p_d3 = 0.5;
    if (rng.bernoulli(0.5)) {
      // herald: one click on each PBS output
      double t_d1;
      double t_d2;
      if (rng.bernoulli(nu_pos)) {
        // coherent Psi+ projection: click ownership is undefined
        if (rng.bernoulli(0.5)) {
          t_d1 = t_laser;
          t_d2 = pr.t_2x;
        } else {
          t_d1 = pr.t_2x;
          t_d2 = t_laser;
        }
        if (rng.bernoulli(lambda)) {
          p_d3 = 0.5;
        } else {
          const double alpha = phi0 - omega * e_delay;
          Vector2c s;
          s(0) = c_v * Complex(std::cos(alpha), std::sin(alpha));
          s(1) = c_h;
          p_d3 = born_d3(s);
        }
      } else {
        // no interference: outcomes follow the photons' own polarizations
        if (rng.bernoulli(wh)) {
          t_d1 = t_laser;  // laser H, 2X V
          t_d2 = pr.t_2x;
          p_d3 = rng.bernoulli(lambda) ? 0.5 : born_d3(PolarizationState::v().vector());
        } else {
          t_d1 = pr.t_2x;  // 2X H, laser V
          t_d2 = t_laser;
          p_d3 = rng.bernoulli(lambda) ? 0.5 : born_d3(PolarizationState::h().vector());
        }
      }
      emit(Channel::kD1, t_d1);
      emit(Channel::kD2, t_d2);
    } else {
      // both photons on the same PBS output
      if (rng.bernoulli(wh)) {
        emit(Channel::kD1, t_laser);
        emit(Channel::kD1, pr.t_2x);
        p_d3 = rng.bernoulli(lambda) ? 0.5 : born_d3(PolarizationState::h().vector());
      } else {
        emit(Channel::kD2, t_laser);
        emit(Channel::kD2, pr.t_2x);
        p_d3 = rng.bernoulli(lambda) ? 0.5 : born_d3(PolarizationState::v().vector());
      }
    }
    if (pr.det_x) emit_bob(pr.t_x, p_d3);
  }

  // 5. unmatched laser photons
  for (std::size_t i = 0; i < lasers.size(); ++i) {
    if (laser_used[i]) continue;
    emit(rng.bernoulli(wh) ? Channel::kD1 : Channel::kD2, lasers[i]);
  }

  // 6. dark counts
  const auto darks = dark_count_stream(rng, scn.det, duration_s);
  tags.insert(tags.end(), darks.begin(), darks.end());

  sort_tags(tags);
  return tags;
}

}  // namespace qrelay
