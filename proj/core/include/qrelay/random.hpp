#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qrelay {

// Deterministic sampling built on std::mt19937_64 raw output. The engine is
// fully specified by the standard; the distribution transforms below are
// explicit so that streams do not depend on the standard library vendor
// (libstdc++ and libc++ implement std::*_distribution differently).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, 1].  Uses the open-interval draw shifted away from 0 so
  // log() below is always finite.
  double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  // Box-Muller without state caching: two draws per normal keeps replay
  // independent of call interleaving.
  double normal(double sigma) {
    const double u = uniform_pos();
    const double v = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// splitmix64, used to derive independent per-segment seeds from a master
// seed.  Consecutive indices give decorrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qrelay
