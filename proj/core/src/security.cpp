#include "qrelay/security.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

namespace {
double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}
}  // namespace

double secure_bits(double f) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::domain_error("secure_bits: fidelity outside [0, 1]");
  }
  return std::max(0.0, 1.0 - 2.0 * binary_entropy(1.0 - f));
}

ThresholdReport threshold_report(double f) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::domain_error("threshold_report: fidelity outside [0, 1]");
  }
  ThresholdReport r;
  r.fidelity = f;
  r.passes_universal_2_3 = f > 2.0 / 3.0;
  r.passes_6state_724 = f > 0.724;
  r.passes_4state_75 = f > 0.75;
  r.passes_ec_80 = f > 0.80;
  r.secure_bits_per_coincidence = secure_bits(f);
  return r;
}

}  // namespace qrelay
