#pragma once

namespace qrelay {

// QKD figures of merit derived from a teleportation fidelity.  All threshold
// comparisons are strict: a fidelity sitting exactly on a limit does not
// pass it.
struct ThresholdReport {
  double fidelity = 0.0;
  bool passes_universal_2_3 = false;   // general classical limit 2/3
  bool passes_4state_75 = false;       // 4-state protocol classical limit
  bool passes_6state_724 = false;      // 6-state security threshold 72.4 %
  bool passes_ec_80 = false;           // error-correction threshold 80 %
  double secure_bits_per_coincidence = 0.0;
};

// Asymptotic secure-key fraction max(0, 1 - 2 H2(1 - f)) for symmetric
// QBER 1 - f.  Throws std::domain_error outside [0, 1].
double secure_bits(double f);

ThresholdReport threshold_report(double f);

}  // namespace qrelay
