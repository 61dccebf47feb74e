#ifndef FINSEC_STABILITY_HPP
#define FINSEC_STABILITY_HPP

#include "finsec/localsym.hpp"

namespace finsec {

struct StabilityConfig {
  std::vector<int> windows{16, 32, 64, 128};      // compression windows for (a)/(b)
  std::vector<int> local_grids{32, 64, 128};      // total cells for (c)/(d)
  std::vector<int> observed_ns{8, 16, 32, 64, 128};
  double floor_value = 1e-6;
  int trend_window = 3;
  int margin = -1;                                // -1: default 4n
  int laurent_grid = 2048;                        // angle samples of the exact fast path
  std::vector<double> extra_taus;                 // audit points, folded to [0, pi]
};

/// Invertibility evidence for one operator in S^J: either the exact symbol
/// scan (pure Laurent) or the compression trend heuristic.
struct OperatorEvidence {
  OpExpr op = OpExpr::ident();       // normalized operator under test
  InvVerdict verdict = InvVerdict::Inconclusive;
  std::string method;                // "exact-symbol" or "trend-heuristic"
  double symbol_min_sigma = -1.0;    // exact path only
  SweepResult sweep;                 // trend path only
};

/// sigma_min of P_m A P_m across growing windows, with an exact fast path for
/// pure Laurent operators (symbol values and one-sided limits scanned on a
/// dense grid).  The trend path is a documented heuristic: compressions of an
/// invertible operator may themselves be an unstable sequence.
OperatorEvidence check_operator_invertibility(const OpExpr& a, const StabilityConfig& cfg);

struct StabilityReport {
  OperatorEvidence cond_a;             // P(A_n) invertible
  OperatorEvidence cond_b;             // W(A_n) invertible
  std::vector<LocalEvidence> cond_c;   // interior fiber points
  std::vector<LocalEvidence> cond_d;   // tau = +-1
  Verdict predicted = Verdict::Inconclusive;
  SweepResult observed_sweep;
  Verdict observed = Verdict::Inconclusive;
  std::string agreement;               // "yes" / "no" / "n/a"
};

/// Evaluates conditions (a)-(d) plus the direct truncation sweep.  The
/// predicted verdict is stable iff every condition is invertible, unstable if
/// any is singular, inconclusive otherwise; agreement is n/a unless both
/// sides are decisive.
StabilityReport stability_report(const SeqExpr& s, const StabilityConfig& cfg = {});

Verdict combine_predicted(const StabilityReport& r);

}  // namespace finsec

#endif
