#pragma once

// Waiting-time combinatorics of a probabilistic repeater and the final
// secret-key-rate assembly. Rates are per repeater clock cycle.

#include <vector>

namespace cvrep {

/// Mean number of attempts until 2^n independent heralded processes, each
/// succeeding with probability p per attempt, have all succeeded:
/// sum_{j=1}^{2^n} C(2^n, j) (-1)^{j+1} / (1 - (1-p)^j).
/// The alternating sum is accumulated with Neumaier compensation; beyond 16
/// processes, where it cancels badly, z_steps switches to the expectation form.
double z_steps(int n, double p);

/// The alternating binomial sum exactly as written (compensated summation only).
double z_steps_alternating(int n, double p);

/// E[max of 2^n geometric variables] = sum_{t>=0} (1 - (1 - (1-p)^t)^{2^n}),
/// summed directly until 2^n (1-p)^t < 1e-6, after which the rest of the
/// series is added in closed form to second order (relative error < 1e-12).
double z_steps_expectation(int n, double p);

struct StageProbabilities {
  double p_nla = 1.0;
  /// Post-selection success per swap level, index i = n-1 (first round, 2^{n-1}
  /// swaps) down to i = 0 (final swap). Stored so that p_ps[i] is level i.
  std::vector<double> p_ps;
};

/// R_rep = 1/Z_n(p_nla) * prod_{i=0}^{n-1} 1/Z_i(p_ps[i]). Throws
/// std::invalid_argument if p_ps does not have n entries.
double repeater_rate(const StageProbabilities& sp, int n);

/// K * R_rep; K must be >= 0 and r_rep in (0, 1].
double secret_key_rate(double raw_key_bits, double r_rep);

}  // namespace cvrep
