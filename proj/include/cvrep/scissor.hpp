#pragma once

// Heralded noiseless linear amplification with a single quantum scissor,
// modelled at operator level: T = Pi_1 g^n with
// Pi_1 = (|0><0| + |1><1|) / sqrt(g^2 + 1).

#include "cvrep/fock.hpp"

namespace cvrep {

struct NlaParams {
  /// Gains above this are accepted but flagged in reports.
  static constexpr double kSoftMaxGain = 20.0;
  /// Hard validation limit.
  static constexpr double kMaxGain = 100.0;

  double gain = 1.0;

  /// Beamsplitter ratio of the scissor circuit, xi = 1 / (1 + g^2).
  double xi() const { return 1.0 / (1.0 + gain * gain); }
  static NlaParams from_xi(double xi);

  /// Requires 0 < g <= kMaxGain.
  void validate() const;
  bool above_soft_cap() const { return gain > kSoftMaxGain; }
};

/// Applies T to `mode`; the result is unnormalised (its squared norm is the
/// heralding probability times the input norm) and `mode` gets cutoff 1.
MultiModeKet apply_qs(const MultiModeKet& state, const ModeId& mode, const NlaParams& nla);

/// Closed-form heralding probability for a TMSV arm sent through loss eta:
/// (1-chi^2)(chi^2(eta g^2 + eta - 1) + 1) / ((g^2+1)((eta-1)chi^2 + 1)^2).
double p_nla(double chi, double eta, double gain);

/// Unnormalised distilled link over (outer, inner, env): TMSV on (outer,
/// inner), loss on inner into env, scissor on inner. `outer` and `env` are
/// truncated at `cutoff`; `inner` is binary.
MultiModeKet distilled_link(double chi, double eta, double gain, int cutoff, const ModeId& outer = "A",
                            const ModeId& inner = "C", const ModeId& env = "D");

}  // namespace cvrep
