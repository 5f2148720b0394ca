#pragma once

// Entanglement distribution: two-mode squeezed vacuum sources and the
// pure-loss fibre channel, with the environment kept as an explicit mode.

#include "cvrep/fock.hpp"

namespace cvrep {

struct SourceParams {
  double chi = 0.0;  // two-mode squeezing parameter, 0 <= chi < 1

  void validate() const;
};

struct FiberChannel {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.2;
};

/// eta = 10^(-attenuation * length / 10). Throws on negative length.
double transmissivity(const FiberChannel& channel);

/// sqrt(1 - chi^2) sum_n chi^n |n>_first |n>_second, truncated at `cutoff`.
MultiModeKet tmsv(const SourceParams& source, int cutoff, const ModeId& first = "A",
                  const ModeId& second = "C");

/// Beamsplitter dilation of a pure-loss channel of transmissivity eta acting
/// on `mode`; the reflected photons land in the fresh mode `env`, appended
/// last with the same cutoff as `mode`. Norm preserving on the lattice.
MultiModeKet apply_loss(const MultiModeKet& state, const ModeId& mode, double eta, const ModeId& env);

}  // namespace cvrep
