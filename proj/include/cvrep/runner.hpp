#pragma once

// Experiment presets and sweeps behind the command-line tool.

#include "cvrep/experiments.hpp"
#include "cvrep/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cvrep {

enum class ExperimentKind { eof, keyrate, bounds, baselines, znp, optimize };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::keyrate;
  int n_links = 2;
  std::vector<double> distances_km;
  std::optional<double> chi;       // fixed squeezing; optimised when unset (ignored by eof)
  std::vector<double> gain_max;    // one sweep per value
  std::vector<double> gamma_max;   // per swap level, base first; empty selects defaults
  double beta = 0.95;
  Protocol protocol = Protocol::homodyne;
  std::optional<BoundMode> bound;  // bounds: all applicable modes when unset
  int cutoff = 12;
  int workers = 1;
  std::uint64_t seed = 1;
  long trials = 1000000;
  std::vector<int> znp_levels{0, 1, 2, 3, 4};
  std::vector<double> znp_p{0.01, 0.1, 0.5, 0.9};
  OptimizeSettings optimizer;

  int n_levels() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Defaults for each experiment kind.
ExperimentConfig preset(ExperimentKind kind);

/// Distance grid from values and "start:stop:step" ranges (inclusive).
std::vector<double> parse_distance_grid(const std::vector<std::string>& specs);

/// Post-selection radii used when none are given: 0.5 (hom) or 0.4 (het) at
/// every level, except the lower bound, which uses the per-level presets.
std::vector<double> default_gamma_max(int n_levels, Protocol protocol, BoundMode bound);

struct ExperimentOutput {
  Table table;
  nlohmann::json summary;
  bool converged = true;
};

/// Optimised key-rate rows for keyrate, bounds and optimize experiments, in
/// grid order (gain_max, then distance, then bound mode).
std::vector<ResultRow> run_key_sweep(const ExperimentConfig& cfg);

/// Runs the sweep on cfg.workers threads. Rows come out in grid order and do
/// not depend on the worker count. Throws PhysicalityError before returning an
/// unphysical row.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace cvrep
