#pragma once

// Experiment layer: evaluates and optimises repeater configurations at given
// distances and collects everything a result table needs. All key rates are
// Gaussian-CM-based estimates.

#include "cvrep/scissor.hpp"
#include "cvrep/swap.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace cvrep {

struct PhysicalityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResultRow {
  std::string experiment;
  double distance_km = 0.0;
  int n_links = 2;
  double chi = 0.0;
  double gain = 0.0;
  double gain_max = 0.0;  // optimiser bound on the gain, 0 when not optimised
  std::vector<double> gamma_max;  // base level first
  std::vector<DisplacementGains> lambdas;
  double eta_link = 1.0;
  double p_nla = 0.0;
  std::vector<double> p_ps;  // p_ps[i], i = 0 is the final swap
  double r_rep = 0.0;
  double i_ab = 0.0;
  double i_be = 0.0;
  double key = 0.0;  // raw key, clamped at 0
  double secret_key_rate = 0.0;
  double eof = 0.0;
  // baselines at the same total distance, when computed
  std::optional<double> plob;
  std::optional<double> direct_key;
  std::optional<double> eof_direct_inf;
  BoundMode bound = BoundMode::numeric;
  Protocol protocol = Protocol::homodyne;
  // diagnostics
  double nu_min = 1.0;
  double ps_residual = 0.0;
  double completeness = 0.0;
  int evaluations = 0;
  bool converged = true;
  bool gain_above_soft_cap = false;
};

/// Throws PhysicalityError when a row's CM or probabilities are unphysical.
void check_physical(const ResultRow& row);

/// Evaluates one configuration (no optimisation).
ResultRow evaluate_point(const ChainConfig& cfg);

struct OptimizeSettings {
  double chi_lo = 0.01;
  double chi_hi = 0.9;
  double gain_lo = 1.0;
  double gain_hi = NlaParams::kMaxGain;
  bool fix_chi = false;
  bool optimize_gamma = false;  // scales every level's gamma_max by one factor
  double gamma_hi = 2.0;
  int restarts = 1;
  int gain_scan_points = 12;  // log-spaced gains tried at the start chi; 0 disables
  int max_evaluations = 400;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-9;
};

/// Maximises K * R_rep over chi and g (and optionally gamma_max), starting
/// from cfg's values or the best point of a coarse gain scan. The objective uses the unclamped key margin so the
/// simplex is still guided where no key is produced.
ResultRow optimize_point(ChainConfig cfg, const OptimizeSettings& settings);

/// EOF of the outcome-zero state (post-selection radius -> 0) of a
/// 2^n_levels-link repeater.
double repeater_eof(double total_km, int n_levels, double chi, double gain, int cutoff = 12);

struct EofOptimum {
  double eof = 0.0;
  double gain = 0.0;
};

/// Best repeater_eof over gain in [gain_lo, gain_max].
EofOptimum repeater_eof_best_gain(double total_km, int n_levels, double chi, double gain_max, double gain_lo = 1.0,
                                  int cutoff = 12);

/// First distance in [lo, hi] where f changes sign from <= 0 to > 0, scanning
/// with `step` then bisecting to `tolerance`. std::nullopt if none.
std::optional<double> first_crossing(const std::function<double(double)>& f, double lo, double hi, double step,
                                     double tolerance = 0.01);

/// Crossing from tabulated curves: the first grid point where lhs exceeds rhs
/// after not doing so, interpolated linearly in log(lhs / rhs).
std::optional<double> tabulated_crossing(const std::vector<double>& x, const std::vector<double>& lhs,
                                         const std::vector<double>& rhs);

/// Monte-Carlo estimate of Z_n(p): mean over trials of the maximum of 2^n
/// geometric waiting times.
double z_steps_monte_carlo(int n, double p, long trials, std::uint64_t seed);

/// Default worker count: CVREP_WORKERS if set, else hardware concurrency.
int default_workers();

/// Applies fn to every item on `workers` threads; results keep input order.
template <class In, class Out>
std::vector<Out> parallel_map(const std::vector<In>& items, const std::function<Out(const In&)>& fn, int workers) {
  std::vector<std::optional<Out>> slots(items.size());
  std::vector<std::exception_ptr> errors(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        slots[i].emplace(fn(items[i]));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<Out> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace cvrep
