#include "cvrep/experiments.hpp"

#include "cvrep/channel.hpp"
#include "cvrep/optimize.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <string>

namespace cvrep {

void check_physical(const ResultRow& row) {
  auto fail = [&](const std::string& what) {
    throw PhysicalityError("unphysical result at " + std::to_string(row.distance_km) + " km: " + what);
  };
  if (row.nu_min < 1.0 - 1e-6) fail("symplectic eigenvalue " + std::to_string(row.nu_min) + " < 1");
  if (!(row.p_nla > 0.0 && row.p_nla <= 1.0)) fail("P_NLA outside (0, 1]");
  for (double p : row.p_ps) {
    if (!(p >= 0.0 && p <= 1.0)) fail("P_PS outside [0, 1]");
  }
  if (!(row.r_rep >= 0.0 && row.r_rep <= 1.0)) fail("R_rep outside [0, 1]");
  for (double v : {row.key, row.secret_key_rate, row.eof, row.i_ab, row.i_be}) {
    if (!std::isfinite(v)) fail("non-finite rate");
  }
}

ResultRow evaluate_point(const ChainConfig& cfg) {
  const ChainResult res = chain_evaluate(cfg);
  const KeyRateInputs in{cfg.beta, cfg.protocol};
  ResultRow row;
  row.distance_km = cfg.total_distance_km;
  row.n_links = 1 << cfg.n_levels;
  row.chi = cfg.chi;
  row.gain = cfg.gain;
  row.gamma_max = cfg.gamma_max;
  row.lambdas = res.gains;
  row.eta_link = res.eta_link;
  row.p_nla = res.probabilities.p_nla;
  row.p_ps = res.probabilities.p_ps;
  const bool any_zero = std::any_of(row.p_ps.begin(), row.p_ps.end(), [](double p) { return p <= 0.0; });
  row.r_rep = any_zero ? 0.0 : repeater_rate(res.probabilities, cfg.n_levels);
  row.i_ab = mutual_info(res.cm, cfg.protocol);
  row.i_be = holevo_reverse(res.cm);
  row.key = raw_key(res.cm, in);
  row.secret_key_rate = row.r_rep > 0.0 ? secret_key_rate(row.key, row.r_rep) : 0.0;
  row.eof = eof_gaussian(res.cm);
  row.bound = cfg.bound;
  row.protocol = cfg.protocol;
  row.nu_min = symplectic_eigs(res.cm).nu2;
  row.ps_residual = res.ps_residual;
  row.completeness = res.completeness;
  row.gain_above_soft_cap = NlaParams{cfg.gain}.above_soft_cap();
  const double eta_total = transmissivity(FiberChannel{cfg.total_distance_km, cfg.attenuation_db_per_km});
  if (eta_total < 1.0) row.plob = plob(eta_total);
  return row;
}

ResultRow optimize_point(ChainConfig cfg, const OptimizeSettings& s) {
  const std::vector<double> base_gamma = cfg.gamma_max;
  const double base_top = *std::max_element(base_gamma.begin(), base_gamma.end());
  const KeyRateInputs in{cfg.beta, cfg.protocol};

  Bounds bounds;
  std::vector<double> start;
  if (!s.fix_chi) {
    bounds.lower.push_back(s.chi_lo);
    bounds.upper.push_back(s.chi_hi);
    start.push_back(std::clamp(cfg.chi, s.chi_lo, s.chi_hi));
  }
  bounds.lower.push_back(s.gain_lo);
  bounds.upper.push_back(s.gain_hi);
  start.push_back(std::clamp(cfg.gain, s.gain_lo, s.gain_hi));
  if (s.optimize_gamma) {
    bounds.lower.push_back(1e-3 * s.gamma_hi / base_top);
    bounds.upper.push_back(s.gamma_hi / base_top);
    start.push_back(1.0);
  }
  auto apply = [&](ChainConfig& c, std::span<const double> x) {
    std::size_t k = 0;
    if (!s.fix_chi) c.chi = x[k++];
    c.gain = x[k++];
    if (s.optimize_gamma) {
      const double scale = x[k++];
      for (std::size_t i = 0; i < base_gamma.size(); ++i) c.gamma_max[i] = base_gamma[i] * scale;
    }
  };
  const Objective objective = [&](std::span<const double> x) {
    ChainConfig c = cfg;
    apply(c, x);
    try {
      const ChainResult r = chain_evaluate(c);
      return -key_margin(r.cm, in) * repeater_rate(r.probabilities, c.n_levels);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  // coarse log-spaced gain scan; nested chains need far larger gains than one node
  int scan_evaluations = 0;
  if (s.gain_scan_points > 1 && s.gain_hi > s.gain_lo) {
    const std::size_t gi = s.fix_chi ? 0 : 1;
    std::vector<double> trial = start;
    double best_f = objective(start);
    scan_evaluations = s.gain_scan_points + 1;
    const double ratio = s.gain_hi / s.gain_lo;
    for (int i = 0; i < s.gain_scan_points; ++i) {
      trial[gi] = s.gain_lo * std::pow(ratio, static_cast<double>(i) / (s.gain_scan_points - 1));
      const double f = objective(trial);
      if (f < best_f) {
        best_f = f;
        start[gi] = trial[gi];
      }
    }
  }
  NelderMeadOptions opts;
  opts.initial_step = 0.1;
  opts.x_tolerance = s.x_tolerance;
  opts.f_tolerance = s.f_tolerance;
  opts.max_evaluations = s.max_evaluations;
  const OptimResult best = nelder_mead_restarts(objective, start, bounds, s.restarts, opts);
  apply(cfg, best.x);
  ResultRow row = evaluate_point(cfg);
  row.evaluations = best.evaluations + scan_evaluations;
  row.converged = best.converged && std::isfinite(best.value);
  return row;
}

double repeater_eof(double total_km, int n_levels, double chi, double gain, int cutoff) {
  if (n_levels == 1) {
    const double eta = transmissivity(FiberChannel{total_km / 2.0});
    const SingleNodeSwap node(LinkParams{chi, eta, gain, cutoff});
    return eof_gaussian(CovarianceMatrixTM::from_moments(node.output_moments(0.0, {})));
  }
  ChainConfig cfg;
  cfg.n_levels = n_levels;
  cfg.total_distance_km = total_km;
  cfg.chi = chi;
  cfg.gain = gain;
  cfg.cutoff = cutoff;
  cfg.bound = BoundMode::upper;
  cfg.gamma_max.assign(static_cast<std::size_t>(n_levels), 0.0);
  return eof_gaussian(chain_evaluate(cfg).cm);
}

EofOptimum repeater_eof_best_gain(double total_km, int n_levels, double chi, double gain_max, double gain_lo,
                                  int cutoff) {
  if (!(gain_max >= gain_lo)) throw std::invalid_argument("repeater_eof_best_gain: gain_max < gain_lo");
  auto f = [&](double g) { return repeater_eof(total_km, n_levels, chi, g, cutoff); };
  constexpr int kScan = 24;
  EofOptimum best{-1.0, gain_lo};
  for (int i = 0; i <= kScan; ++i) {
    const double g = gain_lo + (gain_max - gain_lo) * i / kScan;
    const double e = f(g);
    if (e > best.eof) best = {e, g};
  }
  if (gain_max > gain_lo) {
    const double step = (gain_max - gain_lo) / kScan;
    const double lo = std::max(gain_lo, best.gain - step);
    const double hi = std::min(gain_max, best.gain + step);
    const auto refined = golden_section_maximize(f, lo, hi, 1e-6 * (gain_max - gain_lo));
    if (refined.value > best.eof) best = {refined.value, refined.x};
  }
  return best;
}

std::optional<double> first_crossing(const std::function<double(double)>& f, double lo, double hi, double step,
                                     double tolerance) {
  double prev_x = lo;
  if (f(lo) > 0.0) return lo;
  for (double x = lo + step; x <= hi + 1e-9; x += step) {
    const double v = f(x);
    if (v > 0.0) return bisect_root(f, prev_x, x, tolerance);
    prev_x = x;
  }
  return std::nullopt;
}

std::optional<double> tabulated_crossing(const std::vector<double>& x, const std::vector<double>& lhs,
                                         const std::vector<double>& rhs) {
  if (x.size() != lhs.size() || x.size() != rhs.size()) {
    throw std::invalid_argument("tabulated_crossing: size mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(lhs[i] > rhs[i])) continue;
    if (i == 0) return x[0];
    if (lhs[i - 1] > rhs[i - 1]) continue;
    if (lhs[i - 1] <= 0.0 || rhs[i - 1] <= 0.0 || rhs[i] <= 0.0) return x[i];
    const double d0 = std::log(lhs[i - 1] / rhs[i - 1]);
    const double d1 = std::log(lhs[i] / rhs[i]);
    return x[i - 1] + (x[i] - x[i - 1]) * (-d0) / (d1 - d0);
  }
  return std::nullopt;
}

double z_steps_monte_carlo(int n, double p, long trials, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("z_steps_monte_carlo: p must lie in (0, 1]");
  if (trials < 1) throw std::invalid_argument("z_steps_monte_carlo: need at least one trial");
  std::mt19937_64 rng(seed);
  std::geometric_distribution<long> failures(p);
  const int m = 1 << n;
  long double total = 0.0;
  for (long t = 0; t < trials; ++t) {
    long worst = 0;
    for (int k = 0; k < m; ++k) worst = std::max(worst, failures(rng) + 1);
    total += worst;
  }
  return static_cast<double>(total / trials);
}

int default_workers() {
  if (const char* env = std::getenv("CVREP_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace cvrep
