#include "cvrep/runner.hpp"

#include "cvrep/channel.hpp"
#include "cvrep/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace cvrep {

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::eof, "eof"},         {ExperimentKind::keyrate, "keyrate"}, {ExperimentKind::bounds, "bounds"},
    {ExperimentKind::baselines, "baselines"}, {ExperimentKind::znp, "znp"},     {ExperimentKind::optimize, "optimize"},
};

std::vector<double> range(double start, double stop, double step) {
  std::vector<double> out;
  const long n = std::lround(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(start + step * static_cast<double>(i));
  return out;
}

double start_gain(double eta_link, double gain_hi) {
  // the optimum sits near g^2 eta ~ 1/2 over the whole distance range
  return std::clamp(std::sqrt(0.5 / eta_link), 1.0, gain_hi);
}

nlohmann::json optional_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(); }

struct KeyJob {
  double distance;
  double gain_max;
  BoundMode bound;
};

ChainConfig chain_template(const ExperimentConfig& cfg, double distance, BoundMode bound) {
  ChainConfig c;
  c.n_levels = cfg.n_levels();
  c.total_distance_km = distance;
  c.cutoff = cfg.cutoff;
  c.beta = cfg.beta;
  c.protocol = cfg.protocol;
  c.bound = bound;
  c.gamma_max = cfg.gamma_max.empty() ? default_gamma_max(c.n_levels, cfg.protocol, bound) : cfg.gamma_max;
  return c;
}

ResultRow run_key_job(const ExperimentConfig& cfg, const KeyJob& job) {
  ChainConfig c = chain_template(cfg, job.distance, job.bound);
  OptimizeSettings s = cfg.optimizer;
  s.gain_hi = job.gain_max;
  s.fix_chi = cfg.chi.has_value();
  c.chi = cfg.chi.value_or(0.35);
  c.gain = start_gain(c.link_eta(), s.gain_hi);
  if (cfg.kind == ExperimentKind::optimize) {
    s.optimize_gamma = true;
    s.restarts = std::max(s.restarts, 2);
  }
  ResultRow row = optimize_point(c, s);
  row.experiment = to_string(cfg.kind);
  row.gain_max = job.gain_max;
  if (job.distance > 0.0) row.direct_key = direct_transmission_key(job.distance, cfg.beta).key;
  check_physical(row);
  return row;
}

std::optional<double> crossing_of(const std::vector<ResultRow>& rows, double gain_max, BoundMode bound,
                                  bool direct) {
  std::vector<double> x, lhs, rhs;
  for (const ResultRow& r : rows) {
    if (r.gain_max != gain_max || r.bound != bound) continue;
    const std::optional<double>& base = direct ? r.direct_key : r.plob;
    if (!base) continue;
    x.push_back(r.distance_km);
    lhs.push_back(r.secret_key_rate);
    rhs.push_back(*base);
  }
  return tabulated_crossing(x, lhs, rhs);
}

std::vector<BoundMode> bound_modes(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::bounds && !cfg.bound) {
    std::vector<BoundMode> modes{BoundMode::lower};
    if (cfg.n_levels() == 1) modes.push_back(BoundMode::numeric);
    modes.push_back(BoundMode::upper);
    return modes;
  }
  return {cfg.bound.value_or(BoundMode::numeric)};
}

std::vector<ResultRow> key_rows(const ExperimentConfig& cfg) {
  std::vector<KeyJob> jobs;
  for (double gm : cfg.gain_max) {
    for (double d : cfg.distances_km) {
      for (BoundMode m : bound_modes(cfg)) jobs.push_back({d, gm, m});
    }
  }
  return parallel_map<KeyJob, ResultRow>(
      jobs, [&](const KeyJob& j) { return run_key_job(cfg, j); }, cfg.workers);
}

ExperimentOutput run_keyrate(const ExperimentConfig& cfg) {
  const std::vector<ResultRow> rows = key_rows(cfg);
  ExperimentOutput out;
  out.table = result_table(rows);
  for (const auto& r : rows) out.converged = out.converged && r.converged;
  nlohmann::json curves = nlohmann::json::array();
  for (double g : cfg.gain_max) {
    for (BoundMode m : bound_modes(cfg)) {
      curves.push_back({{"gain_max", g},
                        {"bound", to_string(m)},
                        {"plob_crossing_km", optional_json(crossing_of(rows, g, m, false))},
                        {"direct_key_crossing_km", optional_json(crossing_of(rows, g, m, true))}});
    }
  }
  out.summary["curves"] = curves;
  out.summary["all_converged"] = out.converged;
  int soft = 0;
  for (const auto& r : rows) soft += r.gain_above_soft_cap ? 1 : 0;
  out.summary["rows_above_soft_gain_cap"] = soft;
  return out;
}

ExperimentOutput run_eof(const ExperimentConfig& cfg) {
  struct Job {
    double distance;
    double gain_max;
  };
  std::vector<Job> jobs;
  for (double gm : cfg.gain_max) {
    for (double d : cfg.distances_km) jobs.push_back({d, gm});
  }
  const double chi = cfg.chi.value_or(0.3);
  struct Point {
    EofOptimum best;
    double direct;
  };
  const auto points = parallel_map<Job, Point>(
      jobs,
      [&](const Job& j) {
        const double eta = transmissivity(FiberChannel{j.distance});
        return Point{repeater_eof_best_gain(j.distance, cfg.n_levels(), chi, j.gain_max, 1.0, cfg.cutoff),
                     eof_direct_infinite_squeezing(eta)};
      },
      cfg.workers);
  ExperimentOutput out;
  out.table.columns = {{"distance_km", "km"}, {"n_links", "1"}, {"chi", "1"},         {"gain_max", "1"},
                       {"gain", "1"},         {"eof", "ebit"},  {"eof_direct_inf", "ebit"}};
  nlohmann::json crossings = nlohmann::json::object();
  for (double gm : cfg.gain_max) {
    std::vector<double> x, lhs, rhs;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].gain_max != gm) continue;
      x.push_back(jobs[i].distance);
      lhs.push_back(points[i].best.eof);
      rhs.push_back(points[i].direct);
    }
    crossings[format_number(gm)] = optional_json(tabulated_crossing(x, lhs, rhs));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out.table.add_row({format_number(jobs[i].distance), std::to_string(cfg.n_links), format_number(chi),
                       format_number(jobs[i].gain_max), format_number(points[i].best.gain),
                       format_number(points[i].best.eof), format_number(points[i].direct)});
  }
  out.summary["crossing_km_by_gain_max"] = crossings;
  return out;
}

ExperimentOutput run_baselines(const ExperimentConfig& cfg) {
  struct Point {
    double eta;
    std::optional<double> plob;
    DirectKeyResult direct;
    double eof_inf;
  };
  const auto points = parallel_map<double, Point>(
      cfg.distances_km,
      [&](const double& d) {
        const double eta = transmissivity(FiberChannel{d});
        Point p{eta, std::nullopt, direct_transmission_key(d, cfg.beta), 0.0};
        if (eta < 1.0) p.plob = plob(eta);
        // infinite squeezing over a lossless line carries unbounded entanglement
        if (eta < 1.0) p.eof_inf = eof_direct_infinite_squeezing(eta);
        return p;
      },
      cfg.workers);
  ExperimentOutput out;
  out.table.columns = {{"distance_km", "km"},    {"eta", "1"},        {"plob", "bit/use"},
                       {"direct_key", "bit/use"}, {"direct_chi", "1"}, {"direct_chi_at_bound", "-"},
                       {"eof_direct_inf", "ebit"}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    out.table.add_row({format_number(cfg.distances_km[i]), format_number(p.eta), format_number(p.plob),
                       format_number(p.direct.key), format_number(p.direct.chi), p.direct.at_bound ? "1" : "0",
                       p.eta < 1.0 ? format_number(p.eof_inf) : std::string{}});
  }
  out.summary["points"] = points.size();
  return out;
}

ExperimentOutput run_znp(const ExperimentConfig& cfg) {
  struct Job {
    int n;
    double p;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int n : cfg.znp_levels) {
    for (double p : cfg.znp_p) jobs.push_back({n, p, cfg.seed + jobs.size()});
  }
  struct Point {
    double exact, mc;
  };
  const auto points = parallel_map<Job, Point>(
      jobs,
      [&](const Job& j) { return Point{z_steps(j.n, j.p), z_steps_monte_carlo(j.n, j.p, cfg.trials, j.seed)}; },
      cfg.workers);
  ExperimentOutput out;
  out.table.columns = {{"n", "1"}, {"p", "1"}, {"z", "attempts"}, {"z_mc", "attempts"}, {"rel_err", "1"}};
  double worst = 0.0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const double rel = std::abs(points[i].mc - points[i].exact) / points[i].exact;
    worst = std::max(worst, rel);
    out.table.add_row({std::to_string(jobs[i].n), format_number(jobs[i].p), format_number(points[i].exact),
                       format_number(points[i].mc), format_number(rel)});
  }
  out.summary["max_relative_error"] = worst;
  out.summary["trials"] = cfg.trials;
  out.summary["seed"] = cfg.seed;
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kKindNames) {
    if (s == name) return kind;
  }
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

int ExperimentConfig::n_levels() const {
  int n = 0;
  while ((1 << (n + 1)) <= n_links) ++n;
  return n;
}

void ExperimentConfig::validate() const {
  if (n_links != 2 && n_links != 4 && n_links != 8 && n_links != 16) {
    throw std::invalid_argument("--links must be one of 2, 4, 8, 16");
  }
  if (kind == ExperimentKind::znp) {
    if (znp_levels.empty() || znp_p.empty()) throw std::invalid_argument("znp grids must be nonempty");
    for (int n : znp_levels) {
      if (n < 0 || n > 20) throw std::invalid_argument("znp levels must lie in [0, 20]");
    }
    for (double p : znp_p) {
      if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("znp probabilities must lie in (0, 1]");
    }
    if (trials < 1) throw std::invalid_argument("--trials must be >= 1");
    return;
  }
  if (distances_km.empty()) throw std::invalid_argument("distance grid is empty");
  for (double d : distances_km) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("distances must be finite and >= 0");
  }
  if (workers < 1) throw std::invalid_argument("--workers must be >= 1");
  if (kind == ExperimentKind::baselines) return;
  if (gain_max.empty()) throw std::invalid_argument("--gain-max grid is empty");
  for (double g : gain_max) NlaParams{g}.validate();
  if (chi) SourceParams{*chi}.validate();
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("--beta must lie in [0, 1]");
  if (cutoff < 2) throw std::invalid_argument("--cutoff must be >= 2");
  if (!gamma_max.empty()) {
    if (static_cast<int>(gamma_max.size()) != n_levels()) {
      throw std::invalid_argument("--gamma-max needs one value per swap level (" + std::to_string(n_levels()) +
                                  " for " + std::to_string(n_links) + " links)");
    }
    for (double g : gamma_max) {
      if (!(g > 0.0 && g <= 2.0)) throw std::invalid_argument("--gamma-max values must lie in (0, 2]");
    }
  } else if (kind != ExperimentKind::eof) {
    for (BoundMode m : bound_modes(*this)) default_gamma_max(n_levels(), protocol, m);
  }
  if (kind == ExperimentKind::eof) return;
  const bool numeric = bound ? *bound == BoundMode::numeric : kind != ExperimentKind::bounds;
  if (numeric && n_levels() > 1) {
    throw IntractableConfiguration("numeric mode integrates every outcome and is limited to two links; use "
                                   "--bound upper or --bound lower");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = to_string(kind);
  j["links"] = n_links;
  j["distance_km"] = distances_km;
  j["chi"] = optional_json(chi);
  j["gain_max"] = gain_max;
  // empty: per-mode defaults, recorded in each row
  j["gamma_max"] = gamma_max;
  j["beta"] = beta;
  j["protocol"] = to_string(protocol);
  j["bound"] = bound ? nlohmann::json(to_string(*bound)) : nlohmann::json();
  j["cutoff"] = cutoff;
  j["seed"] = seed;
  j["trials"] = trials;
  j["znp_levels"] = znp_levels;
  j["znp_p"] = znp_p;
  j["optimizer"] = {{"method", "nelder-mead"},
                    {"chi_range", {optimizer.chi_lo, optimizer.chi_hi}},
                    {"gain_min", optimizer.gain_lo},
                    {"restarts", optimizer.restarts},
                    {"max_evaluations", optimizer.max_evaluations},
                    {"x_tolerance", optimizer.x_tolerance},
                    {"f_tolerance", optimizer.f_tolerance}};
  // workers is left out: it does not change the output
  return j;
}

ExperimentConfig preset(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.workers = default_workers();
  c.gain_max = {NlaParams::kMaxGain};
  switch (kind) {
    case ExperimentKind::eof:
      c.distances_km = range(10.0, 150.0, 5.0);
      c.chi = 0.3;
      c.gain_max = {3.0, 4.0, 5.0, 6.0, 7.0};
      break;
    case ExperimentKind::keyrate:
      c.distances_km = range(250.0, 400.0, 5.0);
      break;
    case ExperimentKind::bounds:
      c.distances_km = range(250.0, 350.0, 25.0);
      break;
    case ExperimentKind::baselines:
      c.distances_km = range(0.0, 400.0, 25.0);
      break;
    case ExperimentKind::znp:
      break;
    case ExperimentKind::optimize:
      c.distances_km = {300.0};
      break;
  }
  return c;
}

std::vector<double> parse_distance_grid(const std::vector<std::string>& specs) {
  std::vector<double> out;
  for (const std::string& s : specs) {
    const auto c1 = s.find(':');
    try {
      if (c1 == std::string::npos) {
        std::size_t used = 0;
        out.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
        continue;
      }
      const auto c2 = s.find(':', c1 + 1);
      if (c2 == std::string::npos) throw std::invalid_argument(s);
      const double start = std::stod(s.substr(0, c1));
      const double stop = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
      const double step = std::stod(s.substr(c2 + 1));
      if (!(step > 0.0) || stop < start) throw std::invalid_argument(s);
      const auto r = range(start, stop, step);
      out.insert(out.end(), r.begin(), r.end());
    } catch (const std::exception&) {
      throw std::invalid_argument("bad distance '" + s + "' (expected a number or start:stop:step)");
    }
  }
  return out;
}

std::vector<double> default_gamma_max(int n_levels, Protocol protocol, BoundMode bound) {
  if (bound == BoundMode::lower && n_levels > 1) return preset_lower_gamma_max(n_levels);
  return std::vector<double>(static_cast<std::size_t>(n_levels), protocol == Protocol::heterodyne ? 0.4 : 0.5);
}

std::vector<ResultRow> run_key_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::keyrate && cfg.kind != ExperimentKind::bounds &&
      cfg.kind != ExperimentKind::optimize) {
    throw std::invalid_argument("run_key_sweep: not a key-rate experiment");
  }
  return key_rows(cfg);
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case ExperimentKind::eof:
      return run_eof(cfg);
    case ExperimentKind::keyrate:
    case ExperimentKind::bounds:
    case ExperimentKind::optimize:
      return run_keyrate(cfg);
    case ExperimentKind::baselines:
      return run_baselines(cfg);
    case ExperimentKind::znp:
      return run_znp(cfg);
  }
  throw std::logic_error("unhandled experiment kind");
}

}  // namespace cvrep
