// cvrep: runs repeater experiments and writes CSV tables with JSON sidecars.

#include "cvrep/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

// Reads JSON config files; anything else goes to CLI11's TOML reader.
class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buf;
    buf << input.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      return CLI::ConfigTOML::from_config(again);
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_null()) continue;
      CLI::ConfigItem item;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      auto cell = [](const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_object()) throw CLI::ConversionError("config", "nested objects are not supported");
        return v.dump();
      };
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(cell(v));
      } else {
        item.inputs.push_back(cell(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

constexpr int kConfigError = 2;
constexpr int kConvergenceError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace cvrep;
  CLI::App app{"Continuous-variable quantum repeater experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonOrTomlConfig>());
  app.set_config("--config", "", "TOML or JSON file with option values");

  int links = 2;
  std::vector<std::string> distances;
  double chi = 0.0;
  std::vector<double> gain_max, gamma_max;
  double beta = 0.95;
  std::string protocol = "hom", bound;
  int cutoff = 12;
  int workers = default_workers();
  std::string out;
  std::uint64_t seed = 1;
  long trials = 1000000;
  std::vector<int> levels;
  std::vector<double> probs;
  int restarts = 1, max_evals = 400;
  double xtol = 1e-6, ftol = 1e-9;

  auto* o_links = app.add_option("--links", links, "number of elementary links")
                      ->check(CLI::IsMember({2, 4, 8, 16}));
  auto* o_dist = app.add_option("--distance-km", distances, "distances or start:stop:step ranges");
  auto* o_chi = app.add_option("--chi", chi, "fixed TMSV squeezing parameter (optimised when absent)");
  auto* o_gain = app.add_option("--gain-max", gain_max, "upper bound on the scissor gain; repeat for several curves");
  auto* o_gamma = app.add_option("--gamma-max", gamma_max, "post-selection radius per swap level, base level first");
  app.add_option("--beta", beta, "reconciliation efficiency")->capture_default_str();
  app.add_option("--protocol", protocol, "hom or het")->check(CLI::IsMember({"hom", "het"}))->capture_default_str();
  auto* o_bound = app.add_option("--bound", bound, "numeric, upper or lower")
                      ->check(CLI::IsMember({"numeric", "upper", "lower"}));
  app.add_option("--cutoff", cutoff, "Fock cutoff of source modes")->capture_default_str();
  app.add_option("--workers", workers, "worker threads (default from CVREP_WORKERS)")->capture_default_str();
  app.add_option("--out", out, "CSV output path (default <experiment>.csv)");
  app.add_option("--seed", seed, "Monte-Carlo seed")->capture_default_str();
  app.add_option("--trials", trials, "Monte-Carlo trials per point")->capture_default_str();
  auto* o_levels = app.add_option("--levels", levels, "znp: nesting levels n");
  auto* o_probs = app.add_option("--p", probs, "znp: per-attempt success probabilities");
  app.add_option("--restarts", restarts, "optimizer restarts")->capture_default_str();
  app.add_option("--max-evals", max_evals, "optimizer evaluation budget per start")->capture_default_str();
  app.add_option("--xtol", xtol, "optimizer simplex size tolerance")->capture_default_str();
  app.add_option("--ftol", ftol, "optimizer relative value tolerance")->capture_default_str();

  const std::pair<const char*, const char*> subcommands[] = {
      {"eof", "entanglement of formation vs distance at vanishing post-selection"},
      {"keyrate", "optimised secret key rate vs distance"},
      {"bounds", "upper, numeric and lower key-rate estimates vs distance"},
      {"baselines", "PLOB bound, direct-transmission key and EOF vs distance"},
      {"znp", "expected attempts Z_n(p) against Monte Carlo"},
      {"optimize", "optimise squeezing, gain and post-selection radius"},
  };
  for (const auto& [name, help] : subcommands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = preset(experiment_kind_from_string(app.get_subcommands().front()->get_name()));
    if (o_links->count()) cfg.n_links = links;
    if (o_dist->count()) cfg.distances_km = parse_distance_grid(distances);
    if (o_chi->count()) cfg.chi = chi;
    if (o_gain->count()) cfg.gain_max = gain_max;
    if (o_gamma->count()) cfg.gamma_max = gamma_max;
    if (o_bound->count()) cfg.bound = bound_mode_from_string(bound);
    if (o_levels->count()) cfg.znp_levels = levels;
    if (o_probs->count()) cfg.znp_p = probs;
    cfg.beta = beta;
    cfg.protocol = protocol_from_string(protocol);
    cfg.cutoff = cutoff;
    cfg.workers = workers;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.optimizer.restarts = restarts;
    cfg.optimizer.max_evaluations = max_evals;
    cfg.optimizer.x_tolerance = xtol;
    cfg.optimizer.f_tolerance = ftol;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const ExperimentOutput result = run_experiment(cfg);
    const std::string path = out.empty() ? to_string(cfg.kind) + ".csv" : out;
    const WrittenOutput w = write_outputs(path, result.table, cfg.to_json(), result.summary);
    std::cout << "wrote " << result.table.rows.size() << " rows to " << w.csv.string() << " (sidecar "
              << w.sidecar.string() << ")\n"
              << result.summary.dump(2) << '\n';
    if (!result.converged) {
      std::cerr << "optimizer did not converge for some rows; they are flagged converged=0\n";
      return kConvergenceError;
    }
  } catch (const PhysicalityError& e) {
    std::cerr << "physicality check failed: " << e.what() << '\n';
    return kConvergenceError;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kConvergenceError;
  }
  return 0;
}
