#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cvrep/report.hpp"
#include "cvrep/runner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace cvrep;

TEST_CASE("blob hash matches git hash-object") {
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333");
  CHECK(format_number(std::optional<double>{}) == "");
  CHECK(format_list({0.2, 0.45}) == "0.2;0.45");
  CHECK_THROWS(format_number(NAN));
  CHECK_THROWS(format_number(INFINITY));
}

TEST_CASE("tables reject ragged rows") {
  Table t;
  t.columns = {{"x", "1"}, {"y", "1"}};
  CHECK_NOTHROW(t.add_row({"1", "2"}));
  CHECK_THROWS_AS(t.add_row({"1"}), std::logic_error);
  CHECK(csv_body(t) == "x,y\n1,2\n");
  const std::string full = render_csv(t, "abc");
  CHECK(full.rfind("# cvrepeater result table\n", 0) == 0);
  CHECK(full.find("# config_hash: abc\n") != std::string::npos);
  CHECK(full.find("# units: x=1 y=1\n") != std::string::npos);
}

TEST_CASE("distance grids") {
  CHECK(parse_distance_grid({"250:270:10"}) == std::vector<double>{250, 260, 270});
  CHECK(parse_distance_grid({"5", "0:1:0.5"}) == std::vector<double>{5, 0, 0.5, 1});
  CHECK_THROWS_AS(parse_distance_grid({"10:5:1"}), std::invalid_argument);
  CHECK_THROWS_AS(parse_distance_grid({"abc"}), std::invalid_argument);
  CHECK_THROWS_AS(parse_distance_grid({"1:2"}), std::invalid_argument);
}

TEST_CASE("configuration validation") {
  ExperimentConfig c = preset(ExperimentKind::keyrate);
  CHECK_NOTHROW(c.validate());
  c.n_links = 3;
  CHECK_THROWS(c.validate());
  c.n_links = 4;
  CHECK_THROWS_AS(c.validate(), IntractableConfiguration);
  c.bound = BoundMode::upper;
  CHECK_NOTHROW(c.validate());
  c.gamma_max = {0.5};
  CHECK_THROWS(c.validate());
  c = preset(ExperimentKind::keyrate);
  c.gain_max = {200.0};
  CHECK_THROWS(c.validate());
  c = preset(ExperimentKind::keyrate);
  c.distances_km = {};
  CHECK_THROWS(c.validate());
  c.distances_km = {-5};
  CHECK_THROWS(c.validate());
  CHECK(experiment_kind_from_string("znp") == ExperimentKind::znp);
  CHECK_THROWS(experiment_kind_from_string("plot"));
}

TEST_CASE("tables are byte-identical across worker counts and runs") {
  ExperimentConfig c = preset(ExperimentKind::znp);
  c.trials = 20000;
  c.znp_levels = {0, 2};
  c.workers = 1;
  const std::string one = csv_body(run_experiment(c).table);
  c.workers = 3;
  const std::string three = csv_body(run_experiment(c).table);
  CHECK(one == three);
  CHECK(one == csv_body(run_experiment(c).table));

  ExperimentConfig k = preset(ExperimentKind::keyrate);
  k.distances_km = {200, 260};
  k.chi = 0.36;
  k.optimizer.max_evaluations = 40;
  k.workers = 1;
  const std::string a = csv_body(run_experiment(k).table);
  k.workers = 2;
  CHECK(a == csv_body(run_experiment(k).table));
}

TEST_CASE("written outputs carry the hashes of their content") {
  ExperimentConfig c = preset(ExperimentKind::baselines);
  c.distances_km = {0, 100};
  const ExperimentOutput out = run_experiment(c);
  const auto path = std::filesystem::temp_directory_path() / "cvrep_test_report" / "baselines.csv";
  const WrittenOutput w = write_outputs(path, out.table, c.to_json(), out.summary);
  std::ifstream f(w.csv);
  std::stringstream text;
  text << f.rdbuf();
  CHECK(text.str() == render_csv(out.table, w.config_hash));
  CHECK(w.body_hash == git_blob_sha1(csv_body(out.table)));
  std::ifstream s(w.sidecar);
  const nlohmann::json side = nlohmann::json::parse(s);
  CHECK(side["config_hash"] == w.config_hash);
  CHECK(side["config"] == c.to_json());
  CHECK(side["schema_version"] == kSchemaVersion);
  CHECK(side["rows"] == 2);
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("result rows keep every level base first") {
  ResultRow r;
  r.gamma_max = {0.2, 0.45};
  r.p_ps = {0.9, 0.3};  // final swap first
  r.lambdas = {{1, 2}, {3, 4}};
  const Table t = result_table({r});
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      if (t.columns[i].name == name) return t.rows[0][i];
    }
    return std::string("?");
  };
  CHECK(col("gamma_max") == "0.2;0.45");
  CHECK(col("p_ps") == "0.3;0.9");
  CHECK(col("lambda_b") == "2;4");
  CHECK(col("plob") == "");
}
