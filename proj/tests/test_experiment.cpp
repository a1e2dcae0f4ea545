#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <rbal/errors.hpp>
#include <rbal/experiment.hpp>

using namespace rbal;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config(const std::string& out_dir) {
  nlohmann::json doc;
  doc["dataset"] = {{"type", "synthetic"},
                    {"cycles", 2},
                    {"points_per_cycle_per_class", {20, 20, 20, 20}},
                    {"first_cycle_trim", 0},
                    {"seed", 3}};
  doc["process"] = std::string(RBAL_CONFIG_DIR) + "/synthetic_process.json";
  doc["agents"] = nlohmann::json::array({{{"classifier", "gmm"}}});
  doc["init_label_fraction"] = 0.1;
  doc["output_dir"] = out_dir;
  return doc;
}

std::string slurp(const fs::path& path) {
  std::ifstream file(path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config applies the documented defaults") {
  const ExperimentConfig config = parse_config_json(minimal_config("out"));
  CHECK(config.repetitions == 100);
  CHECK(config.test_fraction == 0.5);
  CHECK(config.base_seed == 0);
  CHECK(config.first_repetition == 0);
  CHECK(config.agents.size() == 1);
  CHECK(config.agents[0].name == "gmm");
  CHECK(config.agents[0].random_baseline);
}

TEST_CASE("config round-trips through serialize and parse") {
  ExperimentConfig config = parse_config_json(minimal_config("out"));
  config.repetitions = 7;
  config.agents[0].kernel_gamma = 0.37;
  config.agents[0].decision_mode = DecisionMode::kScripted;
  const ExperimentConfig reparsed = parse_config_json(config_to_json(config));
  CHECK(reparsed.repetitions == 7);
  CHECK(reparsed.agents[0].kernel_gamma == 0.37);
  CHECK(reparsed.agents[0].decision_mode == DecisionMode::kScripted);
  CHECK(config_to_json(reparsed) == config_to_json(config));
}

TEST_CASE("validation errors carry json pointers") {
  nlohmann::json doc = minimal_config("out");
  doc["repetitions"] = 0;
  CHECK_THROWS_WITH_AS(parse_config_json(doc), doctest::Contains("/repetitions"),
                       ConfigError);

  doc = minimal_config("out");
  doc["agents"][0]["classifierr"] = "gmm";
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("/agents/0/classifierr"), ConfigError);

  doc = minimal_config("out");
  doc["agents"][0]["alpha"] = "high";
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("/agents/0/alpha"), ConfigError);

  doc = minimal_config("out");
  doc["dataset"]["type"] = "parquet";
  CHECK_THROWS_WITH_AS(parse_config_json(doc), doctest::Contains("/dataset/type"),
                       ConfigError);

  doc = minimal_config("out");
  doc.erase("process");
  CHECK_THROWS_WITH_AS(parse_config_json(doc), doctest::Contains("/process"),
                       ConfigError);
}

TEST_CASE("single repetition produces the three report files") {
  const fs::path dir = fresh_dir("rbal_exp_single");
  ExperimentConfig config = parse_config_json(minimal_config(dir.string()));
  config.repetitions = 1;
  config.workers = 1;
  CHECK(run_experiment(config) == 0);
  CHECK(fs::exists(dir / "per_query.csv"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "aggregate.json"));

  // Baseline rows ride along with the agent rows.
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.find("gmm,") != std::string::npos);
  CHECK(summary.find("gmm_random,") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  const fs::path dir_a = fresh_dir("rbal_exp_rerun_a");
  const fs::path dir_b = fresh_dir("rbal_exp_rerun_b");
  ExperimentConfig config = parse_config_json(minimal_config(dir_a.string()));
  config.repetitions = 2;
  config.workers = 2;
  REQUIRE(run_experiment(config) == 0);
  config.output_dir = dir_b.string();
  REQUIRE(run_experiment(config) == 0);
  CHECK(slurp(dir_a / "per_query.csv") == slurp(dir_b / "per_query.csv"));
  CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
  CHECK(slurp(dir_a / "aggregate.json") == slurp(dir_b / "aggregate.json"));
}

TEST_CASE("a repetition re-executed standalone reproduces its rows") {
  const fs::path dir_full = fresh_dir("rbal_exp_std_full");
  const fs::path dir_one = fresh_dir("rbal_exp_std_one");
  ExperimentConfig config = parse_config_json(minimal_config(dir_full.string()));
  config.repetitions = 3;
  REQUIRE(run_experiment(config) == 0);

  config.repetitions = 1;
  config.first_repetition = 1;
  config.output_dir = dir_one.string();
  REQUIRE(run_experiment(config) == 0);

  // Every row of the standalone run appears verbatim in the full run.
  std::ifstream full(dir_full / "per_query.csv");
  std::vector<std::string> full_rows;
  std::string line;
  while (std::getline(full, line)) full_rows.push_back(line);
  std::ifstream one(dir_one / "per_query.csv");
  std::vector<std::string> one_rows;
  while (std::getline(one, line)) one_rows.push_back(line);
  REQUIRE(one_rows.size() > 1);
  CHECK(one_rows[0] == full_rows[0]);  // header
  std::vector<std::string> full_rep1;
  for (const std::string& row : full_rows) {
    if (row.rfind("1,", 0) == 0) full_rep1.push_back(row);
  }
  CHECK(std::vector<std::string>(one_rows.begin() + 1, one_rows.end()) == full_rep1);
}

TEST_CASE("two agents aggregate into separate blocks") {
  const fs::path dir = fresh_dir("rbal_exp_two_agents");
  nlohmann::json doc = minimal_config(dir.string());
  doc["agents"] = nlohmann::json::array(
      {{{"classifier", "gmm"}, {"name", "gmm"}},
       {{"classifier", "gmm_em"}, {"name", "gmm_em"}, {"random_baseline", false}}});
  doc["repetitions"] = 2;
  ExperimentConfig config = parse_config_json(doc);
  REQUIRE(run_experiment(config) == 0);
  nlohmann::json agg;
  std::ifstream(dir / "aggregate.json") >> agg;
  CHECK(agg["agents"].contains("gmm"));
  CHECK(agg["agents"].contains("gmm_random"));
  CHECK(agg["agents"].contains("gmm_em"));
  CHECK_FALSE(agg["agents"].contains("gmm_em_random"));
  CHECK(agg["agents"]["gmm"]["repetitions_ok"] == 2);
  CHECK(agg["agents"]["gmm"]["query_count"].contains("median"));

  // report regeneration agrees with the simulate-time aggregate on medians.
  const nlohmann::json before = agg;
  REQUIRE(regenerate_aggregate(dir.string()) == 0);
  std::ifstream(dir / "aggregate.json") >> agg;
  CHECK(agg["agents"]["gmm"]["decision_accuracy"]["median"] ==
        before["agents"]["gmm"]["decision_accuracy"]["median"]);
  CHECK(agg["agents"]["gmm"]["query_count"]["median"] ==
        before["agents"]["gmm"]["query_count"]["median"]);
}

TEST_CASE("per_query rows carry the repetition seed") {
  const fs::path dir = fresh_dir("rbal_exp_seed_col");
  ExperimentConfig config = parse_config_json(minimal_config(dir.string()));
  config.repetitions = 1;
  config.base_seed = 77;
  REQUIRE(run_experiment(config) == 0);
  std::ifstream file(dir / "per_query.csv");
  std::string header;
  std::getline(file, header);
  CHECK(header.rfind("repetition,seed,agent,query_index,observation_index,evpi,"
                     "decision_accuracy,macro_f1,class_prop_1",
                     0) == 0);
  std::string row;
  std::getline(file, row);
  CHECK(row.rfind("0,77,gmm,0,-1,", 0) == 0);
}
