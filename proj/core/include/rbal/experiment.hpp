#ifndef RBAL_EXPERIMENT_HPP
#define RBAL_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rbal/campaign.hpp"
#include "rbal/dataset.hpp"

namespace rbal {

// Where the observations come from: a synthetic generator config or a
// labelled feature CSV.
struct DatasetSpec {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticConfig synthetic = SyntheticConfig::default_config();
  std::string csv_path;
  std::optional<int> expected_dims;
  bool derive_damage_split = false;
  int damage_start_row = 3476;

  Dataset load() const;
};

// JSON-facing agent description; resolved to an AgentConfig once the decision
// process and dataset dimensionality are known.
struct AgentSpec {
  std::string name = "gmm";
  ClassifierKind classifier = ClassifierKind::kGmm;
  DecisionMode decision_mode = DecisionMode::kAgent;
  bool random_baseline = true;
  double alpha = 1.0;
  EmOptions em;
  TrainHyper mrvm;
  std::optional<double> kernel_gamma;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::string process_path;
  std::vector<AgentSpec> agents;
  int repetitions = 100;
  int first_repetition = 0;
  std::uint64_t base_seed = 0;
  double test_fraction = 0.5;
  double init_label_fraction = 0.002;
  std::string output_dir = "out";
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Parses and fully validates a config document; errors carry a JSON pointer
// to the offending field.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Runs repetitions x agents (plus count-matched random baselines), writing
// per_query.csv, summary.csv and aggregate.json under output_dir. Repetition
// r uses seed base_seed + first_repetition + r; rerunning any repetition
// standalone (repetitions=1, first_repetition=r) reproduces its rows byte for
// byte. Returns 0 on success, 3 when every repetition of some agent failed.
int run_experiment(const ExperimentConfig& config);

// Rebuilds aggregate.json from the per_query/summary CSVs in output_dir.
int regenerate_aggregate(const std::string& output_dir);

}  // namespace rbal

#endif  // RBAL_EXPERIMENT_HPP
