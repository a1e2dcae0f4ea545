// Command-line harness around the rbal library: dataset generation/import,
// experiment simulation across seeded repetitions, and report aggregation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rbal/dataset.hpp"
#include "rbal/errors.hpp"
#include "rbal/experiment.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_dataset_csv(const rbal::Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw rbal::DataError("cannot write " + path);
  const int dims = data.dim();
  for (int d = 1; d <= dims; ++d) out << 'x' << d << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int d = 0; d < dims; ++d) {
      out << format_double(data.observations[i].features[d]) << ',';
    }
    out << data.labels[i] << "\n";
  }
}

void print_dataset_summary(const rbal::Dataset& data) {
  std::map<int, std::size_t> class_counts;
  for (int label : data.labels) class_counts[label] += 1;
  std::cout << "observations: " << data.size() << "\n"
            << "feature dimensions: " << data.dim() << "\n"
            << "classes: " << data.num_classes << "\n";
  for (const auto& [label, count] : class_counts) {
    std::cout << "  class " << label << ": " << count << "\n";
  }
}

int run_dataset_gen(const std::string& config_path, const std::string& out_dir) {
  std::ifstream file(config_path);
  if (!file) throw rbal::ConfigError("cannot open config file: " + config_path);
  nlohmann::json doc;
  try {
    file >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw rbal::ConfigError("config file " + config_path + ": " + e.what());
  }
  // Accept a full experiment config (uses its dataset block) or a bare
  // dataset spec document.
  rbal::Dataset data;
  if (doc.contains("dataset")) {
    data = rbal::parse_config_json(doc).dataset.load();
  } else {
    nlohmann::json wrapper;
    wrapper["dataset"] = doc;
    wrapper["process"] = "unused";
    wrapper["agents"] = nlohmann::json::array({{{"classifier", "gmm"}}});
    data = rbal::parse_config_json(wrapper).dataset.load();
  }
  std::filesystem::create_directories(out_dir);
  const std::string path =
      (std::filesystem::path(out_dir) / "dataset.csv").string();
  write_dataset_csv(data, path);
  std::cout << "wrote " << path << "\n";
  print_dataset_summary(data);
  return 0;
}

int run_dataset_import(const std::string& csv_path, std::optional<int> dims,
                       bool damage_split, int damage_start_row,
                       const std::string& out_dir) {
  rbal::Dataset data = rbal::import_labelled_csv(csv_path, dims);
  if (damage_split) rbal::derive_damage_split(data, damage_start_row);
  print_dataset_summary(data);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string path =
        (std::filesystem::path(out_dir) / "dataset.csv").string();
    write_dataset_csv(data, path);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-based active learning for decision-supporting classifiers"};
  app.require_subcommand(1);

  // dataset gen/import
  CLI::App* dataset = app.add_subcommand("dataset", "Generate or import datasets");
  dataset->require_subcommand(1);

  std::string gen_config;
  std::string gen_out = "out";
  CLI::App* gen = dataset->add_subcommand("gen", "Generate a synthetic dataset CSV");
  gen->add_option("--config", gen_config, "Experiment or dataset config (JSON)")
      ->required();
  gen->add_option("--out", gen_out, "Output directory (default: out)");

  std::string import_path;
  std::optional<int> import_dims;
  bool import_damage_split = false;
  int import_damage_row = 3476;
  std::string import_out;
  CLI::App* import_cmd =
      dataset->add_subcommand("import", "Validate and summarize a labelled CSV");
  import_cmd->add_option("csv", import_path, "Labelled feature CSV")->required();
  import_cmd->add_option("--dims", import_dims, "Expected feature dimension count");
  import_cmd->add_flag("--derive-damage-split", import_damage_split,
                       "Relabel the damage rows into classes 3/4 halves");
  import_cmd->add_option("--damage-start-row", import_damage_row,
                         "First damaged row, 1-based (default: 3476)");
  import_cmd->add_option("--out", import_out,
                         "Optional directory for the normalized CSV copy");

  // simulate
  std::string sim_config;
  std::optional<int> sim_reps;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::string> sim_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run the configured campaigns across seeds");
  simulate->add_option("--config", sim_config, "Experiment config (JSON)")->required();
  simulate->add_option("--reps", sim_reps, "Override the repetition count");
  simulate->add_option("--seed", sim_seed, "Override the base seed");
  simulate->add_option("--out", sim_out, "Override the output directory");

  // report
  std::string report_out = "out";
  CLI::App* report =
      app.add_subcommand("report", "Rebuild aggregate.json from the run CSVs");
  report->add_option("--out", report_out, "Directory holding per_query.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_dataset_gen(gen_config, gen_out);
    if (import_cmd->parsed()) {
      return run_dataset_import(import_path, import_dims, import_damage_split,
                                import_damage_row, import_out);
    }
    if (simulate->parsed()) {
      rbal::ExperimentConfig config = rbal::parse_config(sim_config);
      if (sim_reps) config.repetitions = *sim_reps;
      if (sim_seed) config.base_seed = *sim_seed;
      if (sim_out) config.output_dir = *sim_out;
      config.validate();
      return rbal::run_experiment(config);
    }
    if (report->parsed()) return rbal::regenerate_aggregate(report_out);
  } catch (const rbal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return 0;
}
