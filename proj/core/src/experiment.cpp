#include "rbal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "rbal/errors.hpp"
#include "rbal/metrics.hpp"

namespace rbal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw ConfigError(pointer + ": " + message);
}

void check_keys(const json& obj, const std::string& pointer,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(pointer, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(pointer + "/" + item.key(), "unknown key");
  }
}

template <typename T>
T get_required(const json& obj, const std::string& pointer, const char* key) {
  if (!obj.contains(key)) fail(pointer + "/" + key, "required field is missing");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(pointer + "/" + key, "type mismatch");
  }
}

template <typename T>
T get_optional(const json& obj, const std::string& pointer, const char* key,
               T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(pointer + "/" + key, "type mismatch");
  }
}

DatasetSpec parse_dataset(const json& obj, const std::string& pointer) {
  DatasetSpec spec;
  const std::string type = get_required<std::string>(obj, pointer, "type");
  if (type == "synthetic") {
    check_keys(obj, pointer,
               {"type", "cycles", "points_per_cycle_per_class", "first_cycle_trim",
                "seed", "class_means", "class_covariances"});
    spec.kind = DatasetSpec::Kind::kSynthetic;
    SyntheticConfig config = SyntheticConfig::default_config();
    config.cycles = get_optional<int>(obj, pointer, "cycles", config.cycles);
    config.points_per_cycle_per_class = get_optional<std::vector<int>>(
        obj, pointer, "points_per_cycle_per_class", config.points_per_cycle_per_class);
    config.first_cycle_trim =
        get_optional<int>(obj, pointer, "first_cycle_trim", config.first_cycle_trim);
    config.seed = get_optional<std::uint64_t>(obj, pointer, "seed", config.seed);
    if (obj.contains("class_means")) {
      const auto means =
          get_required<std::vector<std::vector<double>>>(obj, pointer, "class_means");
      config.class_means.clear();
      for (const auto& m : means) {
        config.class_means.push_back(Eigen::Map<const Vec>(m.data(), m.size()));
      }
    }
    if (obj.contains("class_covariances")) {
      const auto covs = get_required<std::vector<std::vector<std::vector<double>>>>(
          obj, pointer, "class_covariances");
      config.class_covariances.clear();
      for (const auto& c : covs) {
        Mat cov(c.size(), c.empty() ? 0 : c[0].size());
        for (std::size_t r = 0; r < c.size(); ++r) {
          if (c[r].size() != static_cast<std::size_t>(cov.cols())) {
            fail(pointer + "/class_covariances", "ragged covariance rows");
          }
          for (std::size_t k = 0; k < c[r].size(); ++k) cov(r, k) = c[r][k];
        }
        config.class_covariances.push_back(std::move(cov));
      }
    } else if (obj.contains("class_means")) {
      const Eigen::Index dim = config.class_means.empty()
                                   ? 2
                                   : config.class_means[0].size();
      config.class_covariances.assign(config.class_means.size(),
                                      Mat::Identity(dim, dim));
    }
    try {
      config.validate();
    } catch (const Error& e) {
      fail(pointer, e.what());
    }
    spec.synthetic = std::move(config);
  } else if (type == "csv") {
    check_keys(obj, pointer,
               {"type", "path", "expected_dims", "derive_damage_split",
                "damage_start_row"});
    spec.kind = DatasetSpec::Kind::kCsv;
    spec.csv_path = get_required<std::string>(obj, pointer, "path");
    if (obj.contains("expected_dims")) {
      spec.expected_dims = get_required<int>(obj, pointer, "expected_dims");
    }
    spec.derive_damage_split =
        get_optional<bool>(obj, pointer, "derive_damage_split", false);
    spec.damage_start_row =
        get_optional<int>(obj, pointer, "damage_start_row", 3476);
  } else {
    fail(pointer + "/type", "must be 'synthetic' or 'csv'");
  }
  return spec;
}

AgentSpec parse_agent(const json& obj, const std::string& pointer) {
  check_keys(obj, pointer,
             {"name", "classifier", "decision_mode", "random_baseline", "alpha",
              "em", "mrvm", "kernel_gamma"});
  AgentSpec agent;
  agent.classifier = classifier_kind_from_string(
      get_required<std::string>(obj, pointer, "classifier"));
  agent.name = get_optional<std::string>(obj, pointer, "name",
                                         to_string(agent.classifier));
  const std::string mode =
      get_optional<std::string>(obj, pointer, "decision_mode", "agent");
  if (mode == "agent") {
    agent.decision_mode = DecisionMode::kAgent;
  } else if (mode == "scripted") {
    agent.decision_mode = DecisionMode::kScripted;
  } else {
    fail(pointer + "/decision_mode", "must be 'agent' or 'scripted'");
  }
  agent.random_baseline = get_optional<bool>(obj, pointer, "random_baseline", true);
  agent.alpha = get_optional<double>(obj, pointer, "alpha", 1.0);
  if (!(agent.alpha > 0.0)) fail(pointer + "/alpha", "must be positive");
  if (obj.contains("em")) {
    const json& em = obj.at("em");
    check_keys(em, pointer + "/em", {"tol", "max_iter"});
    agent.em.tol = get_optional<double>(em, pointer + "/em", "tol", agent.em.tol);
    agent.em.max_iter =
        get_optional<int>(em, pointer + "/em", "max_iter", agent.em.max_iter);
    if (agent.em.max_iter < 1) fail(pointer + "/em/max_iter", "must be >= 1");
    if (!(agent.em.tol > 0.0)) fail(pointer + "/em/tol", "must be positive");
  }
  if (obj.contains("mrvm")) {
    const json& mrvm = obj.at("mrvm");
    const std::string p = pointer + "/mrvm";
    check_keys(mrvm, p,
               {"tau", "nu", "max_iter", "conv_tol", "quad_nodes",
                "prune_threshold"});
    agent.mrvm.tau = get_optional<double>(mrvm, p, "tau", agent.mrvm.tau);
    agent.mrvm.nu = get_optional<double>(mrvm, p, "nu", agent.mrvm.nu);
    agent.mrvm.max_iter = get_optional<int>(mrvm, p, "max_iter", agent.mrvm.max_iter);
    agent.mrvm.conv_tol =
        get_optional<double>(mrvm, p, "conv_tol", agent.mrvm.conv_tol);
    agent.mrvm.quad_nodes =
        get_optional<int>(mrvm, p, "quad_nodes", agent.mrvm.quad_nodes);
    agent.mrvm.prune_threshold =
        get_optional<double>(mrvm, p, "prune_threshold", agent.mrvm.prune_threshold);
    try {
      agent.mrvm.validate();
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }
  if (obj.contains("kernel_gamma")) {
    agent.kernel_gamma = get_required<double>(obj, pointer, "kernel_gamma");
    if (!(*agent.kernel_gamma > 0.0)) fail(pointer + "/kernel_gamma", "must be positive");
  }
  return agent;
}

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct RunRecord {
  int repetition = 0;
  std::uint64_t seed = 0;
  std::string agent;
  bool ok = false;
  std::string error;
  CampaignResult result;
};

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

json track_to_json(const MetricTrack& track) {
  return json{{"median", track.median},
              {"iqr", track.iqr},
              {"mean", track.mean},
              {"stddev", track.stddev}};
}

json histogram_to_json(const Histogram& hist) {
  return json{{"bin_width", hist.bin_width}, {"counts", hist.counts}};
}

json aggregate_to_json(const RunAggregate& agg) {
  std::vector<double> counts(agg.query_counts.begin(), agg.query_counts.end());
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= counts.empty() ? 1.0 : static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  const double stddev =
      counts.size() > 1 ? std::sqrt(var / static_cast<double>(counts.size() - 1)) : 0.0;
  std::vector<double> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted.empty() ? 0.0 : sorted[(sorted.size() - 1) / 4];
  const double q3 = sorted.empty() ? 0.0 : sorted[3 * (sorted.size() - 1) / 4];

  json doc;
  doc["query_count"] = {{"median", median_of(counts)},
                        {"iqr", q3 - q1},
                        {"mean", mean},
                        {"stddev", stddev},
                        {"histogram", histogram_to_json(agg.query_count_hist)}};
  doc["decision_accuracy"] = track_to_json(agg.decision_accuracy);
  doc["macro_f1"] = track_to_json(agg.macro_f1);
  doc["max_class_proportion"] = track_to_json(agg.max_class_proportion);
  json props = json::array();
  for (const MetricTrack& track : agg.class_proportion) {
    props.push_back(track_to_json(track));
  }
  doc["class_proportions"] = std::move(props);
  doc["observation_query_histogram"] = histogram_to_json(agg.observation_query_hist);
  return doc;
}

void write_outputs(const ExperimentConfig& config,
                   const std::vector<RunRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);
  const int num_classes = [&]() {
    for (const RunRecord& r : records) {
      if (r.ok) return static_cast<int>(r.result.class_proportions.cols());
    }
    return 0;
  }();

  std::ofstream per_query(fs::path(config.output_dir) / "per_query.csv");
  per_query << "repetition,seed,agent,query_index,observation_index,evpi,"
               "decision_accuracy,macro_f1";
  for (int c = 1; c <= num_classes; ++c) per_query << ",class_prop_" << c;
  per_query << "\n";
  for (const RunRecord& record : records) {
    if (!record.ok) continue;
    const CampaignResult& result = record.result;
    for (int q = 0; q <= result.query_count; ++q) {
      per_query << record.repetition << ',' << record.seed << ',' << record.agent
                << ',' << q << ','
                << (q == 0 ? -1 : result.query_pool_indices[q - 1]) << ','
                << format_double(q == 0 ? 0.0 : result.query_evpi[q - 1]) << ','
                << format_double(result.decision_accuracy[q]) << ','
                << format_double(result.macro_f1[q]);
      for (int c = 0; c < num_classes; ++c) {
        per_query << ',' << format_double(result.class_proportions(q, c));
      }
      per_query << "\n";
    }
  }

  std::ofstream summary(fs::path(config.output_dir) / "summary.csv");
  summary << "agent,repetition,seed,query_count,final_accuracy,final_f1,status\n";
  for (const RunRecord& record : records) {
    summary << record.agent << ',' << record.repetition << ',' << record.seed << ',';
    if (record.ok) {
      summary << record.result.query_count << ','
              << format_double(record.result.decision_accuracy.back()) << ','
              << format_double(record.result.macro_f1.back()) << ",ok\n";
    } else {
      std::string message = record.error;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      summary << "-1,nan,nan,error: " << message << "\n";
    }
  }

  json agg_doc;
  agg_doc["agents"] = json::object();
  std::map<std::string, std::vector<CampaignResult>> grouped;
  std::map<std::string, int> failures;
  for (const RunRecord& record : records) {
    if (record.ok) {
      grouped[record.agent].push_back(record.result);
    } else {
      failures[record.agent] += 1;
    }
  }
  for (const auto& [agent, results] : grouped) {
    json entry = aggregate_to_json(aggregate_runs(results));
    entry["repetitions_ok"] = results.size();
    entry["repetitions_failed"] = failures.count(agent) ? failures.at(agent) : 0;
    agg_doc["agents"][agent] = std::move(entry);
  }
  for (const auto& [agent, failed] : failures) {
    if (!grouped.count(agent)) {
      agg_doc["agents"][agent] = {{"repetitions_ok", 0},
                                  {"repetitions_failed", failed}};
    }
  }
  std::ofstream agg(fs::path(config.output_dir) / "aggregate.json");
  agg << agg_doc.dump(2) << "\n";
}

}  // namespace

Dataset DatasetSpec::load() const {
  if (kind == Kind::kSynthetic) return generate_synthetic(synthetic);
  Dataset data = import_labelled_csv(csv_path, expected_dims);
  if (derive_damage_split) rbal::derive_damage_split(data, damage_start_row);
  return data;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("/repetitions: must be >= 1");
  if (first_repetition < 0) throw ConfigError("/first_repetition: must be >= 0");
  if (agents.empty()) throw ConfigError("/agents: at least one agent required");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("/test_fraction: must lie in (0, 1)");
  }
  if (!(init_label_fraction > 0.0 && init_label_fraction < 1.0)) {
    throw ConfigError("/init_label_fraction: must lie in (0, 1)");
  }
  if (workers < 0) throw ConfigError("/workers: must be >= 0");
  if (process_path.empty()) throw ConfigError("/process: required field is missing");
}

ExperimentConfig parse_config_json(const json& doc) {
  check_keys(doc, "",
             {"dataset", "process", "agents", "repetitions", "first_repetition",
              "base_seed", "test_fraction", "init_label_fraction", "output_dir",
              "workers"});
  ExperimentConfig config;
  if (!doc.contains("dataset")) fail("/dataset", "required field is missing");
  config.dataset = parse_dataset(doc.at("dataset"), "/dataset");
  config.process_path = get_required<std::string>(doc, "", "process");
  if (!doc.contains("agents")) fail("/agents", "required field is missing");
  if (!doc.at("agents").is_array() || doc.at("agents").empty()) {
    fail("/agents", "must be a nonempty array");
  }
  int index = 0;
  for (const json& agent : doc.at("agents")) {
    config.agents.push_back(parse_agent(agent, "/agents/" + std::to_string(index)));
    ++index;
  }
  config.repetitions = get_optional<int>(doc, "", "repetitions", 100);
  config.first_repetition = get_optional<int>(doc, "", "first_repetition", 0);
  config.base_seed = get_optional<std::uint64_t>(doc, "", "base_seed", 0);
  config.test_fraction = get_optional<double>(doc, "", "test_fraction", 0.5);
  config.init_label_fraction =
      get_optional<double>(doc, "", "init_label_fraction", 0.002);
  config.output_dir = get_optional<std::string>(doc, "", "output_dir", "out");
  config.workers = get_optional<int>(doc, "", "workers", 0);
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return parse_config_json(doc);
}

json config_to_json(const ExperimentConfig& config) {
  json doc;
  if (config.dataset.kind == DatasetSpec::Kind::kSynthetic) {
    const SyntheticConfig& s = config.dataset.synthetic;
    json means = json::array();
    for (const Vec& m : s.class_means) {
      means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
    }
    json covs = json::array();
    for (const Mat& c : s.class_covariances) {
      std::vector<std::vector<double>> rows;
      for (int r = 0; r < c.rows(); ++r) {
        rows.emplace_back(c.row(r).begin(), c.row(r).end());
      }
      covs.push_back(rows);
    }
    doc["dataset"] = {{"type", "synthetic"},
                      {"cycles", s.cycles},
                      {"points_per_cycle_per_class", s.points_per_cycle_per_class},
                      {"first_cycle_trim", s.first_cycle_trim},
                      {"seed", s.seed},
                      {"class_means", std::move(means)},
                      {"class_covariances", std::move(covs)}};
  } else {
    doc["dataset"] = {{"type", "csv"},
                      {"path", config.dataset.csv_path},
                      {"derive_damage_split", config.dataset.derive_damage_split},
                      {"damage_start_row", config.dataset.damage_start_row}};
    if (config.dataset.expected_dims) {
      doc["dataset"]["expected_dims"] = *config.dataset.expected_dims;
    }
  }
  doc["process"] = config.process_path;
  json agents = json::array();
  for (const AgentSpec& agent : config.agents) {
    json entry = {{"name", agent.name},
                  {"classifier", to_string(agent.classifier)},
                  {"decision_mode",
                   agent.decision_mode == DecisionMode::kAgent ? "agent" : "scripted"},
                  {"random_baseline", agent.random_baseline},
                  {"alpha", agent.alpha},
                  {"em", {{"tol", agent.em.tol}, {"max_iter", agent.em.max_iter}}},
                  {"mrvm",
                   {{"tau", agent.mrvm.tau},
                    {"nu", agent.mrvm.nu},
                    {"max_iter", agent.mrvm.max_iter},
                    {"conv_tol", agent.mrvm.conv_tol},
                    {"quad_nodes", agent.mrvm.quad_nodes},
                    {"prune_threshold", agent.mrvm.prune_threshold}}}};
    if (agent.kernel_gamma) entry["kernel_gamma"] = *agent.kernel_gamma;
    agents.push_back(std::move(entry));
  }
  doc["agents"] = std::move(agents);
  doc["repetitions"] = config.repetitions;
  doc["first_repetition"] = config.first_repetition;
  doc["base_seed"] = config.base_seed;
  doc["test_fraction"] = config.test_fraction;
  doc["init_label_fraction"] = config.init_label_fraction;
  doc["output_dir"] = config.output_dir;
  doc["workers"] = config.workers;
  return doc;
}

int run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset data = config.dataset.load();
  const auto process =
      std::make_shared<const DecisionProcess>(DecisionProcess::load(config.process_path));
  if (data.num_classes != process->num_states()) {
    throw ConfigError("dataset has " + std::to_string(data.num_classes) +
                      " classes but the decision process has " +
                      std::to_string(process->num_states()) + " states");
  }

  std::vector<AgentConfig> agents;
  for (const AgentSpec& spec : config.agents) {
    AgentConfig agent;
    agent.name = spec.name;
    agent.classifier = spec.classifier;
    agent.decision_mode = spec.decision_mode;
    agent.process = process;
    agent.alpha = spec.alpha;
    agent.em = spec.em;
    agent.mrvm = spec.mrvm;
    agent.kernel_gamma = spec.kernel_gamma;
    agents.push_back(std::move(agent));
  }

  const int reps = config.repetitions;
  std::vector<std::vector<RunRecord>> per_rep(reps);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= reps) break;
      const int repetition = config.first_repetition + i;
      const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(repetition);
      std::vector<RunRecord> records;
      SplitResult split;
      bool split_ok = true;
      std::string split_error;
      try {
        split = split_and_init(data, config.test_fraction,
                               config.init_label_fraction, seed);
      } catch (const Error& e) {
        split_ok = false;
        split_error = e.what();
      }
      for (std::size_t a = 0; a < agents.size(); ++a) {
        RunRecord record;
        record.repetition = repetition;
        record.seed = seed;
        record.agent = agents[a].name;
        if (!split_ok) {
          record.error = split_error;
          records.push_back(std::move(record));
          continue;
        }
        try {
          record.result = run_campaign(split.train_labelled, split.train_pool,
                                       split.test, agents[a], mix_seed(seed, 2 * a));
          record.ok = true;
        } catch (const Error& e) {
          record.error = e.what();
        }
        const bool primary_ok = record.ok;
        const int n_queries = record.ok ? record.result.query_count : 0;
        records.push_back(std::move(record));
        if (config.agents[a].random_baseline && primary_ok) {
          RunRecord baseline;
          baseline.repetition = repetition;
          baseline.seed = seed;
          baseline.agent = agents[a].name + "_random";
          try {
            baseline.result = run_random_baseline(
                split.train_labelled, split.train_pool, split.test, agents[a],
                n_queries, mix_seed(seed, 2 * a + 1));
            baseline.ok = true;
          } catch (const Error& e) {
            baseline.error = e.what();
          }
          records.push_back(std::move(baseline));
        }
      }
      per_rep[i] = std::move(records);
    }
  };

  int worker_count = config.workers > 0
                         ? config.workers
                         : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::max(1, std::min(worker_count, reps));
  std::vector<std::thread> threads;
  threads.reserve(worker_count);
  for (int t = 0; t < worker_count; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  std::vector<RunRecord> records;
  for (std::vector<RunRecord>& rep_records : per_rep) {
    for (RunRecord& record : rep_records) records.push_back(std::move(record));
  }
  write_outputs(config, records);

  for (const AgentSpec& spec : config.agents) {
    int ok_count = 0;
    for (const RunRecord& record : records) {
      if (record.agent == spec.name && record.ok) ++ok_count;
    }
    if (ok_count == 0) return 3;
  }
  return 0;
}

int regenerate_aggregate(const std::string& output_dir) {
  namespace fs = std::filesystem;
  const fs::path per_query_path = fs::path(output_dir) / "per_query.csv";
  std::ifstream file(per_query_path);
  if (!file) throw ConfigError("cannot open " + per_query_path.string());

  std::string line;
  if (!std::getline(file, line)) throw DataError("per_query.csv is empty");
  std::stringstream header(line);
  std::vector<std::string> columns;
  std::string cell;
  while (std::getline(header, cell, ',')) columns.push_back(cell);
  int num_classes = 0;
  for (const std::string& column : columns) {
    if (column.rfind("class_prop_", 0) == 0) ++num_classes;
  }
  if (columns.size() < 8) throw DataError("per_query.csv: unexpected header");

  struct Key {
    std::string agent;
    int repetition;
    bool operator<(const Key& other) const {
      return std::tie(agent, repetition) < std::tie(other.agent, other.repetition);
    }
  };
  std::map<Key, CampaignResult> runs;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns.size()) {
      throw DataError("per_query.csv: ragged row");
    }
    const Key key{cells[2], std::stoi(cells[0])};
    CampaignResult& result = runs[key];
    const int query_index = std::stoi(cells[3]);
    const int observation_index = std::stoi(cells[4]);
    result.query_count = std::max(result.query_count, query_index);
    if (query_index > 0) {
      result.query_pool_indices.push_back(observation_index);
      result.query_evpi.push_back(std::stod(cells[5]));
    }
    result.decision_accuracy.push_back(std::stod(cells[6]));
    result.macro_f1.push_back(std::stod(cells[7]));
    Mat& props = result.class_proportions;
    props.conservativeResize(query_index + 1, num_classes);
    for (int c = 0; c < num_classes; ++c) {
      props(query_index, c) = std::stod(cells[8 + c]);
    }
  }

  json doc;
  doc["agents"] = json::object();
  std::map<std::string, std::vector<CampaignResult>> grouped;
  for (auto& [key, result] : runs) grouped[key.agent].push_back(std::move(result));
  for (const auto& [agent, results] : grouped) {
    json entry = aggregate_to_json(aggregate_runs(results));
    entry["repetitions_ok"] = results.size();
    doc["agents"][agent] = std::move(entry);
  }
  std::ofstream out(fs::path(output_dir) / "aggregate.json");
  out << doc.dump(2) << "\n";
  return 0;
}

}  // namespace rbal
