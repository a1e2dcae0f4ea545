#include "rbal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rbal/errors.hpp"
#include "rbal/rng.hpp"

namespace rbal {

void Dataset::validate() const {
  if (observations.size() != labels.size()) {
    throw DataError("dataset observation/label counts differ");
  }
  std::int64_t prev_time = -1;
  int dims = dim();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const Observation& obs = observations[i];
    if (obs.features.size() != dims) {
      throw DataError("dataset row " + std::to_string(i + 1) +
                      ": inconsistent feature dimension");
    }
    if (!obs.features.allFinite()) {
      throw DataError("dataset row " + std::to_string(i + 1) +
                      ": non-finite feature");
    }
    if (obs.time_index <= prev_time) {
      throw DataError("dataset row " + std::to_string(i + 1) +
                      ": time_index not strictly increasing");
    }
    prev_time = obs.time_index;
    if (labels[i] < 1 || labels[i] > num_classes) {
      throw DataError("dataset row " + std::to_string(i + 1) +
                      ": label outside {1.." + std::to_string(num_classes) +
                      "}");
    }
  }
}

SyntheticConfig SyntheticConfig::default_config() {
  SyntheticConfig config;
  config.class_means = {
      (Vec(2) << 0.0, 0.0).finished(),
      (Vec(2) << 4.0, 4.0).finished(),
      (Vec(2) << 8.0, 8.0).finished(),
      (Vec(2) << 10.5, 10.5).finished(),
  };
  config.class_covariances = {Mat::Identity(2, 2), Mat::Identity(2, 2),
                              Mat::Identity(2, 2), Mat::Identity(2, 2)};
  return config;
}

void SyntheticConfig::validate() const {
  if (cycles < 1) throw ConfigError("synthetic config: cycles must be >= 1");
  const int k = num_classes();
  if (k < 1) throw ConfigError("synthetic config: needs at least one class");
  for (int count : points_per_cycle_per_class) {
    if (count < 1) {
      throw ConfigError("synthetic config: points per cycle must be positive");
    }
  }
  if (first_cycle_trim < 0 || first_cycle_trim >= points_per_cycle_per_class[0]) {
    throw ConfigError(
        "synthetic config: first_cycle_trim must be in [0, class-1 count)");
  }
  if (static_cast<int>(class_means.size()) != k ||
      static_cast<int>(class_covariances.size()) != k) {
    throw ConfigError("synthetic config: means/covariances must match class count");
  }
  const Eigen::Index dims = class_means[0].size();
  if (dims < 1) throw ConfigError("synthetic config: dimension must be >= 1");
  for (int c = 0; c < k; ++c) {
    if (class_means[c].size() != dims) {
      throw ConfigError("synthetic config: inconsistent mean dimensions");
    }
    const Mat& cov = class_covariances[c];
    if (cov.rows() != dims || cov.cols() != dims) {
      throw ConfigError("synthetic config: covariance shape mismatch");
    }
    if (!cov.isApprox(cov.transpose(), 1e-12)) {
      throw ConfigError("synthetic config: covariance not symmetric for class " +
                        std::to_string(c + 1));
    }
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw ConfigError("synthetic config: covariance not positive-definite "
                        "for class " + std::to_string(c + 1));
    }
  }
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const int num_classes = config.num_classes();
  const Eigen::Index dims = config.class_means[0].size();

  std::vector<Mat> chol(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    chol[c] = Eigen::LLT<Mat>(config.class_covariances[c]).matrixL();
  }

  Rng rng(config.seed);
  Dataset data;
  data.num_classes = num_classes;
  std::int64_t time = 0;
  Vec z(dims);
  for (int cycle = 0; cycle < config.cycles; ++cycle) {
    for (int c = 0; c < num_classes; ++c) {
      int count = config.points_per_cycle_per_class[c];
      if (cycle == 0 && c == 0) count -= config.first_cycle_trim;
      for (int i = 0; i < count; ++i) {
        for (Eigen::Index d = 0; d < dims; ++d) z[d] = rng.normal();
        Observation obs;
        obs.features = config.class_means[c] + chol[c] * z;
        obs.time_index = time++;
        data.observations.push_back(std::move(obs));
        data.labels.push_back(c + 1);
      }
    }
  }
  return data;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const std::string text = trimmed(cell);
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    throw DataError("csv row " + std::to_string(row) + ", column '" + col +
                    "': non-numeric cell '" + text + "'");
  }
  if (consumed != text.size()) {
    throw DataError("csv row " + std::to_string(row) + ", column '" + col +
                    "': non-numeric cell '" + text + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("csv row " + std::to_string(row) + ", column '" + col +
                    "': non-finite value");
  }
  return value;
}

}  // namespace

Dataset import_labelled_csv(const std::string& path,
                            std::optional<int> expected_dims) {
  std::ifstream file(path);
  if (!file) throw DataError("cannot open csv file: " + path);

  std::string line;
  if (!std::getline(file, line)) throw DataError("csv has no header row: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  int label_col = -1;
  std::vector<int> feature_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trimmed(header[i]) == "label") {
      if (label_col >= 0) throw DataError("csv has duplicate label column");
      label_col = static_cast<int>(i);
    } else {
      feature_cols.push_back(static_cast<int>(i));
    }
  }
  if (label_col < 0) throw DataError("csv missing label column: " + path);
  const int dims = static_cast<int>(feature_cols.size());
  if (dims < 1) throw DataError("csv has no feature columns: " + path);
  if (expected_dims && dims != *expected_dims) {
    throw DataError("csv has " + std::to_string(dims) +
                    " feature columns, expected " +
                    std::to_string(*expected_dims));
  }

  Dataset data;
  std::size_t row = 1;  // 1-based data rows, excluding the header
  while (std::getline(file, line)) {
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("csv row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    Observation obs;
    obs.features = Vec(dims);
    for (int d = 0; d < dims; ++d) {
      obs.features[d] = parse_cell(cells[feature_cols[d]], row,
                                   trimmed(header[feature_cols[d]]));
    }
    const double label_value = parse_cell(cells[label_col], row, "label");
    const int label = static_cast<int>(std::llround(label_value));
    if (label != label_value || label < 1) {
      throw DataError("csv row " + std::to_string(row) +
                      ": label must be a positive integer, found '" +
                      trimmed(cells[label_col]) + "'");
    }
    obs.time_index = static_cast<std::int64_t>(row - 1);
    data.observations.push_back(std::move(obs));
    data.labels.push_back(label);
    ++row;
  }
  if (data.observations.empty()) throw DataError("csv has no rows: " + path);

  data.num_classes = *std::max_element(data.labels.begin(), data.labels.end());
  data.validate();
  return data;
}

void derive_damage_split(Dataset& data, int damage_start_row) {
  const int n = static_cast<int>(data.size());
  if (damage_start_row < 1 || damage_start_row > n) {
    throw ConfigError("damage split row " + std::to_string(damage_start_row) +
                      " outside dataset of " + std::to_string(n) + " rows");
  }
  const int damage_count = n - damage_start_row + 1;
  const int incipient_count = (damage_count + 1) / 2;
  for (int i = damage_start_row - 1; i < n; ++i) {
    data.labels[i] = (i - (damage_start_row - 1)) < incipient_count ? 3 : 4;
  }
  data.num_classes =
      std::max(4, *std::max_element(data.labels.begin(), data.labels.end()));
}

SplitResult split_and_init(const Dataset& data, double test_fraction,
                           double init_label_fraction, std::uint64_t seed) {
  if (data.size() == 0) throw ConfigError("split: dataset is empty");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("split: test_fraction must lie in (0, 1)");
  }
  if (!(init_label_fraction > 0.0 && init_label_fraction < 1.0)) {
    throw ConfigError("split: init_label_fraction must lie in (0, 1)");
  }

  const std::size_t n = data.size();
  const std::size_t n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw ConfigError("split: test_fraction leaves an empty partition");
  }

  Rng rng(seed);
  std::vector<std::size_t> test_idx = rng.sample_without_replacement(n, n_test);
  std::sort(test_idx.begin(), test_idx.end());

  std::vector<bool> in_test(n, false);
  for (std::size_t i : test_idx) in_test[i] = true;

  std::vector<std::size_t> train_idx;
  train_idx.reserve(n - n_test);
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) train_idx.push_back(i);
  }

  const std::size_t n_train = train_idx.size();
  const std::size_t n_labelled = static_cast<std::size_t>(
      std::llround(init_label_fraction * static_cast<double>(n_train)));
  if (n_labelled == 0) {
    throw ConfigError("split: at least one labelled point required");
  }
  if (n_labelled >= n_train) {
    throw ConfigError("split: init_label_fraction leaves an empty pool");
  }

  std::vector<std::size_t> labelled_pos =
      rng.sample_without_replacement(n_train, n_labelled);
  std::sort(labelled_pos.begin(), labelled_pos.end());
  std::vector<bool> is_labelled(n_train, false);
  for (std::size_t p : labelled_pos) is_labelled[p] = true;

  SplitResult out;
  out.train_labelled.num_classes = data.num_classes;
  out.train_pool.num_classes = data.num_classes;
  out.test.num_classes = data.num_classes;

  for (std::size_t i : test_idx) {
    out.test.observations.push_back(data.observations[i]);
    out.test.labels.push_back(data.labels[i]);
  }
  for (std::size_t p = 0; p < n_train; ++p) {
    const std::size_t i = train_idx[p];
    if (is_labelled[p]) {
      out.train_labelled.add(data.observations[i].features, data.labels[i]);
    } else {
      out.train_pool.observations.push_back(data.observations[i]);
      out.train_pool.hidden_labels.push_back(data.labels[i]);
    }
  }
  return out;
}

}  // namespace rbal
