#include "rbal/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rbal/errors.hpp"

namespace rbal {

double decision_accuracy(const std::vector<int>& chosen_actions,
                         const std::vector<int>& optimal_actions) {
  if (chosen_actions.empty()) throw DataError("decision accuracy: empty action list");
  if (chosen_actions.size() != optimal_actions.size()) {
    throw DimensionError("decision accuracy: action list lengths differ");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < chosen_actions.size(); ++i) {
    if (chosen_actions[i] == optimal_actions[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(chosen_actions.size());
}

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                int num_classes) {
  if (predicted.empty()) throw DataError("macro f1: empty label list");
  if (predicted.size() != truth.size()) {
    throw DimensionError("macro f1: label list lengths differ");
  }
  if (num_classes < 1) throw DataError("macro f1: class count must be positive");

  std::vector<long> true_pos(num_classes, 0);
  std::vector<long> false_pos(num_classes, 0);
  std::vector<long> false_neg(num_classes, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if (p < 1 || p > num_classes || t < 1 || t > num_classes) {
      throw DataError("macro f1: label outside {1.." + std::to_string(num_classes) +
                      "}");
    }
    if (p == t) {
      ++true_pos[p - 1];
    } else {
      ++false_pos[p - 1];
      ++false_neg[t - 1];
    }
  }
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const long pred_count = true_pos[c] + false_pos[c];
    const long truth_count = true_pos[c] + false_neg[c];
    const double precision =
        pred_count > 0 ? static_cast<double>(true_pos[c]) / pred_count : 0.0;
    const double recall =
        truth_count > 0 ? static_cast<double>(true_pos[c]) / truth_count : 0.0;
    const double denom = precision + recall;
    total += denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
  }
  return total / num_classes;
}

namespace {

// Linear-interpolation quantile over a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double rank = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// value_at(run, index) with carry-forward past each run's own trajectory end.
template <typename Getter>
MetricTrack make_track(std::size_t runs, std::size_t length, const Getter& value_at) {
  MetricTrack track;
  track.median.resize(length);
  track.iqr.resize(length);
  track.mean.resize(length);
  track.stddev.resize(length);
  std::vector<double> column(runs);
  for (std::size_t idx = 0; idx < length; ++idx) {
    for (std::size_t r = 0; r < runs; ++r) column[r] = value_at(r, idx);
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    track.median[idx] = quantile_sorted(sorted, 0.5);
    track.iqr[idx] = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= static_cast<double>(runs);
    track.mean[idx] = mean;
    double var = 0.0;
    for (double v : column) var += (v - mean) * (v - mean);
    track.stddev[idx] =
        runs > 1 ? std::sqrt(var / static_cast<double>(runs - 1)) : 0.0;
  }
  return track;
}

}  // namespace

RunAggregate aggregate_runs(const std::vector<CampaignResult>& results) {
  if (results.empty()) throw DataError("aggregate: no campaign results");
  const std::size_t runs = results.size();
  const int num_classes = static_cast<int>(results[0].class_proportions.cols());

  RunAggregate agg;
  agg.track_length = 0;
  for (const CampaignResult& run : results) {
    agg.track_length = std::max(agg.track_length, run.decision_accuracy.size());
    agg.query_counts.push_back(run.query_count);
  }

  auto carried = [](const std::vector<double>& values, std::size_t idx) {
    return idx < values.size() ? values[idx] : values.back();
  };

  agg.decision_accuracy =
      make_track(runs, agg.track_length, [&](std::size_t r, std::size_t idx) {
        return carried(results[r].decision_accuracy, idx);
      });
  agg.macro_f1 =
      make_track(runs, agg.track_length, [&](std::size_t r, std::size_t idx) {
        return carried(results[r].macro_f1, idx);
      });
  agg.max_class_proportion =
      make_track(runs, agg.track_length, [&](std::size_t r, std::size_t idx) {
        const Mat& props = results[r].class_proportions;
        const Eigen::Index row = std::min<Eigen::Index>(
            static_cast<Eigen::Index>(idx), props.rows() - 1);
        return props.row(row).maxCoeff();
      });
  for (int c = 0; c < num_classes; ++c) {
    agg.class_proportion.push_back(
        make_track(runs, agg.track_length, [&](std::size_t r, std::size_t idx) {
          const Mat& props = results[r].class_proportions;
          const Eigen::Index row = std::min<Eigen::Index>(
              static_cast<Eigen::Index>(idx), props.rows() - 1);
          return props(row, c);
        }));
  }

  const int bin = agg.query_count_hist.bin_width;
  int max_count = 0;
  for (int q : agg.query_counts) max_count = std::max(max_count, q);
  agg.query_count_hist.counts.assign(max_count / bin + 1, 0);
  for (int q : agg.query_counts) agg.query_count_hist.counts[q / bin] += 1;

  int max_index = 0;
  for (const CampaignResult& run : results) {
    for (int idx : run.query_pool_indices) max_index = std::max(max_index, idx);
  }
  agg.observation_query_hist.counts.assign(max_index / bin + 1, 0);
  for (const CampaignResult& run : results) {
    for (int idx : run.query_pool_indices) {
      agg.observation_query_hist.counts[idx / bin] += 1;
    }
  }
  return agg;
}

}  // namespace rbal
