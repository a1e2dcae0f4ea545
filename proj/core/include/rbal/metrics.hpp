#ifndef RBAL_METRICS_HPP
#define RBAL_METRICS_HPP

#include <vector>

#include "rbal/campaign.hpp"
#include "rbal/math.hpp"

namespace rbal {

// Fraction of positions where the chosen action equals the perfect-
// information action.
double decision_accuracy(const std::vector<int>& chosen_actions,
                         const std::vector<int>& optimal_actions);

// Unweighted mean over classes of 2PR/(P+R); per-class precision or recall
// with a zero denominator counts as 0.
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                int num_classes);

// Median/IQR/mean/stddev per trajectory index across repetitions.
struct MetricTrack {
  std::vector<double> median;
  std::vector<double> iqr;
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct Histogram {
  int bin_width = 25;
  std::vector<long> counts;  // bin i covers [i*bin_width, (i+1)*bin_width)
};

struct RunAggregate {
  std::size_t track_length = 0;  // longest query trajectory, including index 0
  MetricTrack decision_accuracy;
  MetricTrack macro_f1;
  MetricTrack max_class_proportion;
  std::vector<MetricTrack> class_proportion;  // one track per class
  std::vector<int> query_counts;              // per repetition
  Histogram query_count_hist;                 // counts binned in 25s
  Histogram observation_query_hist;           // pool indices binned in 25s
};

// Aligns trajectories on query index (shorter runs carried forward at their
// final value) and aggregates across repetitions. Permutation-invariant in
// the run order.
RunAggregate aggregate_runs(const std::vector<CampaignResult>& results);

}  // namespace rbal

#endif  // RBAL_METRICS_HPP
