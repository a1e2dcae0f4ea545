#ifndef RBAL_DATASET_HPP
#define RBAL_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbal/types.hpp"

namespace rbal {

// Configuration of the synthetic degradation dataset: `cycles` repeated
// sweeps through classes 1..K, each class contributing a fixed number of
// Gaussian draws per cycle. `first_cycle_trim` removes that many leading
// points of class 1 from the first cycle only, so that e.g. six cycles of
// 2000 points can start with a 1997-point cycle.
struct SyntheticConfig {
  int cycles = 6;
  std::vector<int> points_per_cycle_per_class = {500, 500, 500, 500};
  int first_cycle_trim = 3;
  std::vector<Vec> class_means;
  std::vector<Mat> class_covariances;
  std::uint64_t seed = 0;

  // Four partially-overlapping 2-D clusters on a diagonal; classes 3 and 4
  // are the close pair.
  static SyntheticConfig default_config();

  int num_classes() const {
    return static_cast<int>(points_per_cycle_per_class.size());
  }
  void validate() const;
};

Dataset generate_synthetic(const SyntheticConfig& config);

// Reads a CSV with a header row: feature columns plus one integer column
// named `label`. Row order is taken as time order. When `expected_dims` is
// set, the feature count must match it.
Dataset import_labelled_csv(const std::string& path,
                            std::optional<int> expected_dims = std::nullopt);

// Relabels rows from `damage_start_row` (1-based) onward into two halves:
// the earlier half becomes class 3, the later half class 4. Matches the usual
// convention for monitoring campaigns whose damage phase is split by index.
void derive_damage_split(Dataset& data, int damage_start_row = 3476);

struct SplitResult {
  LabelledSet train_labelled;
  UnlabelledPool train_pool;
  Dataset test;
};

// Draws the test set uniformly at random (test_fraction of all rows); the
// remaining training rows keep their time order. A random init_label_fraction
// of training rows keep their labels; the rest form the pool with labels
// hidden but retained as ground truth.
SplitResult split_and_init(const Dataset& data, double test_fraction,
                           double init_label_fraction, std::uint64_t seed);

}  // namespace rbal

#endif  // RBAL_DATASET_HPP
