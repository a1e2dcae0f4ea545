#ifndef RBAL_TYPES_HPP
#define RBAL_TYPES_HPP

#include <cstdint>
#include <vector>

#include "rbal/math.hpp"

namespace rbal {

// One monitoring observation: a D-dimensional feature vector at an integer
// time index. Feature units are dataset-defined.
struct Observation {
  Vec features;
  std::int64_t time_index = 0;
};

// Ordered observations with class labels in {1..K}. Time indices are strictly
// increasing; row order is time order.
struct Dataset {
  std::vector<Observation> observations;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return observations.size(); }
  int dim() const {
    return observations.empty() ? 0
                                : static_cast<int>(observations[0].features.size());
  }

  // Enforces the structural invariants; throws DataError on violation.
  void validate() const;
};

// Feature/label pairs available for supervised training.
struct LabelledSet {
  std::vector<Vec> features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return features.size(); }
  int dim() const {
    return features.empty() ? 0 : static_cast<int>(features[0].size());
  }
  void add(const Vec& x, int label) {
    features.push_back(x);
    labels.push_back(label);
  }
};

// Streaming pool whose labels are hidden from the learner but retained as
// ground truth for simulated inspection.
struct UnlabelledPool {
  std::vector<Observation> observations;  // time order
  std::vector<int> hidden_labels;
  int num_classes = 0;

  std::size_t size() const { return observations.size(); }
  int dim() const {
    return observations.empty() ? 0
                                : static_cast<int>(observations[0].features.size());
  }
};

}  // namespace rbal

#endif  // RBAL_TYPES_HPP
