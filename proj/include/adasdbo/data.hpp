#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "adasdbo/linalg.hpp"
#include "adasdbo/rng.hpp"

namespace adasdbo {

enum class Split { train, validation, test };

/// Immutable sample table. Labels are either real-valued (synthetic
/// regression-style targets) or integer classes in [0, num_classes).
struct Dataset {
  std::size_t feature_dim = 0;
  Vec features;                   // row-major, size() x feature_dim
  Vec labels;                     // real labels; empty for categorical data
  std::vector<int> class_labels;  // class labels; empty for real-labeled data
  int num_classes = 0;            // > 0 iff categorical
  Split split = Split::train;

  std::size_t size() const {
    return feature_dim == 0 ? 0 : features.size() / feature_dim;
  }
  bool categorical() const { return num_classes > 0; }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }

  void validate() const;
};

struct AgentData {
  Dataset train;
  Dataset validation;
};

struct SyntheticDataset {
  std::vector<AgentData> agents;
  Vec ground_truth;      // the generating weight vector
  double heterogeneity;  // the r used for the per-agent feature scale
};

/// Per-agent regression-labeled sets: agent i in {1..n} draws features
/// N(0, (i*r)^2) per coordinate, labels x^T w* + 0.1 z with a shared w*
/// drawn N(0, I) once. Identical RngSpec => bitwise identical data.
SyntheticDataset generate_synthetic(std::size_t n_agents, std::size_t feature_dim,
                                    std::size_t train_per_agent, std::size_t val_per_agent,
                                    double heterogeneity, const RngSpec& rng);

/// Reads an IDX image/label file pair (big-endian headers, magic 0x803 for
/// images and 0x801 for labels). Pixels are scaled to [0,1] by /255. Parse
/// errors name the byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

enum class PartitionPolicy { equal, by_class_skew };

/// Splits a dataset into n shards. `equal` shuffles then cuts into
/// near-equal pieces (sizes differ by at most one, larger shards first);
/// `by_class_skew` sends `skew_fraction` of class i to agent (i mod n) and
/// spreads the remainder evenly.
std::vector<Dataset> partition(const Dataset& data, std::size_t n, PartitionPolicy policy,
                               double skew_fraction, Rng& rng);

/// Writes the dataset as CSV for inspection: feature columns then the label
/// column, one row per sample.
void export_csv(const Dataset& data, const std::string& path);

}  // namespace adasdbo
