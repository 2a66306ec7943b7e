#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsaee/nn.hpp"
#include "dsaee/types.hpp"

namespace dsaee::ensemble {

struct EnsembleConfig {
  std::size_t components = 25;
  // Template for every component; each component overrides the seed.
  nn::DsaeConfig dsae;
  nn::TrainingConfig training;
  std::uint64_t master_seed = 0;
  // Upper bound on concurrently training components.
  std::size_t parallelism = 1;

  void validate() const;
};

// Concatenated per-feature reconstruction errors of every component's test
// rows. Rows are grouped by component index ascending; within a component
// the minority rows come first.
struct REMatrix {
  Matrix q;
  Labels labels;

  std::size_t rows() const { return static_cast<std::size_t>(q.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(q.cols()); }
};

// Trains one autoencoder per component on that component's majority-only
// split and stacks the reconstruction errors of its balanced test rows.
// Component b uses split seed component_seed(master_seed, b) and model seed
// derive_seed(split seed, 1). The result does not depend on parallelism.
// Errors from a component are rethrown with the component index prepended;
// when several components fail the lowest index wins.
REMatrix run_ensemble(const LabeledDataset& data, const EnsembleConfig& config);

enum class Aggregation { kMean, kMedian };

struct ClassMeans {
  Vector minority;
  Vector majority;
};

// Per-feature central value of the minority and majority rows of Q.
ClassMeans class_mean_re(const REMatrix& re,
                         Aggregation aggregation = Aggregation::kMean);

// Element-wise l_min - l_maj.
Vector delta_re(const Vector& l_min, const Vector& l_maj);

// Empirical quantile with linear interpolation between order statistics at
// position (n - 1) * q of the sorted values.
double quantile_threshold(std::span<const double> values, double q);

// Quantile level at which exactly `count` of `n` distinct values lie
// strictly above the threshold: (n - 1 - count) / (n - 1).
double quantile_for_count(std::size_t n, std::size_t count);

struct SelectionResult {
  Vector l_min;
  Vector l_maj;
  Vector delta;
  double delta_quantile = 0.0;
  double threshold = 0.0;
  // Ascending feature indices with delta strictly above the threshold.
  std::vector<std::size_t> selected;
};

// Throws UsageError unless 0 <= q < 1 and delta is non-empty. The returned
// l_min / l_maj are left empty.
SelectionResult select_features(const Vector& delta, double q);

SelectionResult select_features(const ClassMeans& means, double q);

// One result per requested level, all from the same class means.
std::vector<SelectionResult> select_at_thresholds(
    const REMatrix& re, std::span<const double> quantiles,
    Aggregation aggregation = Aggregation::kMean);

}  // namespace dsaee::ensemble
