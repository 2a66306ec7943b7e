#include "dsaee/synthetic.hpp"

#include <algorithm>
#include <string>

#include "dsaee/error.hpp"
#include "dsaee/random.hpp"

namespace dsaee::synthetic {

PlantedDataset make_planted(const PlantedSpec& spec) {
  if (spec.planted > spec.features) {
    throw UsageError("cannot plant " + std::to_string(spec.planted) + " of " +
                     std::to_string(spec.features) + " features");
  }
  Rng rng(spec.seed);
  PlantedDataset out;
  out.planted_features = rng.sample_without_replacement(spec.features, spec.planted);
  std::sort(out.planted_features.begin(), out.planted_features.end());

  const std::size_t n = spec.majority + spec.minority;
  // Interleave the classes so that file order carries no label information.
  Labels labels(spec.majority, 0);
  labels.resize(n, 1);
  rng.shuffle(std::span<int>(labels));

  LabeledDataset& data = out.data;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.features));
  for (Eigen::Index i = 0; i < data.x.size(); ++i) data.x.data()[i] = rng.normal();
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1) continue;
    for (const std::size_t j : out.planted_features) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += spec.shift;
    }
  }
  data.y = std::move(labels);
  for (std::size_t j = 0; j < spec.features; ++j) {
    data.feature_names.push_back("f" + std::to_string(j));
  }
  return out;
}

}  // namespace dsaee::synthetic
