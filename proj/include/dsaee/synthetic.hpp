#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsaee/types.hpp"

namespace dsaee::synthetic {

// Standard-normal features; minority rows are shifted by `shift` on a
// randomly chosen set of `planted` features.
struct PlantedSpec {
  std::size_t majority = 2000;
  std::size_t minority = 100;
  std::size_t features = 100;
  std::size_t planted = 10;
  double shift = 2.0;
  std::uint64_t seed = 0;
};

struct PlantedDataset {
  LabeledDataset data;
  // Ascending indices of the shifted features.
  std::vector<std::size_t> planted_features;
};

PlantedDataset make_planted(const PlantedSpec& spec);

}  // namespace dsaee::synthetic
