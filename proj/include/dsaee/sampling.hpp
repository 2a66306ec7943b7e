#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsaee/types.hpp"

namespace dsaee::sampling {

// One ensemble component's data: a majority-only training matrix and a
// class-balanced test matrix holding every minority row plus an equally
// sized uniform sample of majority rows.
struct ComponentSplit {
  Matrix train;
  // Minority rows first (in dataset order), then the sampled majority rows.
  Matrix test;
  Labels test_labels;
  std::uint64_t component_seed = 0;

  // Dataset row indices backing `train` and the majority half of `test`.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_majority_rows;
};

// Seed of component `index` under `master_seed`; see derive_seed().
std::uint64_t component_seed(std::uint64_t master_seed, std::size_t index);

// Throws DataError when a class is missing or the majority class is not
// larger than the minority class. Deterministic in (data, seed).
ComponentSplit build_component_split(const LabeledDataset& data,
                                     std::uint64_t seed);

}  // namespace dsaee::sampling
