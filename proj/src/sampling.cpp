#include "dsaee/sampling.hpp"

#include <algorithm>
#include <string>

#include "dsaee/error.hpp"
#include "dsaee/random.hpp"

namespace dsaee::sampling {

std::uint64_t component_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index);
}

ComponentSplit build_component_split(const LabeledDataset& data,
                                     std::uint64_t seed) {
  const std::vector<std::size_t> minority = data.rows_of_class(1);
  const std::vector<std::size_t> majority = data.rows_of_class(0);
  if (minority.empty() || majority.empty()) {
    throw DataError("component split needs both classes (minority=" +
                    std::to_string(minority.size()) +
                    ", majority=" + std::to_string(majority.size()) + ")");
  }
  if (majority.size() <= minority.size()) {
    throw DataError("majority class (" + std::to_string(majority.size()) +
                    " rows) must outnumber the minority class (" +
                    std::to_string(minority.size()) + " rows)");
  }

  Rng rng(seed);
  const std::vector<std::size_t> picks =
      rng.sample_without_replacement(majority.size(), minority.size());

  std::vector<bool> in_test(majority.size(), false);
  ComponentSplit split;
  split.component_seed = seed;
  split.test_majority_rows.reserve(picks.size());
  for (const std::size_t p : picks) {
    in_test[p] = true;
    split.test_majority_rows.push_back(majority[p]);
  }
  split.train_rows.reserve(majority.size() - minority.size());
  for (std::size_t i = 0; i < majority.size(); ++i) {
    if (!in_test[i]) split.train_rows.push_back(majority[i]);
  }

  std::vector<std::size_t> test_rows = minority;
  test_rows.insert(test_rows.end(), split.test_majority_rows.begin(),
                   split.test_majority_rows.end());
  split.train = gather_rows(data.x, split.train_rows);
  split.test = gather_rows(data.x, test_rows);
  split.test_labels.assign(minority.size(), 1);
  split.test_labels.resize(test_rows.size(), 0);
  return split;
}

}  // namespace dsaee::sampling
