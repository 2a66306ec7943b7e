#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dsaee {

// Row-major so that one observation is one contiguous row.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Binary labels: 1 marks the minority class, 0 the majority class.
using Labels = std::vector<int>;

struct ClassCounts {
  std::size_t majority = 0;
  std::size_t minority = 0;
};

// Numeric design matrix with binary labels. Invariants are checked by
// validate(); constructors do not enforce them so that partially built
// datasets can be assembled by loaders.
struct LabeledDataset {
  Matrix x;
  Labels y;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }

  ClassCounts class_counts() const;

  std::vector<std::size_t> rows_of_class(int label) const;

  // Throws DataError unless shapes agree, labels are binary, both classes
  // are present and the minority class (label 1) is strictly smaller.
  void validate() const;

  // Copy of the selected rows (in the given order).
  LabeledDataset subset_rows(std::span<const std::size_t> rows) const;

  // Copy restricted to the selected feature columns (in the given order).
  LabeledDataset subset_features(std::span<const std::size_t> cols) const;
};

// Gathers rows of `m` in the order given by `rows`.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace dsaee
