#include "dsaee/types.hpp"

#include <string>

#include "dsaee/error.hpp"

namespace dsaee {

ClassCounts LabeledDataset::class_counts() const {
  ClassCounts counts;
  for (const int label : y) {
    if (label == 1) {
      ++counts.minority;
    } else {
      ++counts.majority;
    }
  }
  return counts;
}

std::vector<std::size_t> LabeledDataset::rows_of_class(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == label) out.push_back(i);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw DataError("dataset has " + std::to_string(x.rows()) +
                    " rows but " + std::to_string(y.size()) + " labels");
  }
  if (!feature_names.empty() && feature_names.size() != features()) {
    throw DataError("dataset has " + std::to_string(features()) +
                    " features but " + std::to_string(feature_names.size()) +
                    " feature names");
  }
  if (x.cols() == 0) throw DataError("dataset has no features");
  for (const int label : y) {
    if (label != 0 && label != 1) {
      throw DataError("labels must be 0 (majority) or 1 (minority)");
    }
  }
  const ClassCounts counts = class_counts();
  if (counts.minority == 0 || counts.majority == 0) {
    throw DataError("dataset must contain both classes (minority=" +
                    std::to_string(counts.minority) +
                    ", majority=" + std::to_string(counts.majority) + ")");
  }
  if (counts.minority >= counts.majority) {
    throw DataError("minority class (" + std::to_string(counts.minority) +
                    " rows) must be strictly smaller than the majority class (" +
                    std::to_string(counts.majority) + " rows)");
  }
  if (!x.allFinite()) throw DataError("dataset contains non-finite values");
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

LabeledDataset LabeledDataset::subset_rows(
    std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.x = gather_rows(x, rows);
  out.y.reserve(rows.size());
  for (const std::size_t r : rows) out.y.push_back(y[r]);
  out.feature_names = feature_names;
  return out;
}

LabeledDataset LabeledDataset::subset_features(
    std::span<const std::size_t> cols) const {
  LabeledDataset out;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j)) =
        x.col(static_cast<Eigen::Index>(cols[j]));
    if (!feature_names.empty()) out.feature_names.push_back(feature_names[cols[j]]);
  }
  out.y = y;
  return out;
}

}  // namespace dsaee
