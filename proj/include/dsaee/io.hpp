#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsaee/ensemble.hpp"
#include "dsaee/eval.hpp"
#include "dsaee/types.hpp"

namespace dsaee::io {

// ---- CSV ----

struct LabelSpec {
  // Header name of the label column, or its 0-based index when no header
  // cell carries that name.
  std::string column = "label";
  // Raw label value of the minority class; by default the rarer value.
  std::optional<std::string> minority_label;
};

// Header row, comma-delimited, '.' decimal separator. Every non-label cell
// must be numeric and the label column must hold exactly two distinct values.
// Errors carry 1-based line numbers (the header is line 1).
LabeledDataset parse_csv(std::istream& in, const LabelSpec& spec,
                         std::string_view source_name = "<input>");
LabeledDataset load_csv(const std::filesystem::path& path, const LabelSpec& spec);

// Writes features at round-trip precision and the label as 0/1.
void save_csv(const std::filesystem::path& path, const LabeledDataset& data,
              std::string_view label_column = "label");

// ---- IDX (MNIST-style) ----

struct ClassPair {
  int majority = 0;
  int minority = 0;
};

// Rows kept per class after filtering; 0 keeps every row.
struct ClassSubsample {
  std::size_t majority = 0;
  std::size_t minority = 0;
};

// Reads a big-endian IDX image file (magic 0x00000803, unsigned bytes) and
// label file (magic 0x00000801), keeps the two requested digit classes,
// optionally subsamples each class uniformly with `seed` (dataset order is
// preserved) and flattens each image row-major. Pixel values stay in
// [0, 255].
LabeledDataset load_idx_images(const std::filesystem::path& images_path,
                               const std::filesystem::path& labels_path,
                               ClassPair classes, ClassSubsample counts = {},
                               std::uint64_t seed = 0);

// ---- FSDS / CDS construction ----

struct DatasetSplitSpec {
  double fsds_fraction = 0.75;
  std::uint64_t seed = 0;
  // Optional per-class subsampling applied before the split.
  std::optional<std::size_t> minority_count;
  std::optional<std::size_t> majority_count;

  void validate() const;
};

struct FsdsCds {
  LabeledDataset fsds;
  LabeledDataset cds;
  // Row indices into the input dataset.
  std::vector<std::size_t> fsds_rows;
  std::vector<std::size_t> cds_rows;
};

// Subsamples (stream derive_seed(seed, 0)), then splits each class with
// eval::stratified_split (stream derive_seed(seed, 1)).
FsdsCds build_fsds_cds(const LabeledDataset& data, const DatasetSplitSpec& spec);

// ---- Scaling ----

enum class ScalingMode { kUnitInterval, kSymmetricUnit };

std::string_view to_string(ScalingMode mode);
ScalingMode parse_scaling_mode(std::string_view name);

struct ScalingParams {
  ScalingMode mode = ScalingMode::kUnitInterval;
  Vector min;
  Vector max;
};

ScalingParams fit_scaling(const Matrix& train, ScalingMode mode);
// Maps [min, max] onto [0, 1] or [-1, 1], clipping values outside the fitted
// range; constant features map to the midpoint of the target range.
Matrix apply_scaling(const ScalingParams& params, const Matrix& x);
// Inverse of apply_scaling on non-clipped values of non-constant features.
Matrix invert_scaling(const ScalingParams& params, const Matrix& x);

// ---- Result files ----

// Replaces `path` atomically by writing a sibling temporary and renaming it.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

// Shortest round-trip decimal representation.
std::string format_double(double value);

std::string selection_json(const ensemble::SelectionResult& result,
                           std::span<const std::string> feature_names);
// Accepts files written by selection_json(). An empty file yields an empty
// selection with a NaN quantile level.
ensemble::SelectionResult read_selection(const std::filesystem::path& path);

// One row per quantile level: delta_quantile,threshold,n_selected,selected
// (indices separated by spaces).
std::string selection_table_csv(std::span<const ensemble::SelectionResult> results);

// Q with its label column: one header row of feature names plus "label".
std::string re_matrix_csv(const ensemble::REMatrix& re,
                          std::span<const std::string> feature_names);

std::string report_rows_csv(const eval::EvalReport& report);
std::string report_summary_csv(const eval::EvalReport& report);
std::string report_json(const eval::EvalReport& report);

}  // namespace dsaee::io
