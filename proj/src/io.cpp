#include "dsaee/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "dsaee/error.hpp"
#include "dsaee/random.hpp"

namespace dsaee::io {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || end != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c); });
}

std::vector<unsigned char> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

// Returns the dimension sizes of an IDX file of unsigned bytes with the given
// number of dimensions; payload starts at 4 + 4 * dims.
std::vector<std::size_t> idx_header(const std::vector<unsigned char>& bytes,
                                    std::uint32_t expected_magic,
                                    const fs::path& path) {
  const std::size_t dims = expected_magic & 0xFF;
  if (bytes.size() < 4 + 4 * dims) {
    throw DataError(path.string() + ": file too short for an IDX header");
  }
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != expected_magic) {
    std::ostringstream msg;
    msg << path.string() << ": bad IDX magic number 0x" << std::hex << magic
        << " (expected 0x" << expected_magic << ")";
    throw DataError(msg.str());
  }
  std::vector<std::size_t> shape;
  std::size_t payload = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    shape.push_back(read_be32(bytes, 4 + 4 * d));
    payload *= shape.back();
  }
  if (bytes.size() != 4 + 4 * dims + payload) {
    throw DataError(path.string() + ": IDX payload size does not match its header");
  }
  return shape;
}

std::vector<std::size_t> subsample_sorted(std::vector<std::size_t> rows,
                                          std::optional<std::size_t> count,
                                          Rng& rng, const char* which) {
  if (!count || *count == rows.size()) return rows;
  if (*count > rows.size()) {
    throw DataError(std::string("requested ") + std::to_string(*count) + " " + which +
                    " rows but only " + std::to_string(rows.size()) + " are available");
  }
  std::vector<std::size_t> picks = rng.sample_without_replacement(rows.size(), *count);
  std::sort(picks.begin(), picks.end());
  std::vector<std::size_t> out;
  out.reserve(picks.size());
  for (const std::size_t p : picks) out.push_back(rows[p]);
  return out;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector json_vector(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

json quantile_json(double q) { return std::isnan(q) ? json(nullptr) : json(q); }

}  // namespace

// ---- CSV ----

LabeledDataset parse_csv(std::istream& in, const LabelSpec& spec,
                         std::string_view source_name) {
  const std::string source(source_name);
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (const std::string_view cell : split_commas(line)) header.push_back(unquote(cell));
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == spec.column) {
      label_col = c;
      break;
    }
  }
  if (label_col == header.size() && all_digits(spec.column)) {
    label_col = std::stoul(spec.column);
  }
  if (label_col >= header.size()) {
    throw DataError(source + ": label column '" + spec.column + "' not found in header");
  }

  LabeledDataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) data.feature_names.push_back(header[c]);
  }
  const std::size_t n_features = data.feature_names.size();

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) {
        raw_labels.push_back(unquote(cells[c]));
        continue;
      }
      const std::optional<double> v = parse_number(cells[c]);
      if (!v) {
        throw DataError(source + ": line " + std::to_string(line_no) +
                        ": non-numeric value '" + std::string(trim(cells[c])) +
                        "' in column '" + header[c] + "'");
      }
      values.push_back(*v);
    }
  }
  if (raw_labels.empty()) throw DataError(source + ": no data rows");

  std::map<std::string, std::size_t> label_counts;
  for (const std::string& l : raw_labels) ++label_counts[l];
  if (label_counts.size() != 2) {
    throw DataError(source + ": label column must hold exactly two distinct values, found " +
                    std::to_string(label_counts.size()));
  }
  std::string minority;
  if (spec.minority_label) {
    if (!label_counts.contains(*spec.minority_label)) {
      throw DataError(source + ": minority label '" + *spec.minority_label +
                      "' does not occur in the label column");
    }
    minority = *spec.minority_label;
  } else {
    const auto& [a, na] = *label_counts.begin();
    const auto& [b, nb] = *label_counts.rbegin();
    if (na == nb) {
      throw DataError(source + ": both labels occur " + std::to_string(na) +
                      " times; set the minority label explicitly");
    }
    minority = na < nb ? a : b;
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(raw_labels.size());
  data.x = Eigen::Map<const Matrix>(values.data(), rows,
                                    static_cast<Eigen::Index>(n_features));
  data.y.reserve(raw_labels.size());
  for (const std::string& l : raw_labels) data.y.push_back(l == minority ? 1 : 0);
  return data;
}

LabeledDataset load_csv(const fs::path& path, const LabelSpec& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, spec, path.string());
}

void save_csv(const fs::path& path, const LabeledDataset& data,
              std::string_view label_column) {
  std::string out;
  for (std::size_t j = 0; j < data.features(); ++j) {
    out += data.feature_names.empty() ? "f" + std::to_string(j) : data.feature_names[j];
    out += ',';
  }
  out += label_column;
  out += '\n';
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
      out += format_double(data.x(i, j));
      out += ',';
    }
    out += data.y[static_cast<std::size_t>(i)] == 1 ? '1' : '0';
    out += '\n';
  }
  atomic_write(path, out);
}

// ---- IDX ----

LabeledDataset load_idx_images(const fs::path& images_path,
                               const fs::path& labels_path, ClassPair classes,
                               ClassSubsample counts, std::uint64_t seed) {
  const std::vector<unsigned char> images = read_binary(images_path);
  const std::vector<unsigned char> labels = read_binary(labels_path);
  const std::vector<std::size_t> image_shape = idx_header(images, 0x00000803, images_path);
  const std::vector<std::size_t> label_shape = idx_header(labels, 0x00000801, labels_path);
  if (image_shape[0] != label_shape[0]) {
    throw DataError("image file holds " + std::to_string(image_shape[0]) +
                    " items but label file holds " + std::to_string(label_shape[0]));
  }
  if (classes.majority == classes.minority) {
    throw UsageError("majority and minority classes must differ");
  }
  const std::size_t n_items = image_shape[0];
  const std::size_t height = image_shape[1];
  const std::size_t width = image_shape[2];
  const std::size_t pixels = height * width;
  constexpr std::size_t kImageOffset = 16;
  constexpr std::size_t kLabelOffset = 8;

  std::vector<std::size_t> majority_rows;
  std::vector<std::size_t> minority_rows;
  for (std::size_t i = 0; i < n_items; ++i) {
    const int label = labels[kLabelOffset + i];
    if (label == classes.majority) majority_rows.push_back(i);
    if (label == classes.minority) minority_rows.push_back(i);
  }
  Rng rng(seed);
  auto opt = [](std::size_t c) { return c == 0 ? std::nullopt : std::optional(c); };
  majority_rows = subsample_sorted(majority_rows, opt(counts.majority), rng, "majority");
  minority_rows = subsample_sorted(minority_rows, opt(counts.minority), rng, "minority");

  std::vector<std::size_t> rows = majority_rows;
  rows.insert(rows.end(), minority_rows.begin(), minority_rows.end());
  std::sort(rows.begin(), rows.end());

  LabeledDataset data;
  data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(pixels));
  data.y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t item = rows[r];
    const unsigned char* px = images.data() + kImageOffset + item * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = px[p];
    }
    data.y.push_back(labels[kLabelOffset + item] == classes.minority ? 1 : 0);
  }
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      data.feature_names.push_back("px_" + std::to_string(r) + "_" + std::to_string(c));
    }
  }
  return data;
}

// ---- FSDS / CDS ----

void DatasetSplitSpec::validate() const {
  if (!(fsds_fraction > 0.0 && fsds_fraction < 1.0)) {
    throw UsageError("fsds_fraction must lie strictly between 0 and 1");
  }
}

FsdsCds build_fsds_cds(const LabeledDataset& data, const DatasetSplitSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0));
  const std::vector<std::size_t> majority =
      subsample_sorted(data.rows_of_class(0), spec.majority_count, rng, "majority");
  const std::vector<std::size_t> minority =
      subsample_sorted(data.rows_of_class(1), spec.minority_count, rng, "minority");
  std::vector<std::size_t> pool = majority;
  pool.insert(pool.end(), minority.begin(), minority.end());
  std::sort(pool.begin(), pool.end());

  Labels pool_labels;
  pool_labels.reserve(pool.size());
  for (const std::size_t r : pool) pool_labels.push_back(data.y[r]);
  const eval::SplitIndices split =
      eval::stratified_split(pool_labels, spec.fsds_fraction, derive_seed(spec.seed, 1));

  FsdsCds out;
  for (const std::size_t i : split.train) out.fsds_rows.push_back(pool[i]);
  for (const std::size_t i : split.test) out.cds_rows.push_back(pool[i]);
  out.fsds = data.subset_rows(out.fsds_rows);
  out.cds = data.subset_rows(out.cds_rows);
  return out;
}

// ---- Scaling ----

std::string_view to_string(ScalingMode mode) {
  return mode == ScalingMode::kUnitInterval ? "unit_interval" : "symmetric_unit";
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "unit_interval") return ScalingMode::kUnitInterval;
  if (name == "symmetric_unit") return ScalingMode::kSymmetricUnit;
  throw UsageError("unknown scaling mode '" + std::string(name) +
                   "' (expected unit_interval or symmetric_unit)");
}

ScalingParams fit_scaling(const Matrix& train, ScalingMode mode) {
  if (train.rows() == 0) throw DataError("cannot fit scaling on an empty matrix");
  ScalingParams params;
  params.mode = mode;
  params.min = train.colwise().minCoeff().transpose();
  params.max = train.colwise().maxCoeff().transpose();
  return params;
}

Matrix apply_scaling(const ScalingParams& params, const Matrix& x) {
  if (x.cols() != params.min.size()) {
    throw UsageError("scaling was fit on " + std::to_string(params.min.size()) +
                     " features but the matrix has " + std::to_string(x.cols()));
  }
  const bool symmetric = params.mode == ScalingMode::kSymmetricUnit;
  const double lo = symmetric ? -1.0 : 0.0;
  const double midpoint = symmetric ? 0.0 : 0.5;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = params.max(j) - params.min(j);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (range <= 0.0) {
        out(i, j) = midpoint;
        continue;
      }
      const double unit = std::clamp((x(i, j) - params.min(j)) / range, 0.0, 1.0);
      out(i, j) = symmetric ? 2.0 * unit + lo : unit;
    }
  }
  return out;
}

Matrix invert_scaling(const ScalingParams& params, const Matrix& x) {
  if (x.cols() != params.min.size()) {
    throw UsageError("scaling was fit on " + std::to_string(params.min.size()) +
                     " features but the matrix has " + std::to_string(x.cols()));
  }
  const bool symmetric = params.mode == ScalingMode::kSymmetricUnit;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double range = params.max(j) - params.min(j);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double unit = symmetric ? (x(i, j) + 1.0) / 2.0 : x(i, j);
      out(i, j) = range <= 0.0 ? params.min(j) : params.min(j) + unit * range;
    }
  }
  return out;
}

// ---- Result files ----

void atomic_write(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string selection_json(const ensemble::SelectionResult& result,
                           std::span<const std::string> feature_names) {
  json doc;
  doc["delta_quantile"] = quantile_json(result.delta_quantile);
  doc["threshold"] = result.threshold;
  doc["n_features"] = result.delta.size();
  doc["n_selected"] = result.selected.size();
  doc["selected"] = result.selected;
  if (!feature_names.empty()) {
    json names = json::array();
    for (const std::size_t j : result.selected) names.push_back(feature_names[j]);
    doc["selected_names"] = names;
  }
  doc["delta"] = vector_json(result.delta);
  doc["l_min"] = vector_json(result.l_min);
  doc["l_maj"] = vector_json(result.l_maj);
  return doc.dump(2) + "\n";
}

ensemble::SelectionResult read_selection(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string text(std::istreambuf_iterator<char>(in), {});
  ensemble::SelectionResult result;
  if (trim(text).empty() || text.find_first_not_of(" \t\r\n") == std::string::npos) {
    result.delta_quantile = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  try {
    const json doc = json::parse(text);
    result.delta_quantile = doc.value("delta_quantile", json(nullptr)).is_null()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : doc["delta_quantile"].get<double>();
    result.threshold = doc.value("threshold", 0.0);
    result.selected = doc.at("selected").get<std::vector<std::size_t>>();
    if (doc.contains("delta")) result.delta = json_vector(doc["delta"]);
    if (doc.contains("l_min")) result.l_min = json_vector(doc["l_min"]);
    if (doc.contains("l_maj")) result.l_maj = json_vector(doc["l_maj"]);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": not a selection file (" + e.what() + ")");
  }
  return result;
}

std::string selection_table_csv(std::span<const ensemble::SelectionResult> results) {
  std::string out = "delta_quantile,threshold,n_selected,selected\n";
  for (const ensemble::SelectionResult& r : results) {
    out += format_double(r.delta_quantile) + "," + format_double(r.threshold) + "," +
           std::to_string(r.selected.size()) + ",";
    for (std::size_t i = 0; i < r.selected.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(r.selected[i]);
    }
    out += '\n';
  }
  return out;
}

std::string re_matrix_csv(const ensemble::REMatrix& re,
                          std::span<const std::string> feature_names) {
  std::string out;
  for (std::size_t j = 0; j < re.features(); ++j) {
    out += feature_names.empty() ? "f" + std::to_string(j) : feature_names[j];
    out += ',';
  }
  out += "label\n";
  for (Eigen::Index i = 0; i < re.q.rows(); ++i) {
    for (Eigen::Index j = 0; j < re.q.cols(); ++j) {
      out += format_double(re.q(i, j));
      out += ',';
    }
    out += std::to_string(re.labels[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

std::string report_rows_csv(const eval::EvalReport& report) {
  std::string out =
      "method,classifier,delta_quantile,baseline,trial,n_features,auroc,sensitivity,skipped,note\n";
  for (const eval::EvalRow& row : report.rows) {
    out += row.method + "," + std::string(eval::to_string(row.classifier)) + "," +
           format_double(row.delta_quantile) + "," + (row.baseline ? "1" : "0") + "," +
           std::to_string(row.trial) + "," + std::to_string(row.n_features) + "," +
           (row.skipped ? "" : format_double(row.auroc)) + "," +
           (row.skipped ? "" : format_double(row.sensitivity)) + "," +
           (row.skipped ? "1" : "0") + "," + row.note + "\n";
  }
  return out;
}

std::string report_summary_csv(const eval::EvalReport& report) {
  std::string out =
      "method,classifier,delta_quantile,baseline,n_features,trials,auroc_mean,auroc_std,"
      "sensitivity_mean,sensitivity_std,skipped\n";
  for (const eval::EvalSummary& s : report.summaries) {
    out += s.method + "," + std::string(eval::to_string(s.classifier)) + "," +
           format_double(s.delta_quantile) + "," + (s.baseline ? "1" : "0") + "," +
           std::to_string(s.n_features) + "," + std::to_string(s.trials) + "," +
           format_double(s.auroc_mean) + "," + format_double(s.auroc_std) + "," +
           format_double(s.sensitivity_mean) + "," + format_double(s.sensitivity_std) +
           "," + (s.skipped ? "1" : "0") + "\n";
  }
  return out;
}

std::string report_json(const eval::EvalReport& report) {
  json doc;
  doc["rows"] = json::array();
  for (const eval::EvalRow& row : report.rows) {
    json r = {{"method", row.method},
              {"classifier", eval::to_string(row.classifier)},
              {"delta_quantile", quantile_json(row.delta_quantile)},
              {"baseline", row.baseline},
              {"trial", row.trial},
              {"n_features", row.n_features},
              {"skipped", row.skipped}};
    if (!row.skipped) {
      r["auroc"] = row.auroc;
      r["sensitivity"] = row.sensitivity;
    }
    if (!row.note.empty()) r["note"] = row.note;
    doc["rows"].push_back(r);
  }
  doc["summaries"] = json::array();
  for (const eval::EvalSummary& s : report.summaries) {
    doc["summaries"].push_back({{"method", s.method},
                                {"classifier", eval::to_string(s.classifier)},
                                {"delta_quantile", quantile_json(s.delta_quantile)},
                                {"baseline", s.baseline},
                                {"n_features", s.n_features},
                                {"trials", s.trials},
                                {"auroc_mean", s.auroc_mean},
                                {"auroc_std", s.auroc_std},
                                {"sensitivity_mean", s.sensitivity_mean},
                                {"sensitivity_std", s.sensitivity_std},
                                {"skipped", s.skipped}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace dsaee::io
