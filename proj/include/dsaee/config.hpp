#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsaee/ensemble.hpp"
#include "dsaee/eval.hpp"
#include "dsaee/io.hpp"

namespace dsaee::config {

// Raw key/value settings addressed as "section.key" (e.g. "training.epochs").
// Resolution order, lowest to highest priority: built-in defaults, the
// preset named by the "preset" key, the config file, explicit overrides.
class Settings {
 public:
  // Built-in defaults only.
  Settings();

  // Parses an INI-style file: top-level "preset = name" plus [data], [split],
  // [network], [training], [ensemble], [selection], [eval] and [output]
  // sections. Relative paths resolve against the file's directory.
  static Settings from_file(const std::filesystem::path& path);

  // Throws UsageError for unknown keys.
  void set(std::string_view key, std::string_view value);

  std::optional<std::string> get(std::string_view key) const;
  const std::map<std::string, std::string>& values() const { return resolved_; }

  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  void resolve();

  std::map<std::string, std::string> file_values_;
  std::map<std::string, std::string> overrides_;
  std::map<std::string, std::string> resolved_;
  std::filesystem::path base_dir_;
};

// Every accepted key.
const std::vector<std::string>& known_keys();

// Names of the architecture/training presets.
std::vector<std::string> preset_names();

struct DataSource {
  std::string format = "csv";  // "csv" or "idx"
  std::filesystem::path path;
  std::optional<std::filesystem::path> cds_path;
  io::LabelSpec label;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> cds_images;
  std::optional<std::filesystem::path> cds_labels;
  io::ClassPair classes;
  io::ClassSubsample counts;
  io::ClassSubsample cds_counts;
  std::uint64_t seed = 0;
};

struct RunConfig {
  DataSource data;
  io::ScalingMode scaling = io::ScalingMode::kSymmetricUnit;
  io::DatasetSplitSpec split;
  ensemble::EnsembleConfig ensemble;
  ensemble::Aggregation aggregation = ensemble::Aggregation::kMean;
  std::vector<double> deltas;
  eval::EvalProtocol eval;
  std::filesystem::path output_dir;
  // Resolved settings, echoed into run manifests.
  std::map<std::string, std::string> settings;
};

// Network, training and ensemble settings only.
ensemble::EnsembleConfig resolve_ensemble(const Settings& settings);

// Builds and validates the typed configuration. Throws UsageError naming the
// offending key.
RunConfig resolve(const Settings& settings);

}  // namespace dsaee::config
