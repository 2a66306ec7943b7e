#include "dsaee/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsaee/error.hpp"

namespace dsaee::config {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

using KeyValues = std::map<std::string, std::string>;

const KeyValues& defaults() {
  static const KeyValues d = {
      {"data.format", "csv"},
      {"data.label", "label"},
      {"data.scaling", "symmetric_unit"},
      {"data.seed", "0"},
      {"split.fsds_fraction", "0.75"},
      {"split.seed", "0"},
      {"network.encoder_activation", "tanh"},
      {"network.decoder_activation", "tanh"},
      {"network.lambda", "1e-5"},
      {"training.epochs", "100"},
      {"training.batch_size", "100"},
      {"training.learning_rate", "0.001"},
      {"training.beta1", "0.9"},
      {"training.beta2", "0.999"},
      {"training.epsilon", "1e-7"},
      {"ensemble.components", "25"},
      {"ensemble.seed", "0"},
      {"ensemble.parallelism", "1"},
      {"ensemble.aggregation", "mean"},
      {"selection.deltas", "0.65,0.7,0.75,0.8,0.85,0.9,0.95,0.97,0.99"},
      {"eval.train_fraction", "0.7"},
      {"eval.seed", "0"},
      {"eval.classifiers", "gaussian_nb,logistic_regression,knn"},
      {"eval.trials", "5"},
      {"eval.knn_k", "5"},
      {"eval.cutoff", "0.5"},
      {"output.directory", "dsaee_out"},
  };
  return d;
}

// Architectures and training schedules of the reference experiments.
const std::map<std::string, KeyValues>& presets() {
  static const std::map<std::string, KeyValues> p = {
      {"isolet",
       {{"network.encoder", "617-600-500-250-200"},
        {"network.encoder_activation", "tanh-tanh-tanh-relu"},
        {"network.decoder", "250-500-600-617"},
        {"network.decoder_activation", "tanh"},
        {"training.epochs", "100"},
        {"training.batch_size", "10"},
        {"ensemble.components", "25"},
        {"data.scaling", "symmetric_unit"}}},
      {"gisette",
       {{"network.encoder", "5000-1000-500-250-250"},
        {"network.encoder_activation", "sigmoid-sigmoid-relu-relu"},
        {"network.decoder", "250-500-1000-5000"},
        {"network.decoder_activation", "relu-sigmoid-sigmoid-sigmoid"},
        {"training.epochs", "50"},
        {"training.batch_size", "1000"},
        {"ensemble.components", "25"},
        {"data.scaling", "unit_interval"}}},
      {"mnist",
       {{"network.encoder", "784-700-500-250-200"},
        {"network.encoder_activation", "sigmoid"},
        {"network.decoder", "250-500-700-784"},
        {"network.decoder_activation", "sigmoid"},
        {"training.epochs", "50"},
        {"training.batch_size", "100"},
        {"ensemble.components", "50"},
        {"data.scaling", "unit_interval"}}},
      {"fmnist",
       {{"network.encoder", "784-700-500-250-200"},
        {"network.encoder_activation", "tanh-tanh-tanh-relu"},
        {"network.decoder", "250-500-700-784"},
        {"network.decoder_activation", "tanh"},
        {"training.epochs", "100"},
        {"training.batch_size", "100"},
        {"ensemble.components", "50"},
        {"data.scaling", "symmetric_unit"}}},
      {"seizure",
       {{"network.encoder", "178-132-64-32"},
        {"network.encoder_activation", "tanh"},
        {"network.decoder", "64-132-178"},
        {"network.decoder_activation", "tanh"},
        {"training.epochs", "200"},
        {"training.batch_size", "1000"},
        {"ensemble.components", "30"},
        {"data.scaling", "symmetric_unit"},
        {"split.fsds_fraction", "0.7"},
        {"split.minority_count", "500"}}},
  };
  return p;
}

const std::set<std::string>& path_keys() {
  static const std::set<std::string> k = {"data.path",   "data.cds_path",   "data.images",
                                          "data.labels", "data.cds_images", "data.cds_labels",
                                          "output.directory"};
  return k;
}

std::string lookup(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end() || it->second.empty()) {
    throw UsageError("missing required config key '" + key + "'");
  }
  return it->second;
}

std::optional<std::string> maybe(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.emplace_back(strip(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

template <typename T>
T parse_integer(const std::string& key, std::string_view text) {
  text = strip(text);
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError("config key '" + key + "': '" + std::string(text) +
                     "' is not a non-negative integer");
  }
  return value;
}

double parse_real(const std::string& key, std::string_view text) {
  text = strip(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    throw UsageError("config key '" + key + "': '" + std::string(text) + "' is not a number");
  }
  return value;
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& text) {
  std::vector<std::size_t> widths;
  for (const std::string& part : split_on(text, '-')) {
    widths.push_back(parse_integer<std::size_t>(key, part));
  }
  return widths;
}

std::vector<nn::Activation> parse_activations(const std::string& key, const std::string& text) {
  std::vector<nn::Activation> acts;
  for (const std::string& part : split_on(text, '-')) {
    try {
      acts.push_back(nn::parse_activation(part));
    } catch (const UsageError& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
  return acts;
}

std::size_t positive(const KeyValues& kv, const std::string& key) {
  const auto v = parse_integer<std::size_t>(key, lookup(kv, key));
  if (v == 0) throw UsageError("config key '" + key + "' must be positive");
  return v;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::set<std::string> k = {"preset",
                               "data.path",
                               "data.cds_path",
                               "data.minority_label",
                               "data.images",
                               "data.labels",
                               "data.cds_images",
                               "data.cds_labels",
                               "data.majority_class",
                               "data.minority_class",
                               "data.majority_count",
                               "data.minority_count",
                               "data.cds_majority_count",
                               "data.cds_minority_count",
                               "split.majority_count",
                               "split.minority_count",
                               "network.encoder",
                               "network.decoder"};
    for (const auto& [key, value] : defaults()) k.insert(key);
    return std::vector<std::string>(k.begin(), k.end());
  }();
  return keys;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, values] : presets()) names.push_back(name);
  return names;
}

Settings::Settings() { resolve(); }

Settings Settings::from_file(const fs::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError("cannot read config: " + std::string(e.what()));
  }
  Settings settings;
  settings.base_dir_ = fs::absolute(path).parent_path();
  const auto& known = known_keys();
  auto store = [&](const std::string& key, const std::string& raw) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw UsageError(path.string() + ": unknown config key '" + key + "'");
    }
    std::string value(strip(raw));
    if (path_keys().contains(key) && !value.empty() && fs::path(value).is_relative()) {
      value = (settings.base_dir_ / value).lexically_normal().string();
    }
    settings.file_values_[key] = value;
  };
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      store(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) store(name + "." + key, leaf.data());
  }
  settings.resolve();
  return settings;
}

void Settings::set(std::string_view key, std::string_view value) {
  const auto& known = known_keys();
  const std::string k(key);
  if (std::find(known.begin(), known.end(), k) == known.end()) {
    throw UsageError("unknown config key '" + k + "'");
  }
  overrides_[k] = std::string(strip(value));
  resolve();
}

std::optional<std::string> Settings::get(std::string_view key) const {
  return maybe(resolved_, std::string(key));
}

void Settings::resolve() {
  KeyValues out = defaults();
  std::optional<std::string> preset = maybe(overrides_, "preset");
  if (!preset) preset = maybe(file_values_, "preset");
  if (preset) {
    const auto it = presets().find(*preset);
    if (it == presets().end()) {
      std::string names;
      for (const std::string& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("unknown preset '" + *preset + "' (known: " + names + ")");
    }
    for (const auto& [k, v] : it->second) out[k] = v;
  }
  for (const auto& [k, v] : file_values_) out[k] = v;
  for (const auto& [k, v] : overrides_) out[k] = v;
  resolved_ = std::move(out);
}

ensemble::EnsembleConfig resolve_ensemble(const Settings& settings) {
  const KeyValues& kv = settings.values();
  const std::vector<std::size_t> enc = parse_widths("network.encoder", lookup(kv, "network.encoder"));
  const std::vector<std::size_t> dec = parse_widths("network.decoder", lookup(kv, "network.decoder"));
  const auto enc_act =
      parse_activations("network.encoder_activation", lookup(kv, "network.encoder_activation"));
  const auto dec_act =
      parse_activations("network.decoder_activation", lookup(kv, "network.decoder_activation"));
  const double lambda = parse_real("network.lambda", lookup(kv, "network.lambda"));
  ensemble::EnsembleConfig ens;
  ens.master_seed = parse_integer<std::uint64_t>("ensemble.seed", lookup(kv, "ensemble.seed"));
  ens.dsae = nn::DsaeConfig::from_widths(enc, enc_act, dec, dec_act, lambda, ens.master_seed);
  ens.components = positive(kv, "ensemble.components");
  ens.parallelism = positive(kv, "ensemble.parallelism");
  ens.training.epochs = parse_integer<std::size_t>("training.epochs", lookup(kv, "training.epochs"));
  ens.training.batch_size = positive(kv, "training.batch_size");
  ens.training.learning_rate =
      parse_real("training.learning_rate", lookup(kv, "training.learning_rate"));
  ens.training.beta1 = parse_real("training.beta1", lookup(kv, "training.beta1"));
  ens.training.beta2 = parse_real("training.beta2", lookup(kv, "training.beta2"));
  ens.training.epsilon = parse_real("training.epsilon", lookup(kv, "training.epsilon"));
  ens.validate();

  return ens;
}

RunConfig resolve(const Settings& settings) {
  const KeyValues& kv = settings.values();
  RunConfig cfg;
  cfg.settings = kv;

  // data
  DataSource& data = cfg.data;
  data.format = lookup(kv, "data.format");
  data.label.column = lookup(kv, "data.label");
  data.label.minority_label = maybe(kv, "data.minority_label");
  data.seed = parse_integer<std::uint64_t>("data.seed", lookup(kv, "data.seed"));
  if (data.format == "csv") {
    data.path = lookup(kv, "data.path");
    if (auto p = maybe(kv, "data.cds_path")) data.cds_path = *p;
  } else if (data.format == "idx") {
    data.images = lookup(kv, "data.images");
    data.labels = lookup(kv, "data.labels");
    if (auto p = maybe(kv, "data.cds_images")) data.cds_images = *p;
    if (auto p = maybe(kv, "data.cds_labels")) data.cds_labels = *p;
    if (data.cds_images.has_value() != data.cds_labels.has_value()) {
      throw UsageError("data.cds_images and data.cds_labels must be given together");
    }
    data.classes.majority =
        parse_integer<int>("data.majority_class", lookup(kv, "data.majority_class"));
    data.classes.minority =
        parse_integer<int>("data.minority_class", lookup(kv, "data.minority_class"));
    auto count = [&](const std::string& key) {
      const auto v = maybe(kv, key);
      return v ? parse_integer<std::size_t>(key, *v) : std::size_t{0};
    };
    data.counts = {count("data.majority_count"), count("data.minority_count")};
    data.cds_counts = {count("data.cds_majority_count"), count("data.cds_minority_count")};
  } else {
    throw UsageError("config key 'data.format': expected csv or idx, got '" + data.format + "'");
  }
  cfg.scaling = io::parse_scaling_mode(lookup(kv, "data.scaling"));

  // split
  cfg.split.fsds_fraction = parse_real("split.fsds_fraction", lookup(kv, "split.fsds_fraction"));
  cfg.split.seed = parse_integer<std::uint64_t>("split.seed", lookup(kv, "split.seed"));
  if (auto v = maybe(kv, "split.minority_count")) {
    cfg.split.minority_count = parse_integer<std::size_t>("split.minority_count", *v);
  }
  if (auto v = maybe(kv, "split.majority_count")) {
    cfg.split.majority_count = parse_integer<std::size_t>("split.majority_count", *v);
  }
  cfg.split.validate();

  cfg.ensemble = resolve_ensemble(settings);

  const std::string aggregation = lookup(kv, "ensemble.aggregation");
  if (aggregation == "mean") {
    cfg.aggregation = ensemble::Aggregation::kMean;
  } else if (aggregation == "median") {
    cfg.aggregation = ensemble::Aggregation::kMedian;
  } else {
    throw UsageError("config key 'ensemble.aggregation': expected mean or median");
  }

  // selection
  for (const std::string& part : split_on(lookup(kv, "selection.deltas"), ',')) {
    const double q = parse_real("selection.deltas", part);
    if (!(q >= 0.0 && q < 1.0)) {
      throw UsageError("config key 'selection.deltas': " + part + " is outside [0, 1)");
    }
    cfg.deltas.push_back(q);
  }

  // eval
  eval::EvalProtocol& ev = cfg.eval;
  ev.train_fraction = parse_real("eval.train_fraction", lookup(kv, "eval.train_fraction"));
  ev.split_seed = parse_integer<std::uint64_t>("eval.seed", lookup(kv, "eval.seed"));
  ev.classifiers.clear();
  for (const std::string& part : split_on(lookup(kv, "eval.classifiers"), ',')) {
    ev.classifiers.push_back(eval::parse_classifier(part));
  }
  ev.trials = positive(kv, "eval.trials");
  ev.knn_k = positive(kv, "eval.knn_k");
  ev.cutoff = parse_real("eval.cutoff", lookup(kv, "eval.cutoff"));
  ev.validate();

  cfg.output_dir = lookup(kv, "output.directory");
  return cfg;
}

}  // namespace dsaee::config
