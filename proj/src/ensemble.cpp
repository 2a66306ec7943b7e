#include "dsaee/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "dsaee/error.hpp"
#include "dsaee/random.hpp"
#include "dsaee/sampling.hpp"

namespace dsaee::ensemble {
namespace {

Matrix run_component(const LabeledDataset& data, const EnsembleConfig& config,
                     std::size_t index) {
  const std::uint64_t seed = sampling::component_seed(config.master_seed, index);
  const sampling::ComponentSplit split = sampling::build_component_split(data, seed);
  nn::DsaeConfig dsae = config.dsae;
  dsae.seed = derive_seed(seed, 1);
  nn::TrainResult trained =
      nn::train(nn::DsaeModel::initialize(dsae), split.train, config.training);
  return nn::reconstruction_errors(trained.model, split.test);
}

double median_of(std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

void EnsembleConfig::validate() const {
  if (components == 0) throw UsageError("number of components must be at least 1");
  if (parallelism == 0) throw UsageError("parallelism must be at least 1");
  dsae.validate();
  training.validate();
}

REMatrix run_ensemble(const LabeledDataset& data, const EnsembleConfig& config) {
  config.validate();
  data.validate();
  if (data.features() != config.dsae.input_width()) {
    throw UsageError("dataset has " + std::to_string(data.features()) +
                     " features but the autoencoder expects " +
                     std::to_string(config.dsae.input_width()));
  }

  const std::size_t n_components = config.components;
  std::vector<std::optional<Matrix>> blocks(n_components);
  std::vector<std::exception_ptr> failures(n_components);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t b = next++; b < n_components; b = next++) {
      try {
        blocks[b] = run_component(data, config, b);
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(config.parallelism, n_components);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }

  for (std::size_t b = 0; b < n_components; ++b) {
    if (!failures[b]) continue;
    try {
      std::rethrow_exception(failures[b]);
    } catch (const Error& e) {
      throw_error(e.kind(), "component " + std::to_string(b) + ": " + e.what());
    }
  }

  const std::size_t n_minority = data.class_counts().minority;
  const Eigen::Index block_rows = static_cast<Eigen::Index>(2 * n_minority);
  REMatrix re;
  re.q.resize(block_rows * static_cast<Eigen::Index>(n_components),
              static_cast<Eigen::Index>(data.features()));
  re.labels.reserve(static_cast<std::size_t>(re.q.rows()));
  for (std::size_t b = 0; b < n_components; ++b) {
    re.q.middleRows(static_cast<Eigen::Index>(b) * block_rows, block_rows) = *blocks[b];
    re.labels.insert(re.labels.end(), n_minority, 1);
    re.labels.insert(re.labels.end(), n_minority, 0);
  }
  return re;
}

ClassMeans class_mean_re(const REMatrix& re, Aggregation aggregation) {
  if (re.labels.size() != re.rows()) {
    throw UsageError("RE matrix has mismatched label count");
  }
  std::vector<Eigen::Index> minority_rows;
  std::vector<Eigen::Index> majority_rows;
  for (std::size_t i = 0; i < re.labels.size(); ++i) {
    (re.labels[i] == 1 ? minority_rows : majority_rows)
        .push_back(static_cast<Eigen::Index>(i));
  }
  if (minority_rows.empty() || majority_rows.empty()) {
    throw DataError("RE matrix must contain rows of both classes");
  }

  const Eigen::Index cols = re.q.cols();
  auto aggregate = [&](const std::vector<Eigen::Index>& rows) {
    Vector out = Vector::Zero(cols);
    if (aggregation == Aggregation::kMean) {
      for (const Eigen::Index r : rows) out += re.q.row(r).transpose();
      out /= static_cast<double>(rows.size());
    } else {
      std::vector<double> column(rows.size());
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = re.q(rows[i], j);
        out(j) = median_of(column);
      }
    }
    return out;
  };
  return ClassMeans{aggregate(minority_rows), aggregate(majority_rows)};
}

Vector delta_re(const Vector& l_min, const Vector& l_maj) {
  if (l_min.size() != l_maj.size()) {
    throw UsageError("class mean vectors differ in length (" +
                     std::to_string(l_min.size()) + " vs " +
                     std::to_string(l_maj.size()) + ")");
  }
  return l_min - l_maj;
}

double quantile_threshold(std::span<const double> values, double q) {
  if (values.empty()) throw UsageError("quantile of an empty vector");
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double position = static_cast<double>(sorted.size() - 1) * q;
  // Snap rounding noise so that levels like (n-1-c)/(n-1) land on an order
  // statistic instead of just below it.
  if (const double nearest = std::round(position); std::abs(position - nearest) < 1e-9) {
    position = nearest;
  }
  const std::size_t lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(lower);
  return sorted[lower] + fraction * (sorted[upper] - sorted[lower]);
}

double quantile_for_count(std::size_t n, std::size_t count) {
  if (n < 2 || count >= n) {
    throw UsageError("cannot select " + std::to_string(count) + " of " +
                     std::to_string(n) + " features by quantile");
  }
  return static_cast<double>(n - 1 - count) / static_cast<double>(n - 1);
}

SelectionResult select_features(const Vector& delta, double q) {
  if (!(q >= 0.0 && q < 1.0)) {
    throw UsageError("delta quantile " + std::to_string(q) + " is outside [0, 1)");
  }
  if (delta.size() == 0) throw UsageError("delta vector is empty");
  SelectionResult result;
  result.delta = delta;
  result.delta_quantile = q;
  result.threshold = quantile_threshold(
      std::span<const double>(delta.data(), static_cast<std::size_t>(delta.size())), q);
  for (Eigen::Index j = 0; j < delta.size(); ++j) {
    if (delta(j) > result.threshold) {
      result.selected.push_back(static_cast<std::size_t>(j));
    }
  }
  return result;
}

SelectionResult select_features(const ClassMeans& means, double q) {
  SelectionResult result =
      select_features(delta_re(means.minority, means.majority), q);
  result.l_min = means.minority;
  result.l_maj = means.majority;
  return result;
}

std::vector<SelectionResult> select_at_thresholds(
    const REMatrix& re, std::span<const double> quantiles,
    Aggregation aggregation) {
  if (quantiles.empty()) throw UsageError("no delta quantiles requested");
  for (const double q : quantiles) {
    if (!(q >= 0.0 && q < 1.0)) {
      throw UsageError("delta quantile " + std::to_string(q) + " is outside [0, 1)");
    }
  }
  const ClassMeans means = class_mean_re(re, aggregation);
  std::vector<SelectionResult> results;
  results.reserve(quantiles.size());
  for (const double q : quantiles) results.push_back(select_features(means, q));
  return results;
}

}  // namespace dsaee::ensemble
