#include "dsaee/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "dsaee/error.hpp"
#include "dsaee/log.hpp"
#include "dsaee/random.hpp"

namespace dsaee::eval {
namespace {

constexpr double kNbVarianceSmoothing = 1e-9;

void check_xy(const Matrix& x, const Labels& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw UsageError("feature matrix has " + std::to_string(x.rows()) +
                     " rows but " + std::to_string(y.size()) + " labels");
  }
}

void check_both_classes(const Labels& y, const char* what) {
  const auto minority = std::count(y.begin(), y.end(), 1);
  if (minority == 0 || static_cast<std::size_t>(minority) == y.size()) {
    throw DataError(std::string(what) + " needs rows of both classes");
  }
}

double log1p_exp(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Largest eigenvalue of [x 1]^T [x 1] / n by power iteration.
double design_gram_norm(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n == 0) return 0.0;
  Vector v = Vector::Ones(d + 1) / std::sqrt(static_cast<double>(d + 1));
  double eigenvalue = 0.0;
  for (int it = 0; it < 50; ++it) {
    const Vector xv = x * v.head(d) + Vector::Constant(n, v(d));
    Vector next(d + 1);
    next.head(d) = x.transpose() * xv;
    next(d) = xv.sum();
    next /= static_cast<double>(n);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    eigenvalue = norm;
    v = next / norm;
  }
  return eigenvalue;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) /
                         static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

Vector score_classifier(ClassifierKind kind, const Matrix& x_train,
                        const Labels& y_train, const Matrix& x_test,
                        const EvalProtocol& protocol, bool& converged) {
  converged = true;
  switch (kind) {
    case ClassifierKind::kGaussianNb:
      return predict_scores(fit_gaussian_nb(x_train, y_train), x_test);
    case ClassifierKind::kLogisticRegression: {
      const LogisticRegression model = fit_logistic_regression(x_train, y_train);
      converged = model.converged;
      return predict_scores(model, x_test);
    }
    case ClassifierKind::kKnn:
      return predict_scores(fit_knn(x_train, y_train, protocol.knn_k), x_test);
  }
  throw UsageError("unknown classifier");
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kGaussianNb:
      return "gaussian_nb";
    case ClassifierKind::kLogisticRegression:
      return "logistic_regression";
    case ClassifierKind::kKnn:
      return "knn";
  }
  return "unknown";
}

ClassifierKind parse_classifier(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "gaussian_nb" || lower == "nb") return ClassifierKind::kGaussianNb;
  if (lower == "logistic_regression" || lower == "lr") {
    return ClassifierKind::kLogisticRegression;
  }
  if (lower == "knn") return ClassifierKind::kKnn;
  throw UsageError("unknown classifier '" + std::string(name) +
                   "' (expected gaussian_nb, logistic_regression or knn)");
}

void EvalProtocol::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie strictly between 0 and 1");
  }
  if (classifiers.empty()) throw UsageError("no classifiers requested");
  if (trials == 0) throw UsageError("trials must be at least 1");
  if (knn_k == 0) throw UsageError("knn_k must be at least 1");
}

SplitIndices stratified_split(const Labels& labels, double train_fraction,
                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie strictly between 0 and 1");
  }
  Rng rng(seed);
  SplitIndices split;
  for (const int cls : {0, 1}) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) rows.push_back(i);
    }
    if (rows.size() < 2) {
      throw DataError("class " + std::to_string(cls) + " has " +
                      std::to_string(rows.size()) +
                      " rows; a stratified split needs at least 2");
    }
    rng.shuffle(std::span<std::size_t>(rows));
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(rows.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    split.train.insert(split.train.end(), rows.begin(),
                       rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(),
                      rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

GaussianNb fit_gaussian_nb(const Matrix& x, const Labels& y) {
  check_xy(x, y);
  check_both_classes(y, "naive Bayes fit");
  const Eigen::Index d = x.cols();
  const RowVector overall_mean = x.colwise().mean();
  const double max_variance =
      d == 0 ? 0.0
             : ((x.rowwise() - overall_mean).array().square().colwise().sum() /
                static_cast<double>(x.rows()))
                   .maxCoeff();
  const double epsilon = max_variance > 0.0 ? kNbVarianceSmoothing * max_variance
                                            : kNbVarianceSmoothing;

  GaussianNb model;
  model.means = Matrix::Zero(2, d);
  model.variances = Matrix::Zero(2, d);
  double counts[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    model.means.row(y[i]) += x.row(static_cast<Eigen::Index>(i));
    counts[y[i]] += 1.0;
  }
  for (int c = 0; c < 2; ++c) model.means.row(c) /= counts[c];
  for (std::size_t i = 0; i < y.size(); ++i) {
    model.variances.row(y[i]) +=
        (x.row(static_cast<Eigen::Index>(i)) - model.means.row(y[i]))
            .array()
            .square()
            .matrix();
  }
  for (int c = 0; c < 2; ++c) {
    model.variances.row(c) /= counts[c];
    model.variances.row(c).array() += epsilon;
    model.log_prior[c] = std::log(counts[c] / static_cast<double>(y.size()));
  }
  return model;
}

Vector predict_scores(const GaussianNb& model, const Matrix& x) {
  if (x.cols() != model.means.cols()) {
    throw UsageError("naive Bayes model expects " +
                     std::to_string(model.means.cols()) + " features");
  }
  Vector log_joint[2];
  for (int c = 0; c < 2; ++c) {
    const RowVector mean = model.means.row(c);
    const RowVector var = model.variances.row(c);
    const double log_norm =
        -0.5 * (var.array() * 2.0 * std::numbers::pi).log().sum() + model.log_prior[c];
    log_joint[c] =
        (-0.5 * ((x.rowwise() - mean).array().square().rowwise() / var.array())
                    .rowwise()
                    .sum())
            .matrix() +
        Vector::Constant(x.rows(), log_norm);
  }
  Vector scores(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scores(i) = logistic(log_joint[1](i) - log_joint[0](i));
  }
  return scores;
}

LogisticObjective logistic_objective(const Vector& weights, double intercept,
                                     const Matrix& x, const Labels& y,
                                     double l2) {
  check_xy(x, y);
  const double n = static_cast<double>(x.rows());
  const Vector z = (x * weights).array() + intercept;
  Vector residual(z.size());
  LogisticObjective obj;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double target = static_cast<double>(y[static_cast<std::size_t>(i)]);
    obj.loss += log1p_exp(z(i)) - target * z(i);
    residual(i) = logistic(z(i)) - target;
  }
  obj.loss = obj.loss / n + 0.5 * l2 * weights.squaredNorm() / n;
  obj.grad_weights = (x.transpose() * residual) / n + (l2 / n) * weights;
  obj.grad_intercept = residual.sum() / n;
  return obj;
}

LogisticRegression fit_logistic_regression(const Matrix& x, const Labels& y,
                                           const LogisticOptions& options) {
  check_xy(x, y);
  check_both_classes(y, "logistic regression fit");
  const double n = static_cast<double>(x.rows());
  const double rate =
      static_cast<double>(std::count(y.begin(), y.end(), 1)) / n;

  // The log-loss Hessian is bounded by 1/4 [x 1]^T [x 1] / n + l2 / n.
  const double smoothness = 0.25 * design_gram_norm(x) + options.l2 / n;
  const double step = smoothness > 0.0
                          ? std::min(options.learning_rate, 1.0 / smoothness)
                          : options.learning_rate;

  LogisticRegression model;
  model.weights = Vector::Zero(x.cols());
  model.intercept = std::log(rate / (1.0 - rate));
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const LogisticObjective obj =
        logistic_objective(model.weights, model.intercept, x, y, options.l2);
    const double largest =
        std::max(obj.grad_weights.size() ? obj.grad_weights.cwiseAbs().maxCoeff() : 0.0,
                 std::abs(obj.grad_intercept));
    model.iterations = it;
    if (largest < options.tolerance) {
      model.converged = true;
      return model;
    }
    model.weights -= step * obj.grad_weights;
    model.intercept -= step * obj.grad_intercept;
  }
  model.iterations = options.max_iterations;
  return model;
}

Vector predict_scores(const LogisticRegression& model, const Matrix& x) {
  if (x.cols() != model.weights.size()) {
    throw UsageError("logistic model expects " +
                     std::to_string(model.weights.size()) + " features");
  }
  const Vector z = (x * model.weights).array() + model.intercept;
  return z.unaryExpr([](double v) { return logistic(v); });
}

Knn fit_knn(const Matrix& x, const Labels& y, std::size_t k) {
  check_xy(x, y);
  if (x.rows() == 0) throw DataError("kNN fit on an empty training set");
  if (k == 0) throw UsageError("k must be at least 1");
  return Knn{x, y, std::min(k, y.size())};
}

Vector predict_scores(const Knn& model, const Matrix& x) {
  if (x.cols() != model.x.cols()) {
    throw UsageError("kNN model expects " + std::to_string(model.x.cols()) +
                     " features");
  }
  const std::size_t n_train = model.y.size();
  Vector scores(x.rows());
  std::vector<std::pair<double, std::size_t>> dist(n_train);
  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    for (std::size_t i = 0; i < n_train; ++i) {
      dist[i] = {(model.x.row(static_cast<Eigen::Index>(i)) - x.row(q)).squaredNorm(), i};
    }
    std::partial_sort(dist.begin(),
                      dist.begin() + static_cast<std::ptrdiff_t>(model.k),
                      dist.end());
    std::size_t minority = 0;
    for (std::size_t r = 0; r < model.k; ++r) minority += model.y[dist[r].second] == 1;
    scores(q) = static_cast<double>(minority) / static_cast<double>(model.k);
  }
  return scores;
}

double auroc(std::span<const double> scores, const Labels& labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of mid-ranks (1-based) of the minority rows.
  double minority_rank_sum = 0.0;
  double n_minority = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && scores[order[stop]] == scores[order[start]]) ++stop;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t r = start; r < stop; ++r) {
      if (labels[order[r]] == 1) {
        minority_rank_sum += mid_rank;
        n_minority += 1.0;
      }
    }
    start = stop;
  }
  const double n_majority = static_cast<double>(n) - n_minority;
  if (n_minority == 0.0 || n_majority == 0.0) {
    throw DataError("AUROC needs scores for both classes");
  }
  const double u = minority_rank_sum - n_minority * (n_minority + 1.0) / 2.0;
  return u / (n_minority * n_majority);
}

double sensitivity(std::span<const double> scores, const Labels& labels,
                   double cutoff) {
  if (scores.size() != labels.size()) {
    throw UsageError("scores and labels differ in length");
  }
  std::size_t positives = 0;
  std::size_t true_positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    ++positives;
    if (scores[i] > cutoff) ++true_positives;
  }
  if (positives == 0) throw DataError("sensitivity needs minority rows");
  return static_cast<double>(true_positives) / static_cast<double>(positives);
}

Vector chi2_scores(const LabeledDataset& data) {
  check_xy(data.x, data.y);
  if (data.x.size() > 0 && data.x.minCoeff() < 0.0) {
    throw DataError(
        "chi-squared scores need non-negative features; rescale to [0, 1] (unit_interval scaling)");
  }
  const Eigen::Index d = data.x.cols();
  Vector observed[2] = {Vector::Zero(d), Vector::Zero(d)};
  double counts[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    observed[data.y[i]] += data.x.row(static_cast<Eigen::Index>(i)).transpose();
    counts[data.y[i]] += 1.0;
  }
  const double n = counts[0] + counts[1];
  const Vector total = observed[0] + observed[1];
  Vector scores = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (total(j) == 0.0) continue;
    for (int c = 0; c < 2; ++c) {
      const double expected = counts[c] / n * total(j);
      if (expected == 0.0) continue;
      const double diff = observed[c](j) - expected;
      scores(j) += diff * diff / expected;
    }
  }
  return scores;
}

std::vector<std::size_t> chi2_rank(const LabeledDataset& data,
                                   std::size_t n_select) {
  const Vector scores = chi2_scores(data);
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  order.resize(std::min(n_select, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

EvalReport evaluate_subsets(const LabeledDataset& cds,
                            std::span<const FeatureSubset> subsets,
                            const EvalProtocol& protocol,
                            bool include_baseline) {
  protocol.validate();
  check_xy(cds.x, cds.y);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<FeatureSubset> all;
  if (include_baseline) {
    FeatureSubset baseline{"baseline", nan, {}};
    baseline.features.resize(cds.features());
    std::iota(baseline.features.begin(), baseline.features.end(), std::size_t{0});
    all.push_back(std::move(baseline));
  }
  all.insert(all.end(), subsets.begin(), subsets.end());
  for (const FeatureSubset& subset : all) {
    for (const std::size_t j : subset.features) {
      if (j >= cds.features()) {
        throw DataError("feature index " + std::to_string(j) +
                        " is out of range for a dataset with " +
                        std::to_string(cds.features()) + " features");
      }
    }
  }

  EvalReport report;
  std::size_t non_converged = 0;
  std::size_t empty = 0;
  for (std::size_t trial = 0; trial < protocol.trials; ++trial) {
    const SplitIndices split =
        stratified_split(cds.y, protocol.train_fraction,
                         derive_seed(protocol.split_seed, trial));
    const LabeledDataset train = cds.subset_rows(split.train);
    const LabeledDataset test = cds.subset_rows(split.test);
    for (std::size_t s = 0; s < all.size(); ++s) {
      const FeatureSubset& subset = all[s];
      const bool is_baseline = include_baseline && s == 0;
      const LabeledDataset train_f = train.subset_features(subset.features);
      const LabeledDataset test_f = test.subset_features(subset.features);
      for (const ClassifierKind kind : protocol.classifiers) {
        EvalRow row;
        row.method = subset.method;
        row.classifier = kind;
        row.delta_quantile = subset.delta_quantile;
        row.baseline = is_baseline;
        row.trial = trial;
        row.n_features = subset.features.size();
        if (subset.features.empty()) {
          row.skipped = true;
          row.note = "empty selection";
          ++empty;
          report.rows.push_back(std::move(row));
          continue;
        }
        bool converged = true;
        const Vector scores =
            score_classifier(kind, train_f.x, train_f.y, test_f.x, protocol, converged);
        const std::span<const double> score_span(
            scores.data(), static_cast<std::size_t>(scores.size()));
        row.auroc = auroc(score_span, test_f.y);
        row.sensitivity = sensitivity(score_span, test_f.y, protocol.cutoff);
        if (!converged) {
          row.note = "not converged";
          ++non_converged;
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  if (empty > 0) {
    log::warn(std::to_string(empty) + " evaluation(s) skipped for empty feature selections");
  }
  if (non_converged > 0) {
    log::warn(std::to_string(non_converged) +
              " logistic regression fit(s) did not converge within the iteration limit");
  }

  // Summaries keyed by (subset position, classifier), in first-seen order.
  std::map<std::pair<std::size_t, ClassifierKind>, std::size_t> slot;
  std::vector<std::vector<double>> aurocs;
  std::vector<std::vector<double>> sens;
  const std::size_t per_trial = all.size() * protocol.classifiers.size();
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const EvalRow& row = report.rows[r];
    const std::size_t subset_pos = (r % per_trial) / protocol.classifiers.size();
    auto [it, inserted] =
        slot.try_emplace({subset_pos, row.classifier}, report.summaries.size());
    if (inserted) {
      EvalSummary summary;
      summary.method = row.method;
      summary.classifier = row.classifier;
      summary.delta_quantile = row.delta_quantile;
      summary.baseline = row.baseline;
      summary.n_features = row.n_features;
      summary.skipped = row.skipped;
      report.summaries.push_back(summary);
      aurocs.emplace_back();
      sens.emplace_back();
    }
    if (!row.skipped) {
      aurocs[it->second].push_back(row.auroc);
      sens[it->second].push_back(row.sensitivity);
    }
  }
  for (std::size_t i = 0; i < report.summaries.size(); ++i) {
    EvalSummary& summary = report.summaries[i];
    summary.trials = aurocs[i].size();
    summary.auroc_mean = mean_of(aurocs[i]);
    summary.auroc_std = population_std(aurocs[i]);
    summary.sensitivity_mean = mean_of(sens[i]);
    summary.sensitivity_std = population_std(sens[i]);
  }
  return report;
}

EvalReport evaluate_selection(
    const LabeledDataset& cds,
    std::span<const ensemble::SelectionResult> selections,
    const EvalProtocol& protocol) {
  std::vector<FeatureSubset> subsets;
  subsets.reserve(selections.size());
  for (const ensemble::SelectionResult& sel : selections) {
    subsets.push_back({"dsaee", sel.delta_quantile, sel.selected});
  }
  return evaluate_subsets(cds, subsets, protocol, true);
}

}  // namespace dsaee::eval
