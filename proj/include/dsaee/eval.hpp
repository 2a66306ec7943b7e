#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsaee/ensemble.hpp"
#include "dsaee/types.hpp"

// Subset-evaluation harness: simple classifiers trained on a held-out
// classification dataset restricted to a feature subset, scored by AUROC and
// sensitivity, plus the chi-squared filter baseline.
namespace dsaee::eval {

enum class ClassifierKind { kGaussianNb, kLogisticRegression, kKnn };

std::string_view to_string(ClassifierKind kind);
ClassifierKind parse_classifier(std::string_view name);

struct EvalProtocol {
  double train_fraction = 0.7;
  std::uint64_t split_seed = 0;
  std::vector<ClassifierKind> classifiers = {ClassifierKind::kGaussianNb,
                                             ClassifierKind::kLogisticRegression,
                                             ClassifierKind::kKnn};
  std::size_t trials = 5;
  std::size_t knn_k = 5;
  double cutoff = 0.5;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffle, then round(fraction * class size) rows of each class go
// to the training side, clamped so both sides keep at least one row per
// class. Throws DataError if a class has fewer than two rows.
SplitIndices stratified_split(const Labels& labels, double train_fraction,
                              std::uint64_t seed);

// ---- Gaussian naive Bayes ----

struct GaussianNb {
  Matrix means;      // 2 x J, row c = class c
  Matrix variances;  // 2 x J, smoothed
  double log_prior[2] = {0.0, 0.0};
};

// Variances are smoothed by 1e-9 times the largest per-feature variance of
// the training matrix. Throws DataError on single-class input.
GaussianNb fit_gaussian_nb(const Matrix& x, const Labels& y);
// Posterior probability of the minority class for each row.
Vector predict_scores(const GaussianNb& model, const Matrix& x);

// ---- Logistic regression ----

struct LogisticOptions {
  double l2 = 1.0;
  double learning_rate = 0.1;
  std::size_t max_iterations = 1000;
  // Stops once every gradient entry is below this magnitude.
  double tolerance = 1e-6;
};

struct LogisticRegression {
  Vector weights;
  double intercept = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct LogisticObjective {
  double loss = 0.0;
  Vector grad_weights;
  double grad_intercept = 0.0;
};

// Mean log-loss plus l2 / (2 n) * ||w||^2 (intercept unpenalized), and its
// gradient.
LogisticObjective logistic_objective(const Vector& weights, double intercept,
                                     const Matrix& x, const Labels& y,
                                     double l2);

// Full-batch gradient descent from w = 0 and the intercept at the training
// log-odds. The step is the smaller of options.learning_rate and the inverse
// of a smoothness bound of the objective. Non-convergence is reported in the
// result, not thrown.
LogisticRegression fit_logistic_regression(const Matrix& x, const Labels& y,
                                           const LogisticOptions& options = {});
Vector predict_scores(const LogisticRegression& model, const Matrix& x);

// ---- k nearest neighbours ----

struct Knn {
  Matrix x;
  Labels y;
  std::size_t k = 5;
};

// k is clamped to the number of training rows.
Knn fit_knn(const Matrix& x, const Labels& y, std::size_t k);
// Fraction of minority rows among the k nearest (Euclidean) training rows;
// distance ties are broken by lower training index.
Vector predict_scores(const Knn& model, const Matrix& x);

// ---- Metrics ----

// Normalized Mann-Whitney U: probability that a random minority score
// exceeds a random majority score, ties counted one half. Throws DataError
// if a class is absent.
double auroc(std::span<const double> scores, const Labels& labels);

// True positives over all minority rows, predicting minority when
// score > cutoff.
double sensitivity(std::span<const double> scores, const Labels& labels,
                   double cutoff = 0.5);

// ---- Chi-squared filter ----

// Per feature: sum over classes of (O - E)^2 / E with O the class total of
// the feature and E the class row fraction times the overall total.
// Zero-total features score 0. Throws DataError on negative values.
Vector chi2_scores(const LabeledDataset& data);

// Ascending indices of the n_select highest scores (ties to the lower index).
std::vector<std::size_t> chi2_rank(const LabeledDataset& data,
                                   std::size_t n_select);

// ---- Evaluation ----

struct FeatureSubset {
  std::string method;
  // Quantile level the subset came from; NaN when not applicable.
  double delta_quantile = 0.0;
  std::vector<std::size_t> features;
};

struct EvalRow {
  std::string method;
  ClassifierKind classifier = ClassifierKind::kGaussianNb;
  double delta_quantile = 0.0;  // NaN for the all-features baseline
  bool baseline = false;
  std::size_t trial = 0;
  std::size_t n_features = 0;
  double auroc = 0.0;
  double sensitivity = 0.0;
  bool skipped = false;
  std::string note;
};

struct EvalSummary {
  std::string method;
  ClassifierKind classifier = ClassifierKind::kGaussianNb;
  double delta_quantile = 0.0;
  bool baseline = false;
  std::size_t n_features = 0;
  std::size_t trials = 0;  // non-skipped trials
  double auroc_mean = 0.0;
  double auroc_std = 0.0;
  double sensitivity_mean = 0.0;
  double sensitivity_std = 0.0;
  bool skipped = false;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<EvalSummary> summaries;
};

// For each trial t the data is split with seed derive_seed(split_seed, t),
// shared by every subset and classifier. An all-features baseline subset is
// evaluated first when include_baseline is set. Empty subsets produce
// skipped rows and a warning.
EvalReport evaluate_subsets(const LabeledDataset& cds,
                            std::span<const FeatureSubset> subsets,
                            const EvalProtocol& protocol,
                            bool include_baseline = true);

EvalReport evaluate_selection(
    const LabeledDataset& cds,
    std::span<const ensemble::SelectionResult> selections,
    const EvalProtocol& protocol);

}  // namespace dsaee::eval
