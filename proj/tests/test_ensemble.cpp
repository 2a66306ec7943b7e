#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>

#include "dsaee/ensemble.hpp"
#include "dsaee/error.hpp"
#include "dsaee/random.hpp"
#include "dsaee/synthetic.hpp"

using namespace dsaee;
using ensemble::Aggregation;

namespace {

ensemble::EnsembleConfig small_config(std::size_t j, std::size_t components) {
  ensemble::EnsembleConfig cfg;
  const std::vector<std::size_t> enc = {j, 3};
  const std::vector<std::size_t> dec = {j};
  const std::vector<nn::Activation> act = {nn::Activation::kTanh};
  cfg.dsae = nn::DsaeConfig::from_widths(enc, act, dec, act, 1e-5, 0);
  cfg.training.epochs = 2;
  cfg.training.batch_size = 16;
  cfg.components = components;
  cfg.master_seed = 9;
  return cfg;
}

LabeledDataset gaussian(std::size_t minority, std::size_t majority, std::size_t j,
                        std::uint64_t seed) {
  synthetic::PlantedSpec spec;
  spec.majority = majority;
  spec.minority = minority;
  spec.features = j;
  spec.planted = std::min<std::size_t>(2, j);
  spec.seed = seed;
  return synthetic::make_planted(spec).data;
}

ensemble::REMatrix q_from(std::initializer_list<std::initializer_list<double>> rows,
                          Labels labels) {
  ensemble::REMatrix re;
  re.q.resize(rows.size(), rows.begin()->size());
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) re.q(r, c++) = v;
    ++r;
  }
  re.labels = std::move(labels);
  return re;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("Q has 2|O|B rows, balanced labels, component-major order") {
  const LabeledDataset d = gaussian(5, 60, 4, 1);
  const auto re = ensemble::run_ensemble(d, small_config(4, 1));
  CHECK(re.rows() == 10);
  CHECK(re.features() == 4);
  const auto re3 = ensemble::run_ensemble(d, small_config(4, 3));
  REQUIRE(re3.rows() == 30);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < 10; ++i) CHECK(re3.labels[10 * b + i] == (i < 5 ? 1 : 0));
  CHECK((re3.q.array() >= 0.0).all());
  // The first component does not depend on how many components follow it.
  CHECK(re3.q.topRows(10) == re.q);
}

TEST_CASE("a 52-minority set with 25 components gives 2600 rows") {
  const LabeledDataset d = gaussian(52, 225, 3, 2);
  auto cfg = small_config(3, 25);
  cfg.training.epochs = 1;
  CHECK(ensemble::run_ensemble(d, cfg).rows() == 2600);
}

TEST_CASE("result does not depend on parallelism") {
  const LabeledDataset d = gaussian(6, 50, 5, 3);
  auto cfg = small_config(5, 7);
  const auto serial = ensemble::run_ensemble(d, cfg);
  cfg.parallelism = 8;
  const auto parallel = ensemble::run_ensemble(d, cfg);
  CHECK(serial.q == parallel.q);
  CHECK(serial.labels == parallel.labels);
}

TEST_CASE("ensemble configuration errors") {
  const LabeledDataset d = gaussian(5, 60, 4, 1);
  auto cfg = small_config(4, 0);
  CHECK_THROWS_AS(ensemble::run_ensemble(d, cfg), UsageError);
  cfg = small_config(5, 2);
  CHECK_THROWS_AS(ensemble::run_ensemble(d, cfg), UsageError);
  cfg = small_config(4, 2);
  cfg.parallelism = 0;
  CHECK_THROWS_AS(ensemble::run_ensemble(d, cfg), UsageError);
}

TEST_CASE("component failures name the component") {
  LabeledDataset d = gaussian(5, 60, 4, 1);
  d.x *= 1e200;
  auto cfg = small_config(4, 3);
  cfg.dsae.encoder_layers[0].activation = nn::Activation::kLinear;
  cfg.dsae.decoder_layers[0].activation = nn::Activation::kLinear;
  try {
    ensemble::run_ensemble(d, cfg);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).rfind("component 0", 0) == 0);
  }
}

TEST_CASE("class means") {
  const auto re = q_from({{1, 0}, {3, 0}, {0, 2}, {0, 2}}, {1, 1, 0, 0});
  const auto m = ensemble::class_mean_re(re);
  CHECK(m.minority == vec({2, 0}));
  CHECK(m.majority == vec({0, 2}));

  const auto same = q_from({{1, 5}, {2, 6}, {1, 5}, {2, 6}}, {1, 1, 0, 0});
  const auto s = ensemble::class_mean_re(same);
  CHECK(s.minority == s.majority);

  const auto med = q_from({{1, 0}, {2, 0}, {9, 0}, {0, 4}, {0, 2}}, {1, 1, 1, 0, 0});
  const auto md = ensemble::class_mean_re(med, Aggregation::kMedian);
  CHECK(md.minority == vec({2, 0}));
  CHECK(md.majority == vec({0, 3}));
}

TEST_CASE("class means match a grouped-mean oracle") {
  Rng rng(4);
  ensemble::REMatrix re;
  re.q.resize(20, 4);
  for (Eigen::Index i = 0; i < 20; ++i) {
    re.labels.push_back(i % 2 == 0 ? 1 : 0);
    for (Eigen::Index j = 0; j < 4; ++j) re.q(i, j) = rng.uniform();
  }
  const auto m = ensemble::class_mean_re(re);
  for (Eigen::Index j = 0; j < 4; ++j) {
    double s[2] = {0, 0};
    int n[2] = {0, 0};
    for (Eigen::Index i = 0; i < 20; ++i) {
      s[re.labels[i]] += re.q(i, j);
      ++n[re.labels[i]];
    }
    CHECK(m.minority(j) == doctest::Approx(s[1] / n[1]).epsilon(1e-14));
    CHECK(m.majority(j) == doctest::Approx(s[0] / n[0]).epsilon(1e-14));
  }
}

TEST_CASE("delta is the element-wise difference") {
  const Vector d = ensemble::delta_re(vec({0.5, 0.1}), vec({0.2, 0.1}));
  CHECK(d(0) == doctest::Approx(0.3));
  CHECK(d(1) == 0.0);
  CHECK(ensemble::delta_re(vec({1, 2}), vec({1, 2})).isZero());
  Rng rng(2);
  Vector a(9), b(9);
  for (int i = 0; i < 9; ++i) {
    a(i) = rng.normal();
    b(i) = rng.normal();
  }
  const Vector d2 = ensemble::delta_re(a, b);
  for (int i = 0; i < 9; ++i) CHECK(d2(i) == a(i) - b(i));
  CHECK_THROWS_AS(ensemble::delta_re(vec({1}), vec({1, 2})), UsageError);
}

TEST_CASE("quantile threshold selection") {
  const Vector delta = vec({0.3, 0.0, 0.9, 0.1});
  const auto r = ensemble::select_features(delta, 0.75);
  CHECK(r.threshold == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(r.selected == std::vector<std::size_t>{2});
  const auto r9 = ensemble::select_features(delta, 0.9);
  CHECK(r9.threshold == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(r9.selected == std::vector<std::size_t>{2});

  const auto zero = ensemble::select_features(delta, 0.0);
  CHECK(zero.threshold == 0.0);
  CHECK(zero.selected == std::vector<std::size_t>{0, 2, 3});

  const Vector flat = Vector::Constant(5, 0.2);
  for (double q : {0.0, 0.5, 0.9}) CHECK(ensemble::select_features(flat, q).selected.empty());

  CHECK_THROWS_AS(ensemble::select_features(delta, 1.0), UsageError);
  CHECK_THROWS_AS(ensemble::select_features(delta, -0.1), UsageError);
  CHECK_THROWS_AS(ensemble::select_features(Vector(), 0.5), UsageError);
}

TEST_CASE("a unique maximum is selected alone at (J-1)/J") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t j = 2 + rng.index(30);
    Vector delta(j);
    for (std::size_t i = 0; i < j; ++i) delta(i) = rng.normal();
    const std::size_t arg = rng.index(j);
    delta(arg) = delta.maxCoeff() + 0.5;
    const auto r = ensemble::select_features(delta, double(j - 1) / double(j));
    CHECK(r.selected == std::vector<std::size_t>{arg});
  }
}

TEST_CASE("quantile_for_count selects exactly count distinct values") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(200);
    Vector delta(n);
    for (std::size_t i = 0; i < n; ++i) delta(i) = rng.normal();
    const std::size_t count = 1 + rng.index(n - 1);
    const auto r = ensemble::select_features(delta, ensemble::quantile_for_count(n, count));
    CHECK(r.selected.size() == count);
  }
}

TEST_CASE("multiple thresholds share class means and nest") {
  const LabeledDataset d = gaussian(8, 80, 12, 5);
  const auto re = ensemble::run_ensemble(d, small_config(12, 3));
  const std::vector<double> grid = {0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.97, 0.99};
  const auto results = ensemble::select_at_thresholds(re, grid);
  REQUIRE(results.size() == grid.size());
  const auto means = ensemble::class_mean_re(re);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(results[i].delta_quantile == grid[i]);
    CHECK(results[i].l_min == means.minority);
    if (i > 0) {
      CHECK(std::includes(results[i - 1].selected.begin(), results[i - 1].selected.end(),
                          results[i].selected.begin(), results[i].selected.end()));
    }
  }
  const std::vector<double> dup = {0.9, 0.9};
  const auto twice = ensemble::select_at_thresholds(re, dup);
  CHECK(twice[0].selected == twice[1].selected);
  CHECK(twice[0].threshold == twice[1].threshold);
}

TEST_CASE("selection is equivariant under feature permutation") {
  Rng rng(12);
  const std::size_t j = 15;
  Vector delta(j);
  for (std::size_t i = 0; i < j; ++i) delta(i) = rng.normal();
  std::vector<std::size_t> perm(j);
  for (std::size_t i = 0; i < j; ++i) perm[i] = i;
  rng.shuffle(std::span<std::size_t>(perm));
  Vector permuted(j);
  for (std::size_t i = 0; i < j; ++i) permuted(i) = delta(perm[i]);
  for (double q : {0.5, 0.8, 0.9}) {
    const auto a = ensemble::select_features(delta, q);
    const auto b = ensemble::select_features(permuted, q);
    CHECK(a.threshold == b.threshold);
    std::vector<std::size_t> mapped;
    for (std::size_t i : b.selected) mapped.push_back(perm[i]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == a.selected);
  }
}
