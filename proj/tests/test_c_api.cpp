#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dsaee/dsaee.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dsaee_test_c_api_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DSAEE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

dsaee_config* small_config() {
  dsaee_config* cfg = nullptr;
  REQUIRE(dsaee_config_create(&cfg) == DSAEE_OK);
  REQUIRE(dsaee_config_set(cfg, "network.encoder", "4-3") == DSAEE_OK);
  REQUIRE(dsaee_config_set(cfg, "network.decoder", "4") == DSAEE_OK);
  REQUIRE(dsaee_config_set(cfg, "training.epochs", "3") == DSAEE_OK);
  REQUIRE(dsaee_config_set(cfg, "training.batch_size", "16") == DSAEE_OK);
  REQUIRE(dsaee_config_set(cfg, "ensemble.components", "2") == DSAEE_OK);
  return cfg;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::string(dsaee_version()) == "1.0.0");
  dsaee_config* cfg = nullptr;
  REQUIRE(dsaee_config_create(&cfg) == DSAEE_OK);
  CHECK(std::string(dsaee_last_error()).empty());
  CHECK(dsaee_config_set(cfg, "nope.key", "1") == DSAEE_ERR_USAGE);
  CHECK(std::string(dsaee_last_error()).find("nope.key") != std::string::npos);
  CHECK(dsaee_config_validate(cfg) == DSAEE_ERR_USAGE);
  CHECK(dsaee_config_create(nullptr) == DSAEE_ERR_USAGE);
  dsaee_config_free(cfg);
  dsaee_config_free(nullptr);
}

TEST_CASE("config get copies and truncates") {
  dsaee_config* cfg = nullptr;
  REQUIRE(dsaee_config_create(&cfg) == DSAEE_OK);
  size_t needed = 0;
  char buf[4];
  CHECK(dsaee_config_get(cfg, "training.learning_rate", buf, sizeof buf, &needed) == DSAEE_OK);
  CHECK(needed == 6);
  CHECK(std::string(buf) == "0.0");
  char big[32];
  CHECK(dsaee_config_get(cfg, "data.path", big, sizeof big, &needed) == DSAEE_OK);
  CHECK(needed == 1);
  CHECK(std::string(big).empty());
  CHECK(dsaee_config_get(cfg, "missing", big, sizeof big, &needed) == DSAEE_ERR_USAGE);
  dsaee_config_free(cfg);
}

TEST_CASE("ensemble and selection through handles") {
  const std::size_t rows = 60, cols = 4;
  std::vector<double> x(rows * cols);
  std::vector<int> y(rows, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    y[i] = i % 10 == 0;
    for (std::size_t j = 0; j < cols; ++j)
      x[i * cols + j] = 0.1 * double((i * 7 + j * 3) % 11) + (y[i] && j == 2 ? 1.0 : 0.0);
  }
  dsaee_dataset* data = nullptr;
  REQUIRE(dsaee_dataset_create(x.data(), y.data(), rows, cols, &data) == DSAEE_OK);
  CHECK(dsaee_dataset_rows(data) == rows);
  CHECK(dsaee_dataset_cols(data) == cols);
  CHECK(dsaee_dataset_minority_count(data) == 6);

  dsaee_config* cfg = small_config();
  dsaee_re_matrix* re = nullptr;
  REQUIRE(dsaee_ensemble_run(data, cfg, &re) == DSAEE_OK);
  CHECK(dsaee_re_matrix_rows(re) == 2 * 6 * 2);
  CHECK(dsaee_re_matrix_cols(re) == cols);
  std::vector<double> q(24 * cols);
  std::vector<int> labels(24);
  CHECK(dsaee_re_matrix_copy(re, q.data(), labels.data()) == DSAEE_OK);
  CHECK(labels[0] == 1);
  CHECK(labels[6] == 0);
  CHECK(labels[12] == 1);

  dsaee_selection* sel = nullptr;
  REQUIRE(dsaee_select(re, 0.5, &sel) == DSAEE_OK);
  const std::size_t n = dsaee_selection_count(sel);
  CHECK(n == 2);
  std::vector<size_t> idx(n);
  CHECK(dsaee_selection_indices(sel, idx.data()) == DSAEE_OK);
  std::vector<double> delta(cols);
  CHECK(dsaee_selection_delta(sel, delta.data()) == DSAEE_OK);
  for (size_t i : idx) CHECK(delta[i] > dsaee_selection_threshold(sel));
  CHECK(dsaee_select(re, 1.0, &sel) == DSAEE_ERR_USAGE);

  dsaee_selection_free(sel);
  dsaee_re_matrix_free(re);
  dsaee_config_free(cfg);
  dsaee_dataset_free(data);
}

TEST_CASE("invalid datasets are data errors") {
  const double x[4] = {1, 2, 3, 4};
  const int one_class[4] = {0, 0, 0, 0};
  dsaee_dataset* data = nullptr;
  CHECK(dsaee_dataset_create(x, one_class, 4, 1, &data) == DSAEE_ERR_DATA);
  CHECK(data == nullptr);
  CHECK(dsaee_dataset_load_csv("/nonexistent.csv", nullptr, nullptr, &data) == DSAEE_ERR_DATA);
  CHECK(dsaee_dataset_create(nullptr, one_class, 4, 1, &data) == DSAEE_ERR_USAGE);
}

TEST_CASE("log callback receives warnings") {
  std::vector<std::string> seen;
  dsaee_set_log_callback(
      [](const char* m, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(m); },
      &seen);
  const double x[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  const int y[6] = {1, 0, 0, 0, 0, 0};
  dsaee_dataset* data = nullptr;
  REQUIRE(dsaee_dataset_create(x, y, 6, 2, &data) == DSAEE_OK);
  dsaee_config* cfg = nullptr;
  REQUIRE(dsaee_config_create(&cfg) == DSAEE_OK);
  dsaee_config_set(cfg, "network.encoder", "2-1");
  dsaee_config_set(cfg, "network.decoder", "2");
  dsaee_config_set(cfg, "training.epochs", "1");
  dsaee_config_set(cfg, "ensemble.components", "1");
  dsaee_re_matrix* re = nullptr;
  CHECK(dsaee_ensemble_run(data, cfg, &re) == DSAEE_OK);
  dsaee_set_log_callback(nullptr, nullptr);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].find("batch_size") != std::string::npos);
  dsaee_re_matrix_free(re);
  dsaee_config_free(cfg);
  dsaee_dataset_free(data);
}

TEST_CASE("metrics") {
  const double s[4] = {0.1, 0.4, 0.35, 0.8};
  const int y[4] = {0, 0, 1, 1};
  double out = 0;
  CHECK(dsaee_auroc(s, y, 4, &out) == DSAEE_OK);
  CHECK(out == 0.75);
  const double s2[4] = {0.9, 0.2, 0.6, 0.8};
  const int y2[4] = {1, 1, 1, 0};
  CHECK(dsaee_sensitivity(s2, y2, 4, 0.5, &out) == DSAEE_OK);
  CHECK(out == doctest::Approx(2.0 / 3.0));
  const int none[4] = {0, 0, 0, 0};
  CHECK(dsaee_auroc(s, none, 4, &out) == DSAEE_ERR_DATA);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = fresh_dir("cli");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("select --bogus") == 1);
  CHECK(run_cli("select") == 1);

  size_t planted[3];
  REQUIRE(dsaee_write_planted((dir / "data.csv").c_str(), 200, 20, 6, 3, 2.0, 1, planted) ==
          DSAEE_OK);
  write_file(dir / "run.ini",
             "[data]\npath = data.csv\nminority_label = 1\n"
             "[network]\nencoder = 6-4-2\ndecoder = 4-6\n"
             "[training]\nepochs = 3\nbatch_size = 32\n"
             "[ensemble]\ncomponents = 2\n"
             "[eval]\ntrials = 2\n");
  const std::string ini = (dir / "run.ini").string();
  const std::string out = (dir / "out").string();

  CHECK(run_cli("select -c " + ini + " --set training.epoch=3") == 1);
  CHECK(run_cli("select -c " + ini + " --set training.epochs") == 1);
  CHECK(run_cli("select -c " + (dir / "missing.ini").string()) == 1);
  CHECK(run_cli("select -c " + ini + " --set data.path=" + (dir / "none.csv").string()) == 2);
  CHECK(run_cli("select -c " + ini +
                " --set training.learning_rate=1e308 --set network.decoder_activation=linear -o " +
                (dir / "overflow").string()) == 3);

  CHECK(run_cli("select -c " + ini + " --delta 0.9 -o " + out) == 0);
  CHECK(fs::exists(dir / "out" / "selection_0.9.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "selection_0.65.json"));
  CHECK(fs::exists(dir / "out" / "manifest.json"));

  write_file(dir / "empty.json", "");
  CHECK(run_cli("evaluate -c " + ini + " -s " + (dir / "empty.json").string() + " --cds " +
                (dir / "out" / "cds.csv").string() + " -o " + (dir / "eval").string()) == 0);
  CHECK(fs::exists(dir / "eval" / "report_rows.csv"));
  CHECK(run_cli("evaluate -s " + (dir / "nope.json").string()) == 1);

  CHECK(run_cli("export-q -c " + ini + " -o " + (dir / "q.csv").string()) == 0);
  CHECK(fs::exists(dir / "q.csv"));
  CHECK(run_cli("make-planted -o " + (dir / "p.csv").string() + " --features 20") == 0);
  fs::remove_all(dir);
}
