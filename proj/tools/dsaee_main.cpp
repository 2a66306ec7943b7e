// Command-line front end over the dsaee C library.
#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dsaee/dsaee.h"

namespace {

struct ConfigDeleter {
  void operator()(dsaee_config* c) const { dsaee_config_free(c); }
};
using ConfigPtr = std::unique_ptr<dsaee_config, ConfigDeleter>;

struct Failure {
  dsaee_status status;
};

void check(dsaee_status s) {
  if (s != DSAEE_OK) throw Failure{s};
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required) {
  auto* c = cmd->add_option("--config,-c", opts.config, "INI configuration file");
  if (config_required) c->required();
  cmd->add_option("--set", opts.sets, "Override a setting, as section.key=value");
}

ConfigPtr load_config(const CommonOptions& opts) {
  dsaee_config* raw = nullptr;
  if (opts.config.empty()) {
    check(dsaee_config_create(&raw));
  } else {
    check(dsaee_config_load(opts.config.c_str(), &raw));
  }
  ConfigPtr cfg(raw);
  for (const std::string& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", kv.c_str());
      throw Failure{DSAEE_ERR_USAGE};
    }
    check(dsaee_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  return cfg;
}

void set_if(dsaee_config* cfg, const char* key, const std::string& value) {
  if (!value.empty()) check(dsaee_config_set(cfg, key, value.c_str()));
}

std::string config_value(const dsaee_config* cfg, const char* key) {
  size_t needed = 0;
  check(dsaee_config_get(cfg, key, nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(dsaee_config_get(cfg, key, buf.data(), buf.size(), &needed));
  buf.resize(needed - 1);
  return buf;
}

std::string output_dir(const dsaee_config* cfg, const std::string& flag) {
  return flag.empty() ? config_value(cfg, "output.directory") : flag;
}

std::string join(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoencoder-ensemble feature selection for imbalanced binary data"};
  app.set_version_flag("--version", dsaee_version());
  app.require_subcommand(1);

  CommonOptions select_opts;
  std::vector<double> deltas;
  std::string components, seed, parallelism;
  auto* select = app.add_subcommand("select", "Train the ensemble and write feature selections");
  add_common(select, select_opts, true);
  select->add_option("--delta", deltas, "Delta quantile in [0, 1); repeatable")
      ->check(CLI::Range(0.0, 1.0));
  select->add_option("--components", components, "Number of ensemble components");
  select->add_option("--seed", seed, "Ensemble master seed");
  select->add_option("--parallelism", parallelism, "Worker threads for components");
  select->add_option("--out,-o", select_opts.out, "Output directory");

  CommonOptions eval_opts;
  std::vector<std::string> selection_files;
  std::string cds_csv;
  auto* evaluate = app.add_subcommand("evaluate", "Score selections with downstream classifiers");
  add_common(evaluate, eval_opts, false);
  evaluate->add_option("--selection,-s", selection_files, "Selection JSON file; repeatable")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--cds", cds_csv, "Classification set CSV written by 'select'")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out,-o", eval_opts.out, "Output directory");

  CommonOptions bench_opts;
  auto* benchmark =
      app.add_subcommand("benchmark", "Compare selections against a chi-squared baseline");
  add_common(benchmark, bench_opts, true);
  benchmark->add_option("--out,-o", bench_opts.out, "Output directory");

  CommonOptions export_opts;
  auto* export_q = app.add_subcommand("export-q", "Write the reconstruction-error matrix");
  add_common(export_q, export_opts, true);
  export_q->add_option("--out,-o", export_opts.out, "Output CSV file")->required();

  std::string planted_out;
  std::size_t majority = 2000, minority = 100, features = 100, planted = 10;
  double shift = 2.0;
  std::uint64_t planted_seed = 0;
  auto* make_planted =
      app.add_subcommand("make-planted", "Write a synthetic dataset with shifted features");
  make_planted->add_option("--out,-o", planted_out, "Output CSV file")->required();
  make_planted->add_option("--majority", majority)->capture_default_str();
  make_planted->add_option("--minority", minority)->capture_default_str();
  make_planted->add_option("--features", features)->capture_default_str();
  make_planted->add_option("--planted", planted)->capture_default_str();
  make_planted->add_option("--shift", shift)->capture_default_str();
  make_planted->add_option("--seed", planted_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : DSAEE_ERR_USAGE;
  }

  try {
    if (*select) {
      ConfigPtr cfg = load_config(select_opts);
      if (!deltas.empty()) check(dsaee_config_set(cfg.get(), "selection.deltas", join(deltas).c_str()));
      set_if(cfg.get(), "ensemble.components", components);
      set_if(cfg.get(), "ensemble.seed", seed);
      set_if(cfg.get(), "ensemble.parallelism", parallelism);
      check(dsaee_run_select(cfg.get(), output_dir(cfg.get(), select_opts.out).c_str()));
    } else if (*evaluate) {
      ConfigPtr cfg = load_config(eval_opts);
      std::vector<const char*> files;
      for (const std::string& f : selection_files) files.push_back(f.c_str());
      check(dsaee_run_evaluate(cfg.get(), files.data(), files.size(),
                               cds_csv.empty() ? nullptr : cds_csv.c_str(),
                               output_dir(cfg.get(), eval_opts.out).c_str()));
    } else if (*benchmark) {
      ConfigPtr cfg = load_config(bench_opts);
      check(dsaee_run_benchmark(cfg.get(), output_dir(cfg.get(), bench_opts.out).c_str()));
    } else if (*export_q) {
      ConfigPtr cfg = load_config(export_opts);
      check(dsaee_run_export_q(cfg.get(), export_opts.out.c_str()));
    } else if (*make_planted) {
      std::vector<size_t> idx(planted);
      check(dsaee_write_planted(planted_out.c_str(), majority, minority, features, planted,
                                shift, planted_seed, idx.data()));
      std::printf("planted features:");
      for (size_t i : idx) std::printf(" %zu", i);
      std::printf("\n");
    }
  } catch (const Failure& f) {
    const char* msg = dsaee_last_error();
    if (msg != nullptr && *msg != '\0') std::fprintf(stderr, "error: %s\n", msg);
    return static_cast<int>(f.status);
  }
  return 0;
}
