#include "dsaee/dsaee.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "dsaee/config.hpp"
#include "dsaee/ensemble.hpp"
#include "dsaee/error.hpp"
#include "dsaee/eval.hpp"
#include "dsaee/io.hpp"
#include "dsaee/log.hpp"
#include "dsaee/pipeline.hpp"
#include "dsaee/synthetic.hpp"

struct dsaee_config {
  dsaee::config::Settings settings;
};

struct dsaee_dataset {
  dsaee::LabeledDataset data;
};

struct dsaee_re_matrix {
  dsaee::ensemble::REMatrix re;
};

struct dsaee_selection {
  dsaee::ensemble::SelectionResult result;
};

namespace {

thread_local std::string last_error;

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
dsaee_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return DSAEE_OK;
  } catch (const dsaee::Error& e) {
    last_error = e.what();
    return static_cast<dsaee_status>(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return DSAEE_ERR_DATA;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DSAEE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DSAEE_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DSAEE_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw dsaee::UsageError(std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* dsaee_version(void) { return "1.0.0"; }

const char* dsaee_last_error(void) { return last_error.c_str(); }

void dsaee_set_log_callback(dsaee_log_fn fn, void* user_data) {
  if (fn == nullptr) {
    dsaee::log::set_sink({});
    return;
  }
  dsaee::log::set_sink([fn, user_data](std::string_view message) {
    const std::string text(message);
    fn(text.c_str(), user_data);
  });
}

dsaee_status dsaee_config_create(dsaee_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new dsaee_config{};
  });
}

dsaee_status dsaee_config_load(const char* path, dsaee_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto cfg = std::make_unique<dsaee_config>();
    cfg->settings = dsaee::config::Settings::from_file(path);
    *out = cfg.release();
  });
}

dsaee_status dsaee_config_set(dsaee_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->settings.set(key, value);
  });
}

dsaee_status dsaee_config_get(const dsaee_config* cfg, const char* key, char* buf,
                              size_t buf_size, size_t* needed) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    const auto& known = dsaee::config::known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw dsaee::UsageError(std::string("unknown config key '") + key + "'");
    }
    const std::string value = cfg->settings.get(key).value_or("");
    if (needed != nullptr) *needed = value.size() + 1;
    if (buf != nullptr && buf_size > 0) {
      const std::size_t n = std::min(value.size(), buf_size - 1);
      std::memcpy(buf, value.data(), n);
      buf[n] = '\0';
    }
  });
}

dsaee_status dsaee_config_validate(const dsaee_config* cfg) {
  return guarded([&] {
    require(cfg, "cfg");
    (void)dsaee::config::resolve(cfg->settings);
  });
}

void dsaee_config_free(dsaee_config* cfg) { delete cfg; }

dsaee_status dsaee_run_select(const dsaee_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    dsaee::pipeline::run_select(dsaee::config::resolve(cfg->settings), out_dir);
  });
}

dsaee_status dsaee_run_export_q(const dsaee_config* cfg, const char* out_file) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_file, "out_file");
    dsaee::pipeline::run_export_q(dsaee::config::resolve(cfg->settings), out_file);
  });
}

dsaee_status dsaee_run_evaluate(const dsaee_config* cfg, const char* const* selection_files,
                                size_t n_files, const char* cds_csv, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    if (n_files > 0) require(selection_files, "selection_files");
    std::vector<std::filesystem::path> files;
    for (size_t i = 0; i < n_files; ++i) {
      require(selection_files[i], "selection file path");
      files.emplace_back(selection_files[i]);
    }
    std::optional<std::filesystem::path> cds;
    if (cds_csv != nullptr) cds = cds_csv;
    dsaee::pipeline::run_evaluate(dsaee::config::resolve(cfg->settings), files, cds, out_dir);
  });
}

dsaee_status dsaee_run_benchmark(const dsaee_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    dsaee::pipeline::run_benchmark(dsaee::config::resolve(cfg->settings), out_dir);
  });
}

dsaee_status dsaee_write_planted(const char* path, size_t majority, size_t minority,
                                 size_t features, size_t planted, double shift,
                                 uint64_t seed, size_t* planted_out) {
  return guarded([&] {
    require(path, "path");
    const dsaee::synthetic::PlantedDataset ds = dsaee::synthetic::make_planted(
        {majority, minority, features, planted, shift, seed});
    dsaee::io::save_csv(path, ds.data);
    if (planted_out != nullptr) {
      std::copy(ds.planted_features.begin(), ds.planted_features.end(), planted_out);
    }
  });
}

dsaee_status dsaee_dataset_create(const double* x, const int* labels, size_t rows,
                                  size_t cols, dsaee_dataset** out) {
  return guarded([&] {
    require(out, "out");
    if (rows > 0 && cols > 0) require(x, "x");
    if (rows > 0) require(labels, "labels");
    auto ds = std::make_unique<dsaee_dataset>();
    ds->data.x = Eigen::Map<const dsaee::Matrix>(x, static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(cols));
    ds->data.y.assign(labels, labels + rows);
    ds->data.validate();
    *out = ds.release();
  });
}

dsaee_status dsaee_dataset_load_csv(const char* path, const char* label_column,
                                    const char* minority_label, dsaee_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    dsaee::io::LabelSpec spec;
    if (label_column != nullptr) spec.column = label_column;
    if (minority_label != nullptr) spec.minority_label = minority_label;
    auto ds = std::make_unique<dsaee_dataset>();
    ds->data = dsaee::io::load_csv(path, spec);
    *out = ds.release();
  });
}

size_t dsaee_dataset_rows(const dsaee_dataset* data) {
  return data == nullptr ? 0 : data->data.rows();
}

size_t dsaee_dataset_cols(const dsaee_dataset* data) {
  return data == nullptr ? 0 : data->data.features();
}

size_t dsaee_dataset_minority_count(const dsaee_dataset* data) {
  return data == nullptr ? 0 : data->data.class_counts().minority;
}

void dsaee_dataset_free(dsaee_dataset* data) { delete data; }

dsaee_status dsaee_ensemble_run(const dsaee_dataset* data, const dsaee_config* cfg,
                                dsaee_re_matrix** out) {
  return guarded([&] {
    require(data, "data");
    require(cfg, "cfg");
    require(out, "out");
    auto re = std::make_unique<dsaee_re_matrix>();
    re->re = dsaee::ensemble::run_ensemble(data->data,
                                           dsaee::config::resolve_ensemble(cfg->settings));
    *out = re.release();
  });
}

size_t dsaee_re_matrix_rows(const dsaee_re_matrix* re) {
  return re == nullptr ? 0 : re->re.rows();
}

size_t dsaee_re_matrix_cols(const dsaee_re_matrix* re) {
  return re == nullptr ? 0 : re->re.features();
}

dsaee_status dsaee_re_matrix_copy(const dsaee_re_matrix* re, double* values, int* labels) {
  return guarded([&] {
    require(re, "re");
    if (values != nullptr) {
      std::copy(re->re.q.data(), re->re.q.data() + re->re.q.size(), values);
    }
    if (labels != nullptr) std::copy(re->re.labels.begin(), re->re.labels.end(), labels);
  });
}

void dsaee_re_matrix_free(dsaee_re_matrix* re) { delete re; }

dsaee_status dsaee_select(const dsaee_re_matrix* re, double delta_quantile,
                          dsaee_selection** out) {
  return guarded([&] {
    require(re, "re");
    require(out, "out");
    auto sel = std::make_unique<dsaee_selection>();
    sel->result = dsaee::ensemble::select_features(dsaee::ensemble::class_mean_re(re->re),
                                                   delta_quantile);
    *out = sel.release();
  });
}

size_t dsaee_selection_count(const dsaee_selection* sel) {
  return sel == nullptr ? 0 : sel->result.selected.size();
}

double dsaee_selection_threshold(const dsaee_selection* sel) {
  return sel == nullptr ? 0.0 : sel->result.threshold;
}

dsaee_status dsaee_selection_indices(const dsaee_selection* sel, size_t* out) {
  return guarded([&] {
    require(sel, "sel");
    require(out, "out");
    std::copy(sel->result.selected.begin(), sel->result.selected.end(), out);
  });
}

dsaee_status dsaee_selection_delta(const dsaee_selection* sel, double* out) {
  return guarded([&] {
    require(sel, "sel");
    require(out, "out");
    std::copy(sel->result.delta.data(), sel->result.delta.data() + sel->result.delta.size(),
              out);
  });
}

void dsaee_selection_free(dsaee_selection* sel) { delete sel; }

dsaee_status dsaee_auroc(const double* scores, const int* labels, size_t n, double* out) {
  return guarded([&] {
    require(scores, "scores");
    require(labels, "labels");
    require(out, "out");
    *out = dsaee::eval::auroc({scores, n}, dsaee::Labels(labels, labels + n));
  });
}

dsaee_status dsaee_sensitivity(const double* scores, const int* labels, size_t n,
                               double cutoff, double* out) {
  return guarded([&] {
    require(scores, "scores");
    require(labels, "labels");
    require(out, "out");
    *out = dsaee::eval::sensitivity({scores, n}, dsaee::Labels(labels, labels + n), cutoff);
  });
}

}  // extern "C"
