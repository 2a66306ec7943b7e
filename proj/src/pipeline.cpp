#include "dsaee/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "dsaee/error.hpp"
#include "dsaee/random.hpp"
#include "dsaee/sampling.hpp"

namespace dsaee::pipeline {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

json class_json(const LabeledDataset& d) {
  const ClassCounts c = d.class_counts();
  return {{"majority", c.majority}, {"minority", c.minority}};
}

json manifest(const config::RunConfig& cfg, const std::string& command,
              const PreparedData* data, const std::vector<std::string>& outputs) {
  json doc;
  doc["tool"] = "dsaee";
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["settings"] = cfg.settings;
  json seeds;
  seeds["ensemble_master"] = cfg.ensemble.master_seed;
  json components = json::array();
  for (std::size_t b = 0; b < cfg.ensemble.components; ++b) {
    components.push_back(sampling::component_seed(cfg.ensemble.master_seed, b));
  }
  seeds["components"] = components;
  seeds["split"] = cfg.split.seed;
  seeds["eval"] = cfg.eval.split_seed;
  doc["seeds"] = seeds;
  if (data != nullptr) {
    doc["features"] = data->fsds.features();
    doc["fsds"] = class_json(data->fsds);
    doc["cds"] = class_json(data->cds);
  }
  doc["outputs"] = outputs;
  return doc;
}

void write_manifest(const fs::path& out_dir, const json& doc) {
  io::atomic_write(out_dir / "manifest.json", doc.dump(2) + "\n");
}

LabeledDataset load_source(const config::DataSource& src, bool cds) {
  if (src.format == "csv") {
    return io::load_csv(cds ? *src.cds_path : src.path, src.label);
  }
  if (cds) {
    return io::load_idx_images(*src.cds_images, *src.cds_labels, src.classes, src.cds_counts,
                               derive_seed(src.seed, 1));
  }
  return io::load_idx_images(src.images, src.labels, src.classes, src.counts, src.seed);
}

std::vector<std::string> write_selections(const fs::path& out_dir,
                                          const std::vector<ensemble::SelectionResult>& sels,
                                          const std::vector<std::string>& names) {
  std::vector<std::string> outputs;
  for (const ensemble::SelectionResult& sel : sels) {
    const std::string file = selection_file_name(sel.delta_quantile);
    io::atomic_write(out_dir / file, io::selection_json(sel, names));
    outputs.push_back(file);
  }
  io::atomic_write(out_dir / "selections.csv", io::selection_table_csv(sels));
  outputs.push_back("selections.csv");
  return outputs;
}

}  // namespace

PreparedData prepare_data(const config::RunConfig& cfg) {
  const config::DataSource& src = cfg.data;
  const bool separate_cds = src.format == "csv" ? src.cds_path.has_value()
                                                : src.cds_images.has_value();
  PreparedData out;
  if (separate_cds) {
    out.fsds = load_source(src, false);
    out.cds = load_source(src, true);
  } else {
    io::FsdsCds parts = io::build_fsds_cds(load_source(src, false), cfg.split);
    out.fsds = std::move(parts.fsds);
    out.cds = std::move(parts.cds);
  }
  out.fsds.validate();
  if (out.cds.features() != out.fsds.features()) {
    throw DataError("classification set has " + std::to_string(out.cds.features()) +
                    " features but the feature-selection set has " +
                    std::to_string(out.fsds.features()));
  }
  out.scaling = io::fit_scaling(out.fsds.x, cfg.scaling);
  out.fsds.x = io::apply_scaling(out.scaling, out.fsds.x);
  out.cds.x = io::apply_scaling(out.scaling, out.cds.x);
  return out;
}

SelectionRun run_selection(const config::RunConfig& cfg, const PreparedData& data) {
  SelectionRun run;
  run.re = ensemble::run_ensemble(data.fsds, cfg.ensemble);
  run.selections = ensemble::select_at_thresholds(run.re, cfg.deltas, cfg.aggregation);
  return run;
}

std::string selection_file_name(double delta_quantile) {
  return "selection_" + io::format_double(delta_quantile) + ".json";
}

SelectionRun run_select(const config::RunConfig& cfg, const fs::path& out_dir) {
  const PreparedData data = prepare_data(cfg);
  SelectionRun run = run_selection(cfg, data);
  std::vector<std::string> outputs =
      write_selections(out_dir, run.selections, data.fsds.feature_names);
  io::atomic_write(out_dir / "q.csv", io::re_matrix_csv(run.re, data.fsds.feature_names));
  outputs.push_back("q.csv");
  io::save_csv(out_dir / "cds.csv", data.cds);
  outputs.push_back("cds.csv");
  write_manifest(out_dir, manifest(cfg, "select", &data, outputs));
  return run;
}

ensemble::REMatrix run_export_q(const config::RunConfig& cfg, const fs::path& out_file) {
  const PreparedData data = prepare_data(cfg);
  ensemble::REMatrix re = ensemble::run_ensemble(data.fsds, cfg.ensemble);
  io::atomic_write(out_file, io::re_matrix_csv(re, data.fsds.feature_names));
  fs::path manifest_path = out_file;
  manifest_path += ".manifest.json";
  io::atomic_write(manifest_path,
                   manifest(cfg, "export-q", &data, {out_file.filename().string()}).dump(2) + "\n");
  return re;
}

eval::EvalReport run_evaluate(const config::RunConfig& cfg,
                              std::span<const fs::path> selection_files,
                              const std::optional<fs::path>& cds_csv,
                              const fs::path& out_dir) {
  if (selection_files.empty()) throw UsageError("no selection files given");
  std::vector<ensemble::SelectionResult> selections;
  for (const fs::path& p : selection_files) selections.push_back(io::read_selection(p));

  std::optional<PreparedData> data;
  LabeledDataset cds;
  if (cds_csv) {
    cds = io::load_csv(*cds_csv, io::LabelSpec{"label", "1"});
  } else {
    data = prepare_data(cfg);
    cds = data->cds;
  }
  const eval::EvalReport report = eval::evaluate_selection(cds, selections, cfg.eval);
  io::atomic_write(out_dir / "report_rows.csv", io::report_rows_csv(report));
  io::atomic_write(out_dir / "report_summary.csv", io::report_summary_csv(report));
  io::atomic_write(out_dir / "report.json", io::report_json(report));
  json doc = manifest(cfg, "evaluate", data ? &*data : nullptr,
                      {"report_rows.csv", "report_summary.csv", "report.json"});
  json inputs = json::array();
  for (const fs::path& p : selection_files) inputs.push_back(p.string());
  doc["selection_files"] = inputs;
  if (cds_csv) doc["cds_file"] = cds_csv->string();
  write_manifest(out_dir, doc);
  return report;
}

eval::EvalReport run_benchmark(const config::RunConfig& cfg, const fs::path& out_dir) {
  const PreparedData data = prepare_data(cfg);
  const SelectionRun run = run_selection(cfg, data);

  LabeledDataset chi2_input = data.fsds;
  if (cfg.scaling != io::ScalingMode::kUnitInterval) {
    chi2_input.x = io::apply_scaling(
        io::fit_scaling(chi2_input.x, io::ScalingMode::kUnitInterval), chi2_input.x);
  }

  std::vector<eval::FeatureSubset> subsets;
  for (const ensemble::SelectionResult& sel : run.selections) {
    subsets.push_back({"dsaee", sel.delta_quantile, sel.selected});
    subsets.push_back(
        {"chi2", sel.delta_quantile, eval::chi2_rank(chi2_input, sel.selected.size())});
  }
  const eval::EvalReport report = eval::evaluate_subsets(data.cds, subsets, cfg.eval, true);

  std::vector<std::string> outputs =
      write_selections(out_dir, run.selections, data.fsds.feature_names);
  io::atomic_write(out_dir / "benchmark_rows.csv", io::report_rows_csv(report));
  io::atomic_write(out_dir / "benchmark_summary.csv", io::report_summary_csv(report));
  io::atomic_write(out_dir / "benchmark.json", io::report_json(report));
  outputs.insert(outputs.end(), {"benchmark_rows.csv", "benchmark_summary.csv", "benchmark.json"});
  write_manifest(out_dir, manifest(cfg, "benchmark", &data, outputs));
  return report;
}

}  // namespace dsaee::pipeline
