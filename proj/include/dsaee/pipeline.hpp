#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsaee/config.hpp"
#include "dsaee/ensemble.hpp"
#include "dsaee/eval.hpp"
#include "dsaee/io.hpp"

// End-to-end runs behind the CLI commands. Every run writes a manifest.json
// echoing the resolved settings and derived seeds; no timestamps or host
// details are recorded so reruns produce identical files.
namespace dsaee::pipeline {

struct PreparedData {
  LabeledDataset fsds;
  LabeledDataset cds;
  io::ScalingParams scaling;
};

// Loads the configured source, builds FSDS/CDS and scales both with
// parameters fit on the FSDS.
PreparedData prepare_data(const config::RunConfig& cfg);

struct SelectionRun {
  ensemble::REMatrix re;
  std::vector<ensemble::SelectionResult> selections;
};

SelectionRun run_selection(const config::RunConfig& cfg, const PreparedData& data);

std::string selection_file_name(double delta_quantile);

// Writes q.csv, selection_<delta>.json per level, selections.csv, cds.csv
// (the scaled classification set) and manifest.json into out_dir.
SelectionRun run_select(const config::RunConfig& cfg, const std::filesystem::path& out_dir);

// Writes only the labelled RE matrix.
ensemble::REMatrix run_export_q(const config::RunConfig& cfg,
                                const std::filesystem::path& out_file);

// Evaluates selection files on the CDS: `cds_csv` (already scaled, label
// column "label" with minority 1) when given, otherwise the CDS rebuilt from
// the config. Writes report_rows.csv, report_summary.csv, report.json and
// manifest.json.
eval::EvalReport run_evaluate(const config::RunConfig& cfg,
                              std::span<const std::filesystem::path> selection_files,
                              const std::optional<std::filesystem::path>& cds_csv,
                              const std::filesystem::path& out_dir);

// DSAEE selections plus chi-squared selections of matching size per level,
// both evaluated on the CDS. The chi-squared scores are computed on the FSDS
// mapped to [0, 1]. Writes benchmark_rows.csv, benchmark_summary.csv,
// benchmark.json, the selection files and manifest.json.
eval::EvalReport run_benchmark(const config::RunConfig& cfg,
                               const std::filesystem::path& out_dir);

}  // namespace dsaee::pipeline
