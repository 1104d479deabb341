#pragma once

#include <filesystem>

#include "core/config.hpp"
#include "core/export.hpp"
#include "core/postproc.hpp"
#include "core/problems.hpp"

namespace fourtop::runner {

struct ExperimentResult {
  int exit_code = 0;  // 0 converged, 2 epoch budget exhausted
  opt::RunStatus status = opt::RunStatus::kMaxEpochs;
  int epochs = 0;
  double final_loss = 0.0;
  double final_compliance = 0.0;
  double final_fraction = 0.0;  // volume or mass fraction
  double final_gray = 0.0;
  post::FeatureSizeReport features;
  std::vector<opt::HistoryRow> history;
  std::filesystem::path dir;
  std::vector<std::string> warnings;
};

// Canonical `key = value` listing of the effective configuration, sufficient
// to reproduce the run.
std::string echo_config(const RunConfig& cfg, const prob::Problem& problem);

// Runs the configured solver end to end and writes the run artifacts
// (config.txt, history.csv, density.csv, topology.png, spectrum.csv,
// features.csv, plus the optional network checkpoint) into cfg.out_dir.
// A mid-run solver failure still writes config and history, then rethrows.
ExperimentResult run_experiment(const RunConfig& config);

}  // namespace fourtop::runner
