// fourtop command-line front end. Engine access goes through the C API only.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fourtop.h"

namespace fs = std::filesystem;

namespace {

struct ConfigArgs {
  std::string config_file;
  std::vector<std::string> sets;  // key=value
};

struct OwnedConfig {
  ftop_config* cfg = nullptr;
  ~OwnedConfig() { ftop_config_destroy(cfg); }
};

struct OwnedResult {
  ftop_result* res = nullptr;
  ~OwnedResult() { ftop_result_destroy(res); }
};

[[noreturn]] void die(const std::string& context) {
  std::cerr << "fourtop: " << context << ": " << ftop_last_error() << "\n";
  std::exit(1);
}

void split_kv(const std::string& kv, std::string& key, std::string& value) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) {
    std::cerr << "fourtop: expected key=value, got '" << kv << "'\n";
    std::exit(1);
  }
  key = kv.substr(0, eq);
  value = kv.substr(eq + 1);
}

OwnedConfig build_config(const ConfigArgs& args,
                         const std::vector<std::pair<std::string, std::string>>&
                             extra = {}) {
  OwnedConfig owned;
  if (ftop_config_create(&owned.cfg) != FTOP_OK) die("config_create");
  if (!args.config_file.empty() &&
      ftop_config_load_file(owned.cfg, args.config_file.c_str()) != FTOP_OK)
    die("loading " + args.config_file);
  for (const auto& kv : args.sets) {
    std::string key, value;
    split_kv(kv, key, value);
    if (ftop_config_set(owned.cfg, key.c_str(), value.c_str()) != FTOP_OK)
      die("--set " + kv);
  }
  for (const auto& [key, value] : extra)
    if (ftop_config_set(owned.cfg, key.c_str(), value.c_str()) != FTOP_OK)
      die("setting " + key);
  return owned;
}

std::string config_value(const ftop_config* cfg, const std::string& key) {
  char buf[4096];
  if (ftop_config_get(cfg, key.c_str(), buf, sizeof(buf)) != FTOP_OK)
    die("reading key " + key);
  return buf;
}

void print_summary(const ftop_result* res) {
  double compliance = 0, fraction = 0, gray = 0;
  int epochs = 0;
  ftop_result_scalars(res, &compliance, &fraction, &gray, &epochs);
  double tmin = 0, tmed = 0, tmax = 0;
  ftop_result_feature_sizes(res, &tmin, &tmed, &tmax);
  char dir[4096] = {0};
  ftop_result_out_dir(res, dir, sizeof(dir));
  std::printf(
      "%s  epochs=%d compliance=%.6g fraction=%.4f gray=%.5f "
      "thickness[min/med/max]=%.3g/%.3g/%.3g -> %s\n",
      ftop_result_exit_code(res) == 0 ? "converged" : "epoch-budget",
      epochs, compliance, fraction, gray, tmin, tmed, tmax, dir);
}

int cmd_run(const ConfigArgs& args) {
  OwnedConfig cfg = build_config(args);
  OwnedResult result;
  if (ftop_run(cfg.cfg, &result.res) != FTOP_OK) die("run");
  print_summary(result.res);
  return ftop_result_exit_code(result.res);
}

int cmd_sweep(const ConfigArgs& args, const std::string& axis) {
  std::string axis_key, axis_values;
  split_kv(axis, axis_key, axis_values);
  std::vector<std::string> values;
  std::stringstream ss(axis_values);
  std::string v;
  while (std::getline(ss, v, ',')) values.push_back(v);
  if (values.empty()) {
    std::cerr << "fourtop: --axis needs key=v1,v2,...\n";
    return 1;
  }

  std::string base_dir;
  {
    OwnedConfig probe = build_config(args);
    base_dir = config_value(probe.cfg, "out_dir");
  }

  std::ofstream summary;
  const fs::path summary_path = fs::path(base_dir) / "summary.csv";
  fs::create_directories(base_dir);
  summary.open(summary_path);
  summary << "key,value,exit,epochs,compliance,vol_or_mass_fraction,"
             "gray_fraction,median_thickness\n";

  int worst = 0;
  for (const std::string& value : values) {
    const std::string cell_dir =
        (fs::path(base_dir) / (axis_key + "=" + value)).string();
    OwnedConfig cfg = build_config(
        args, {{axis_key, value}, {"out_dir", cell_dir}});
    OwnedResult result;
    if (ftop_run(cfg.cfg, &result.res) != FTOP_OK) die("sweep cell " + value);
    print_summary(result.res);

    double compliance = 0, fraction = 0, gray = 0, tmed = 0, tmin = 0, tmax = 0;
    int epochs = 0;
    ftop_result_scalars(result.res, &compliance, &fraction, &gray, &epochs);
    ftop_result_feature_sizes(result.res, &tmin, &tmed, &tmax);
    summary << axis_key << ',' << value << ','
            << ftop_result_exit_code(result.res) << ',' << epochs << ','
            << compliance << ',' << fraction << ',' << gray << ',' << tmed
            << '\n';
    worst = std::max(worst, ftop_result_exit_code(result.res));
  }
  std::printf("summary -> %s\n", summary_path.string().c_str());
  return worst == 0 ? 0 : 2;
}

// Minimal CSV readers for the report subcommand (aggregates run artifacts).
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream is(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool report_run_dir(const fs::path& dir, bool header) {
  const fs::path hist = dir / "history.csv";
  if (!fs::exists(hist)) return false;
  const auto rows = read_csv(hist);
  if (rows.size() < 2) return false;
  const auto& last = rows.back();
  std::string tmed = "-";
  if (fs::exists(dir / "features.csv")) {
    const auto feats = read_csv(dir / "features.csv");
    if (feats.size() >= 2 && feats[1].size() >= 2) tmed = feats[1][1];
  }
  if (header)
    std::printf("%-40s %7s %12s %9s %9s %10s\n", "run", "epochs", "compliance",
                "fraction", "gray", "med.thick");
  std::printf("%-40s %7s %12s %9s %9s %10s\n", dir.string().c_str(),
              last[0].c_str(), last[2].c_str(), last[3].c_str(),
              last[4].c_str(), tmed.c_str());
  return true;
}

int cmd_report(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  if (!fs::exists(dir)) {
    std::cerr << "fourtop: no such directory: " << dir_arg << "\n";
    return 1;
  }
  if (report_run_dir(dir, true)) return 0;
  // sweep directory: aggregate its cells
  bool header = true, any = false;
  std::vector<fs::path> cells;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) cells.push_back(entry.path());
  std::sort(cells.begin(), cells.end());
  for (const auto& cell : cells) {
    if (report_run_dir(cell, header)) {
      header = false;
      any = true;
    }
  }
  if (!any) {
    std::cerr << "fourtop: no run artifacts under " << dir_arg << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fourtop — neural topology optimization with Fourier "
               "length-scale control"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ftop_version()));

  ConfigArgs args;

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", args.config_file, "config file (key = value)");
  run->add_option("--set", args.sets, "override: key=value (repeatable)");

  std::string axis;
  auto* sweep = app.add_subcommand(
      "sweep", "run one experiment per value of a swept key");
  sweep->add_option("--config", args.config_file, "config file");
  sweep->add_option("--set", args.sets, "override: key=value (repeatable)");
  sweep->add_option("--axis", axis, "swept key: key=v1,v2,...")->required();

  std::string report_dir;
  auto* report =
      app.add_subcommand("report", "summarize a run or sweep directory");
  report->add_option("dir", report_dir, "run or sweep directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(args);
  if (sweep->parsed()) return cmd_sweep(args, axis);
  if (report->parsed()) return cmd_report(report_dir);
  return 1;
}
