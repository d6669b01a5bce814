#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panelcp/methods.hpp"

namespace panelcp {

// Experiment configuration. Serialized as a plain-text key/section format
// ("[section]" headers, "key = value" lines, '#' comments); parse and print
// round-trip losslessly. Keys are addressed as "section.key" by set().
struct ExperimentConfig {
  // [general]
  std::string dataset = "easy";  // easy | medium | hard | csv
  std::string panel_path;        // csv datasets
  std::string out_dir = "out";
  int threads = 0;  // 0 = hardware concurrency
  int replications = 30;
  std::uint64_t seed = 20240;           // base replication seed
  std::uint64_t structure_seed = 7;     // synthetic structure templates
  double tail_frac = 0.1;

  // [split]
  int n_calib = -1;  // -1 = scenario default
  int n_test = -1;
  std::string stratified = "auto";  // auto | on | off
  int burn_in = -1;  // csv panels; synthetic scenarios carry their own

  // [methods]
  std::vector<std::string> methods = {"wtqa", "w_only", "tqa_only",
                                      "split_cp", "tqa_b", "lpci_lite"};
  double alpha = 0.10;
  double h = 0.6;
  double gamma = 0.01;
  double ridge_lambda = 10.0;
  double tqa_b_decay = 0.8;
  double tqa_b_budget = -1.0;  // < 0 printed as "auto" (alpha / 2)
  int lpci_refit_every = 10;
  int lpci_window = 30;
  int lpci_lags = 6;
  double lpci_ewm_alpha = 0.2;
  double lpci_beta = -1.0;  // < 0 printed as "auto" (alpha / 2)

  // [feedback]
  std::string feedback_mode = "full";  // full | mcar | informative
  double p = 1.0;
  std::string direction = "hard_visible";  // informative mechanism

  // [sweep]
  std::string sweep_axis = "none";  // none | p | h | gamma
  std::vector<double> p_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> h_grid = {0.30, 0.45, 0.60, 0.90, 1.20};
  std::vector<double> gamma_grid = {0.005, 0.010, 0.020, 0.040, 0.080};

  // [output]
  bool write_traces = true;
  bool write_figures = true;

  void set(const std::string& key, const std::string& value);
  std::string to_string() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;

  // Throws on contradictions (unknown dataset, empty methods, bad grids...).
  void validate() const;

  bool is_synthetic() const { return dataset != "csv"; }
  std::vector<MethodKind> method_kinds() const;
  MethodConfig method_config(MethodKind kind) const;
  std::string file_prefix() const;  // "{dataset}_{sweepaxis}"
};

}  // namespace panelcp
