#pragma once

#include <string>
#include <vector>

#include "panelcp/config.hpp"
#include "panelcp/metrics.hpp"
#include "panelcp/methods.hpp"

namespace panelcp {

struct MethodRunResult {
  MethodKind kind = MethodKind::wtqa;
  double axis_value = 0.0;  // sweep cell (ignored when the axis is "none")
  MetricsReport report;
  // [target][round]; cleared after metrics when trace output is off.
  std::vector<std::vector<PredictionRecord>> records;
};

struct ReplicationResult {
  int rep_index = 0;
  std::vector<MethodRunResult> methods;  // cell-major, then config method order
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<double> axis_values;  // one entry per sweep cell
  std::vector<ReplicationResult> reps;
};

// One replication end to end: simulate/load, split, fit the burn-in
// predictor, run every method over the conformal period with per-target
// states, resolve coverage offline, and aggregate metrics. Deterministic
// given (config, rep_index), independent of any other replication.
ReplicationResult run_replication(const ExperimentConfig& cfg, int rep_index);

// All replications of a plain (no-sweep) experiment, fanned across threads.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// One-axis sweep (p, h, or gamma) across the config grid; feedback draws are
// shared across p cells so schedules are monotone-coupled.
ExperimentResult run_sweep(const ExperimentConfig& cfg);

// Writes results CSV, curves CSV, summary JSON, per-method trace CSVs, the
// resolved config, and SVG figures into cfg.out_dir.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

// Generates and exports synthetic panels (CSV + sidecar metadata JSON).
void run_simulate(const ExperimentConfig& cfg);

// Rebuilds metrics, summary, and figures from stored traces in cfg.out_dir.
void run_report(const ExperimentConfig& cfg);

}  // namespace panelcp
