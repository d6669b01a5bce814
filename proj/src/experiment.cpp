#include "panelcp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "panelcp/feedback.hpp"
#include "panelcp/plots.hpp"
#include "panelcp/predictor.hpp"
#include "panelcp/rng.hpp"
#include "panelcp/synthgen.hpp"

namespace panelcp {

namespace {

namespace fs = std::filesystem;

// Seed derivation tags. Everything a replication draws descends from
// rep_seed = mix(config seed, mix(kRepTag, rep_index)).
enum : std::uint64_t {
  kRepTag = 0x526570,
  kSplitTag = 0x53504C,
  kFeedbackTag = 0x464242,
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct PreparedRep {
  const Panel* panel = nullptr;
  Panel owned;  // synthetic replications own their panel
  UnitSplit split;
  Predictor predictor;
  int t0 = 0;       // first conformal time index
  int t_conf = 0;   // conformal rounds
  int n_calib = 0;
  int n_test = 0;
  std::uint64_t rep_seed = 0;
  std::uint64_t feedback_seed = 0;
  // Predictor evaluations shared by every method and target.
  std::vector<double> calib_yhat;    // t_conf x n_calib
  std::vector<double> calib_scores;  // t_conf x n_calib
  std::vector<int> score_order;      // t_conf x n_calib
  std::vector<double> target_yhat;   // n_test x t_conf
  std::vector<double> uniforms;      // coupled mcar draws, one per round
  std::vector<double> difficulties;  // per-round mean test |residual|
};

ScenarioSpec scenario_for(const ExperimentConfig& cfg) {
  return ScenarioSpec::by_name(cfg.dataset);
}

PreparedRep prepare_replication(const ExperimentConfig& cfg, int rep_index,
                                const StructureTemplates* templates,
                                const Panel* csv_panel) {
  PreparedRep prep;
  prep.rep_seed = Rng::mix(cfg.seed, Rng::mix(kRepTag, static_cast<std::uint64_t>(rep_index)));
  prep.feedback_seed = Rng::mix(prep.rep_seed, kFeedbackTag);

  int x_dim = 0, f_dim = 0;
  if (cfg.is_synthetic()) {
    const ScenarioSpec spec = scenario_for(cfg);
    prep.owned = simulate_panel(*templates, spec, prep.rep_seed);
    prep.panel = &prep.owned;
    x_dim = spec.x_dim;
    f_dim = spec.factor_dim;
  } else {
    prep.panel = csv_panel;
    x_dim = prep.panel->feature_dim;
    f_dim = 0;
  }
  const Panel& panel = *prep.panel;
  prep.t0 = panel.burn_in_end;
  prep.t_conf = panel.conformal_rounds();

  // Split: the synthetic protocol fixes all majority units in calibration and
  // splits the minority evenly; CSV panels use plain uniform splits unless
  // stratification is forced on.
  const std::uint64_t split_seed = Rng::mix(prep.rep_seed, kSplitTag);
  if (cfg.is_synthetic()) {
    const ScenarioSpec spec = scenario_for(cfg);
    const int n_minority = spec.n_units - spec.n_majority();
    const int n_test = cfg.n_test >= 0 ? cfg.n_test : n_minority / 2;
    const int n_calib = cfg.n_calib >= 0 ? cfg.n_calib : spec.n_units - n_test;
    const bool stratified = cfg.stratified != "off";
    prep.split = random_unit_split(panel, n_calib, n_test, split_seed, stratified);
  } else {
    const bool stratified = cfg.stratified == "on";
    prep.split = random_unit_split(panel, cfg.n_calib, cfg.n_test, split_seed, stratified);
  }
  prep.n_calib = static_cast<int>(prep.split.calib_ids.size());
  prep.n_test = static_cast<int>(prep.split.test_ids.size());

  // Burn-in predictor, calibration units only, fixed afterwards.
  {
    const int d = panel.feature_dim;
    const std::size_t rows_n =
        static_cast<std::size_t>(prep.n_calib) * static_cast<std::size_t>(prep.t0);
    std::vector<double> rows(rows_n * static_cast<std::size_t>(d));
    std::vector<double> targets(rows_n);
    std::size_t r = 0;
    for (int id : prep.split.calib_ids) {
      for (int t = 0; t < prep.t0; ++t, ++r) {
        const auto x = panel.x(id, t);
        std::copy(x.begin(), x.end(), rows.begin() + r * static_cast<std::size_t>(d));
        targets[r] = panel.y(id, t);
      }
    }
    prep.predictor = fit_ridge(rows, targets, x_dim, f_dim, cfg.ridge_lambda,
                               cfg.is_synthetic() ? RidgeMode::synthetic_factor
                                                  : RidgeMode::realdata);
  }

  // Predictor evaluations over the conformal period.
  const auto tn = static_cast<std::size_t>(prep.t_conf) * prep.n_calib;
  prep.calib_yhat.resize(tn);
  prep.calib_scores.resize(tn);
  prep.score_order.resize(tn);
  for (int ri = 0; ri < prep.t_conf; ++ri) {
    const int t = prep.t0 + ri;
    const auto base = static_cast<std::size_t>(ri) * prep.n_calib;
    for (int j = 0; j < prep.n_calib; ++j) {
      const int id = prep.split.calib_ids[static_cast<std::size_t>(j)];
      const double yhat = prep.predictor.predict(panel.x(id, t));
      prep.calib_yhat[base + static_cast<std::size_t>(j)] = yhat;
      prep.calib_scores[base + static_cast<std::size_t>(j)] = std::abs(panel.y(id, t) - yhat);
    }
    int* order = prep.score_order.data() + base;
    for (int j = 0; j < prep.n_calib; ++j) order[j] = j;
    std::sort(order, order + prep.n_calib, [&](int a, int b) {
      return prep.calib_scores[base + static_cast<std::size_t>(a)] <
             prep.calib_scores[base + static_cast<std::size_t>(b)];
    });
  }
  prep.target_yhat.resize(static_cast<std::size_t>(prep.n_test) * prep.t_conf);
  for (int u = 0; u < prep.n_test; ++u) {
    const int id = prep.split.test_ids[static_cast<std::size_t>(u)];
    for (int ri = 0; ri < prep.t_conf; ++ri)
      prep.target_yhat[static_cast<std::size_t>(u) * prep.t_conf + ri] =
          prep.predictor.predict(panel.x(id, prep.t0 + ri));
  }

  prep.uniforms = mcar_uniforms(prep.t_conf, prep.feedback_seed);
  prep.difficulties.assign(static_cast<std::size_t>(prep.t_conf), 0.0);
  for (int ri = 0; ri < prep.t_conf; ++ri) {
    double acc = 0.0;
    for (int u = 0; u < prep.n_test; ++u) {
      const int id = prep.split.test_ids[static_cast<std::size_t>(u)];
      acc += std::abs(panel.y(id, prep.t0 + ri) -
                      prep.target_yhat[static_cast<std::size_t>(u) * prep.t_conf + ri]);
    }
    prep.difficulties[static_cast<std::size_t>(ri)] = acc / std::max(prep.n_test, 1);
  }
  return prep;
}

FeedbackSchedule schedule_for(const ExperimentConfig& cfg, const PreparedRep& prep,
                              double p_override) {
  if (cfg.feedback_mode == "full") return full_schedule(prep.t_conf);
  if (cfg.feedback_mode == "mcar") {
    const double p = std::isnan(p_override) ? cfg.p : p_override;
    return mcar_from_uniforms(p, prep.uniforms, prep.feedback_seed);
  }
  const RevealDirection dir = cfg.direction == "easy_visible"
                                  ? RevealDirection::easy_visible
                                  : RevealDirection::hard_visible;
  return informative_schedule(prep.difficulties, dir, prep.feedback_seed);
}

MethodRunResult run_method(const ExperimentConfig& cfg, const PreparedRep& prep,
                           const MethodConfig& mc, const FeedbackSchedule& schedule,
                           double axis_value) {
  const Panel& panel = *prep.panel;
  MethodRunResult out;
  out.kind = mc.kind;
  out.axis_value = axis_value;
  out.records.resize(static_cast<std::size_t>(prep.n_test));

  for (int u = 0; u < prep.n_test; ++u) {
    const int target = prep.split.test_ids[static_cast<std::size_t>(u)];
    MethodState state = make_method_state(mc, prep.n_calib, panel.feature_dim);
    auto& trace = out.records[static_cast<std::size_t>(u)];
    trace.reserve(static_cast<std::size_t>(prep.t_conf));

    for (int ri = 0; ri < prep.t_conf; ++ri) {
      const int t = prep.t0 + ri;
      const RoundBatch batch = stream_round(panel, prep.split, target, schedule, t);
      const auto base = static_cast<std::size_t>(ri) * prep.n_calib;
      RoundView view;
      view.calib_yhat = {prep.calib_yhat.data() + base, static_cast<std::size_t>(prep.n_calib)};
      view.calib_scores = {prep.calib_scores.data() + base,
                           static_cast<std::size_t>(prep.n_calib)};
      view.score_order = {prep.score_order.data() + base,
                          static_cast<std::size_t>(prep.n_calib)};
      view.target_yhat = prep.target_yhat[static_cast<std::size_t>(u) * prep.t_conf + ri];
      trace.push_back(method_step(state, batch, view));
    }
    // Absorb the last round's feedback so the adaptive level is final.
    if (state.last_record) {
      const bool reveal = schedule.revealed(prep.t_conf - 1);
      settle_feedback(state, *state.last_record,
                      reveal ? std::optional<double>(panel.y(target, prep.t0 + prep.t_conf - 1))
                             : std::nullopt);
    }
    for (int ri = 0; ri < prep.t_conf; ++ri)
      resolve_coverage(trace[static_cast<std::size_t>(ri)], panel.y(target, prep.t0 + ri));
  }

  const double hi = mc.kind == MethodKind::tqa_b ? mc.tqa_b_clamp_hi : mc.clamp_hi;
  out.report = coverage_stats(out.records, cfg.tail_frac, mc.clamp_lo, hi);
  return out;
}

std::vector<double> sweep_cells(const ExperimentConfig& cfg) {
  if (cfg.sweep_axis == "p") return cfg.p_grid;
  if (cfg.sweep_axis == "h") return cfg.h_grid;
  if (cfg.sweep_axis == "gamma") return cfg.gamma_grid;
  return {0.0};  // single unnamed cell
}

ReplicationResult run_replication_cells(const ExperimentConfig& cfg, int rep_index,
                                        const StructureTemplates* templates,
                                        const Panel* csv_panel) {
  const PreparedRep prep = prepare_replication(cfg, rep_index, templates, csv_panel);
  const auto cells = sweep_cells(cfg);
  const auto kinds = cfg.method_kinds();

  ReplicationResult rep;
  rep.rep_index = rep_index;
  for (double cell : cells) {
    FeedbackSchedule schedule =
        schedule_for(cfg, prep, cfg.sweep_axis == "p" ? cell : std::nan(""));
    for (MethodKind kind : kinds) {
      MethodConfig mc = cfg.method_config(kind);
      if (cfg.sweep_axis == "h") mc.h = cell;
      if (cfg.sweep_axis == "gamma") mc.gamma = cell;
      auto res = run_method(cfg, prep, mc, schedule, cell);
      if (!cfg.write_traces) res.records.clear();
      rep.methods.push_back(std::move(res));
    }
  }
  return rep;
}

ExperimentResult run_cells(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.sweep_axis == "p" && cfg.feedback_mode != "mcar")
    throw std::invalid_argument("sweep: p axis needs feedback mode mcar");

  StructureTemplates templates;
  Panel csv_panel;
  const StructureTemplates* templates_ptr = nullptr;
  const Panel* csv_ptr = nullptr;
  if (cfg.is_synthetic()) {
    templates = make_structure(cfg.structure_seed, scenario_for(cfg));
    templates_ptr = &templates;
  } else {
    csv_panel = load_panel_csv(cfg.panel_path);
    csv_panel.burn_in_end = cfg.burn_in;
    csv_panel.validate();
    csv_ptr = &csv_panel;
  }

  ExperimentResult result;
  result.config = cfg;
  result.axis_values = sweep_cells(cfg);
  result.reps.resize(static_cast<std::size_t>(cfg.replications));

  const int want = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  const int n_threads = std::max(1, std::min(want, cfg.replications));
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  const auto worker = [&]() {
    while (!failed.load()) {
      const int rep = next.fetch_add(1);
      if (rep >= cfg.replications) break;
      try {
        result.reps[static_cast<std::size_t>(rep)] =
            run_replication_cells(cfg, rep, templates_ptr, csv_ptr);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        error_message = e.what();
        failed.store(true);
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error("experiment failed: " + error_message);
  return result;
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& cfg, int rep_index) {
  cfg.validate();
  if (cfg.is_synthetic()) {
    const StructureTemplates templates = make_structure(cfg.structure_seed, scenario_for(cfg));
    return run_replication_cells(cfg, rep_index, &templates, nullptr);
  }
  Panel panel = load_panel_csv(cfg.panel_path);
  panel.burn_in_end = cfg.burn_in;
  panel.validate();
  return run_replication_cells(cfg, rep_index, nullptr, &panel);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.sweep_axis != "none")
    throw std::invalid_argument("run_experiment: config has a sweep axis; use run_sweep");
  return run_cells(cfg);
}

ExperimentResult run_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_axis == "none")
    throw std::invalid_argument("run_sweep: exactly one sweep axis must be active");
  return run_cells(cfg);
}

// ---------------------------------------------------------------------------
// outputs
// ---------------------------------------------------------------------------

namespace {

struct CellKey {
  double axis;
  MethodKind kind;
  bool operator<(const CellKey& o) const {
    if (axis != o.axis) return axis < o.axis;
    return static_cast<int>(kind) < static_cast<int>(o.kind);
  }
};

double metric_by_name(const MetricsReport& r, int idx) {
  switch (idx) {
    case 0: return r.avg_coverage;
    case 1: return r.tail_coverage;
    case 2: return r.avg_width;
    case 3: return r.width_cov;
    case 4: return r.lower_boundary_rate;
    case 5: return r.upper_boundary_rate;
    default: return r.sentinel_rate;
  }
}

const char* kMetricNames[] = {"avg_coverage",        "tail_coverage",
                              "avg_width",           "width_cov",
                              "lower_boundary_rate", "upper_boundary_rate",
                              "sentinel_rate"};

}  // namespace

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const std::string prefix = cfg.out_dir + "/" + cfg.file_prefix();
  const bool swept = cfg.sweep_axis != "none";

  cfg.save(prefix + "_resolved_config.ini");

  // Per-replication results table.
  {
    std::ofstream out(prefix + "_results.csv");
    out << "axis,method,rep";
    for (const char* m : kMetricNames) out << ',' << m;
    out << "\n";
    for (const auto& rep : result.reps) {
      for (const auto& run : rep.methods) {
        out << (swept ? fmt(run.axis_value) : "") << ',' << method_kind_name(run.kind)
            << ',' << rep.rep_index;
        for (int m = 0; m < 7; ++m) out << ',' << fmt(metric_by_name(run.report, m));
        out << "\n";
      }
    }
  }

  // Mean +- sample sd across replications per (cell, method).
  nlohmann::json summary;
  summary["dataset"] = cfg.dataset;
  summary["sweep_axis"] = cfg.sweep_axis;
  summary["replications"] = cfg.replications;
  summary["alpha"] = cfg.alpha;
  {
    std::map<CellKey, std::vector<const MetricsReport*>> cells;
    for (const auto& rep : result.reps)
      for (const auto& run : rep.methods)
        cells[{run.axis_value, run.kind}].push_back(&run.report);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, reports] : cells) {
      nlohmann::json row;
      if (swept) row["axis"] = key.axis;
      row["method"] = method_kind_name(key.kind);
      for (int m = 0; m < 7; ++m) {
        std::vector<double> vals;
        vals.reserve(reports.size());
        for (const auto* r : reports) vals.push_back(metric_by_name(*r, m));
        row[kMetricNames[m]] = {{"mean", mean(vals)}, {"sd", sample_sd(vals)}};
      }
      rows.push_back(row);
    }
    summary["cells"] = rows;
    std::ofstream out(prefix + "_summary.json");
    out << summary.dump(2) << "\n";
  }

  // Cumulative tail-coverage curves, averaged over replications (plain runs).
  if (!swept) {
    std::map<MethodKind, std::vector<double>> curves;
    std::map<MethodKind, int> counts;
    for (const auto& rep : result.reps) {
      for (const auto& run : rep.methods) {
        auto& acc = curves[run.kind];
        if (acc.empty()) acc.assign(run.report.cumulative_tail_curve.size(), 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i)
          acc[i] += run.report.cumulative_tail_curve[i];
        counts[run.kind] += 1;
      }
    }
    std::ofstream out(prefix + "_curves.csv");
    out << "round,method,cumulative_tail\n";
    std::vector<PlotSeries> series;
    for (auto& [kind, acc] : curves) {
      PlotSeries s;
      s.label = method_kind_name(kind);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const double v = acc[i] / counts[kind];
        out << (i + 1) << ',' << method_kind_name(kind) << ',' << fmt(v) << "\n";
        s.x.push_back(static_cast<double>(i + 1));
        s.y.push_back(v);
      }
      series.push_back(std::move(s));
    }
    if (cfg.write_figures)
      write_svg_lines(prefix + "_tail_curve.svg",
                      cfg.dataset + ": cumulative tail coverage", "round",
                      "tail coverage", series);
  } else if (cfg.write_figures) {
    // Tail coverage versus the sweep axis, one curve per method.
    std::map<MethodKind, std::map<double, std::pair<double, int>>> agg;
    for (const auto& rep : result.reps)
      for (const auto& run : rep.methods) {
        auto& cell = agg[run.kind][run.axis_value];
        cell.first += run.report.tail_coverage;
        cell.second += 1;
      }
    std::vector<PlotSeries> series;
    for (auto& [kind, by_axis] : agg) {
      PlotSeries s;
      s.label = method_kind_name(kind);
      for (auto& [axis, cell] : by_axis) {
        s.x.push_back(axis);
        s.y.push_back(cell.first / cell.second);
      }
      series.push_back(std::move(s));
    }
    write_svg_lines(prefix + "_tail_vs_" + cfg.sweep_axis + ".svg",
                    cfg.dataset + ": tail coverage vs " + cfg.sweep_axis,
                    cfg.sweep_axis, "tail coverage", series);
  }

  // Raw traces, one file per method.
  if (cfg.write_traces) {
    const auto kinds = cfg.method_kinds();
    for (MethodKind kind : kinds) {
      std::ofstream out(prefix + "_" + method_kind_name(kind) + "_trace.csv");
      out << "rep,axis,target,round,center,half_width,deployed_level,raw_alpha,"
             "provenance,covered,raw_covered\n";
      for (const auto& rep : result.reps) {
        for (const auto& run : rep.methods) {
          if (run.kind != kind) continue;
          for (std::size_t u = 0; u < run.records.size(); ++u) {
            for (std::size_t ri = 0; ri < run.records[u].size(); ++ri) {
              const auto& rec = run.records[u][ri];
              out << rep.rep_index << ',' << (swept ? fmt(run.axis_value) : "") << ','
                  << u << ',' << ri << ',' << fmt(rec.center) << ','
                  << fmt(rec.half_width) << ',' << fmt(rec.deployed_level) << ','
                  << fmt(rec.raw_alpha) << ',' << threshold_kind_name(rec.provenance)
                  << ',' << static_cast<int>(rec.covered) << ','
                  << static_cast<int>(rec.raw_covered) << "\n";
            }
          }
        }
      }
    }
  }
}

void run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.is_synthetic())
    throw std::invalid_argument("simulate: dataset must be a synthetic scenario");
  const ScenarioSpec spec = scenario_for(cfg);
  const StructureTemplates templates = make_structure(cfg.structure_seed, spec);
  fs::create_directories(cfg.out_dir);
  for (int rep = 0; rep < cfg.replications; ++rep) {
    const std::uint64_t rep_seed =
        Rng::mix(cfg.seed, Rng::mix(kRepTag, static_cast<std::uint64_t>(rep)));
    const Panel panel = simulate_panel(templates, spec, rep_seed);
    const std::string stem =
        cfg.out_dir + "/" + cfg.dataset + "_rep" + std::to_string(rep);
    write_panel_csv(panel, stem + "_panel.csv");
    nlohmann::json meta;
    meta["scenario"] = cfg.dataset;
    meta["structure_seed"] = cfg.structure_seed;
    meta["rep_seed"] = rep_seed;
    meta["n_units"] = panel.n_units;
    meta["horizon"] = panel.horizon;
    meta["feature_dim"] = panel.feature_dim;
    meta["x_dim"] = spec.x_dim;
    meta["factor_dim"] = spec.factor_dim;
    meta["burn_in_end"] = panel.burn_in_end;
    meta["cluster_labels"] = panel.unit_tags;
    std::ofstream out(stem + "_meta.json");
    out << meta.dump(2) << "\n";
  }
}

void run_report(const ExperimentConfig& cli_cfg) {
  // Locate the resolved config written by the original run.
  std::string config_path;
  for (const auto& entry : fs::directory_iterator(cli_cfg.out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 20 && name.substr(name.size() - 20) == "_resolved_config.ini") {
      if (!config_path.empty())
        throw std::runtime_error("report: multiple resolved configs in " + cli_cfg.out_dir);
      config_path = entry.path().string();
    }
  }
  if (config_path.empty())
    throw std::runtime_error("report: no resolved config found in " + cli_cfg.out_dir);
  ExperimentConfig cfg = ExperimentConfig::load(config_path);
  cfg.out_dir = cli_cfg.out_dir;
  if (!cfg.write_traces)
    throw std::runtime_error("report: the original run did not store traces");

  const std::string prefix = cfg.out_dir + "/" + cfg.file_prefix();
  ExperimentResult result;
  result.config = cfg;
  result.axis_values = sweep_cells(cfg);
  result.reps.resize(static_cast<std::size_t>(cfg.replications));
  for (int rep = 0; rep < cfg.replications; ++rep)
    result.reps[static_cast<std::size_t>(rep)].rep_index = rep;

  for (MethodKind kind : cfg.method_kinds()) {
    const std::string path = prefix + "_" + method_kind_name(kind) + "_trace.csv";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("report: missing trace " + path);
    std::string line;
    std::getline(in, line);  // header
    // (rep, axis) -> records[target][round]
    std::map<std::pair<int, double>, std::vector<std::vector<PredictionRecord>>> runs;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      if (fields.size() != 11) throw std::runtime_error("report: malformed trace row");
      const int rep = std::stoi(fields[0]);
      const double axis = fields[1].empty() ? std::nan("") : std::stod(fields[1]);
      const auto target = static_cast<std::size_t>(std::stoul(fields[2]));
      const auto round = static_cast<std::size_t>(std::stoul(fields[3]));
      auto& recs = runs[{rep, axis}];
      if (recs.size() <= target) recs.resize(target + 1);
      if (recs[target].size() <= round) recs[target].resize(round + 1);
      PredictionRecord rec;
      rec.center = std::stod(fields[4]);
      rec.half_width = std::stod(fields[5]);
      rec.deployed_level = std::stod(fields[6]);
      rec.raw_alpha = std::stod(fields[7]);
      rec.provenance = fields[8] == "sentinel_fallback" ? ThresholdKind::sentinel
                                                        : ThresholdKind::finite;
      rec.covered = static_cast<std::int8_t>(std::stoi(fields[9]));
      rec.raw_covered = static_cast<std::int8_t>(std::stoi(fields[10]));
      recs[target][round] = rec;
    }
    const MethodConfig mc = cfg.method_config(kind);
    const double hi = kind == MethodKind::tqa_b ? mc.tqa_b_clamp_hi : mc.clamp_hi;
    for (auto& [key, records] : runs) {
      MethodRunResult run;
      run.kind = kind;
      run.axis_value = key.second;
      run.report = coverage_stats(records, cfg.tail_frac, mc.clamp_lo, hi);
      run.records = std::move(records);
      result.reps[static_cast<std::size_t>(key.first)].methods.push_back(std::move(run));
    }
  }
  // Restore the original cell-major, config-method-order layout.
  const auto kinds = cfg.method_kinds();
  const auto order_of = [&](const MethodRunResult& run) {
    std::size_t cell = 0;
    for (std::size_t i = 0; i < result.axis_values.size(); ++i)
      if (result.axis_values[i] == run.axis_value) cell = i;
    std::size_t kind_idx = 0;
    for (std::size_t i = 0; i < kinds.size(); ++i)
      if (kinds[i] == run.kind) kind_idx = i;
    return cell * kinds.size() + kind_idx;
  };
  for (auto& rep : result.reps)
    std::sort(rep.methods.begin(), rep.methods.end(),
              [&](const MethodRunResult& a, const MethodRunResult& b) {
                return order_of(a) < order_of(b);
              });
  write_outputs(result, cfg);
}

}  // namespace panelcp
