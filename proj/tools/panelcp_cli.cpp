// Command-line front end; talks to the core through the shared C API only.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panelcp/panelcp.h"

namespace {

struct ConfigDeleter {
  void operator()(pcp_config* cfg) const { pcp_config_free(cfg); }
};
using ConfigHandle = std::unique_ptr<pcp_config, ConfigDeleter>;

struct CommonOpts {
  std::string config_path;
  std::string scenario;
  std::string panel;
  std::string methods;
  std::string p;
  std::string h;
  std::string gamma;
  int reps = -1;
  long long seed = -1;
  std::string out;
  int threads = -1;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->set_help_flag("--help", "print help");  // frees -h for the bandwidth option
  cmd->add_option("--config", opts.config_path, "configuration file");
  cmd->add_option("--scenario", opts.scenario, "synthetic scenario: easy, medium, hard");
  cmd->add_option("--panel", opts.panel, "panel CSV path (sets dataset = csv)");
  cmd->add_option("--methods", opts.methods, "comma-separated method list");
  cmd->add_option("--p", opts.p, "feedback probability, or grid for sweeps");
  cmd->add_option("--h", opts.h, "kernel bandwidth, or grid for sweeps");
  cmd->add_option("--gamma", opts.gamma, "temporal stepsize, or grid for sweeps");
  cmd->add_option("--reps", opts.reps, "replications");
  cmd->add_option("--seed", opts.seed, "base replication seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
  cmd->add_flag("--print-config", opts.print_config, "dump the resolved configuration and exit");
}

int die(const char* stage) {
  std::fprintf(stderr, "error (%s): %s\n", stage, pcp_last_error());
  return 1;
}

bool is_grid(const std::string& v) { return v.find(',') != std::string::npos; }

// Returns nullptr after printing an error.
ConfigHandle build_config(const CommonOpts& opts, const std::string& subcommand) {
  ConfigHandle cfg(opts.config_path.empty() ? pcp_config_create()
                                            : pcp_config_load(opts.config_path.c_str()));
  if (!cfg) {
    die("config");
    return nullptr;
  }
  const auto set = [&](const char* key, const std::string& value) {
    if (pcp_config_set(cfg.get(), key, value.c_str()) != PCP_OK) {
      std::fprintf(stderr, "error (config): %s\n", pcp_last_error());
      return false;
    }
    return true;
  };

  const int grids = (is_grid(opts.p) ? 1 : 0) + (is_grid(opts.h) ? 1 : 0) +
                    (is_grid(opts.gamma) ? 1 : 0);
  if (grids > 1) {
    std::fprintf(stderr, "error (config): exactly one sweep axis may carry a grid\n");
    return nullptr;
  }
  if (grids > 0 && subcommand == "run") {
    std::fprintf(stderr, "error (config): grid values need the sweep subcommand\n");
    return nullptr;
  }

  bool ok = true;
  if (!opts.scenario.empty()) ok = ok && set("general.dataset", opts.scenario);
  if (!opts.panel.empty()) {
    ok = ok && set("general.dataset", "csv") && set("general.panel_path", opts.panel);
  }
  if (!opts.methods.empty()) ok = ok && set("methods.list", opts.methods);
  if (!opts.p.empty()) {
    if (is_grid(opts.p))
      ok = ok && set("sweep.axis", "p") && set("sweep.p_grid", opts.p) &&
           set("feedback.mode", "mcar");
    else
      ok = ok && set("feedback.p", opts.p);
  }
  if (!opts.h.empty()) {
    if (is_grid(opts.h))
      ok = ok && set("sweep.axis", "h") && set("sweep.h_grid", opts.h);
    else
      ok = ok && set("methods.h", opts.h);
  }
  if (!opts.gamma.empty()) {
    if (is_grid(opts.gamma))
      ok = ok && set("sweep.axis", "gamma") && set("sweep.gamma_grid", opts.gamma);
    else
      ok = ok && set("methods.gamma", opts.gamma);
  }
  if (opts.reps >= 0) ok = ok && set("general.replications", std::to_string(opts.reps));
  if (opts.seed >= 0) ok = ok && set("general.seed", std::to_string(opts.seed));
  if (!opts.out.empty()) ok = ok && set("general.out_dir", opts.out);
  if (opts.threads >= 0) ok = ok && set("general.threads", std::to_string(opts.threads));
  if (subcommand == "run" && pcp_config_set(cfg.get(), "sweep.axis", "none") != PCP_OK)
    ok = false;
  if (!ok) return nullptr;

  if (opts.print_config) {
    char* text = pcp_config_print(cfg.get());
    std::printf("%s", text);
    pcp_free_string(text);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panelcp: online conformal prediction for non-exchangeable panels"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto* simulate = app.add_subcommand("simulate", "generate and export synthetic panels");
  auto* run = app.add_subcommand("run", "run one experiment");
  auto* sweep = app.add_subcommand("sweep", "run a one-axis parameter sweep");
  auto* report = app.add_subcommand("report", "recompute metrics and figures from stored traces");
  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");
  for (auto* cmd : {simulate, run, sweep, report}) add_common(cmd, opts);
  bool verbose = false;
  selftest->add_flag("-v,--verbose", verbose, "verbose output");

  CLI11_PARSE(app, argc, argv);

  if (selftest->parsed())
    return pcp_selftest(verbose ? 1 : 0) == PCP_OK ? 0 : die("selftest");

  const std::string name = app.get_subcommands().front()->get_name();
  const ConfigHandle cfg = build_config(opts, name);
  if (!cfg) return 1;
  if (opts.print_config) return 0;

  if (pcp_config_validate(cfg.get()) != PCP_OK) return die("config");

  pcp_status status = PCP_OK;
  if (name == "simulate") status = pcp_run_simulate(cfg.get());
  else if (name == "run") status = pcp_run_experiment(cfg.get());
  else if (name == "sweep") status = pcp_run_sweep(cfg.get());
  else if (name == "report") status = pcp_run_report(cfg.get());
  if (status != PCP_OK) return die(name.c_str());
  return 0;
}
