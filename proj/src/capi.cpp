#include "panelcp/panelcp.h"

#include <cstring>
#include <iostream>
#include <stdexcept>
#include <string>

#include "panelcp/config.hpp"
#include "panelcp/experiment.hpp"
#include "panelcp/selftest.hpp"

namespace {

thread_local std::string g_last_error;

pcp_status fail(pcp_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <typename Fn>
pcp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PCP_OK;
  } catch (const std::invalid_argument& e) {
    return fail(PCP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(PCP_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(PCP_ERR_RUNTIME, e.what());
  }
}

}  // namespace

struct pcp_config {
  panelcp::ExperimentConfig cfg;
};

extern "C" {

const char* pcp_version(void) { return "0.1.0"; }

const char* pcp_last_error(void) { return g_last_error.c_str(); }

pcp_config* pcp_config_create(void) { return new pcp_config(); }

pcp_config* pcp_config_load(const char* path) {
  try {
    auto* handle = new pcp_config();
    handle->cfg = panelcp::ExperimentConfig::load(path);
    g_last_error.clear();
    return handle;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

pcp_status pcp_config_set(pcp_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail(PCP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { cfg->cfg.set(key, value); });
}

char* pcp_config_print(const pcp_config* cfg) {
  if (!cfg) return nullptr;
  const std::string text = cfg->cfg.to_string();
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

pcp_status pcp_config_validate(const pcp_config* cfg) {
  if (!cfg) return fail(PCP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { cfg->cfg.validate(); });
}

void pcp_config_free(pcp_config* cfg) { delete cfg; }

void pcp_free_string(char* s) { delete[] s; }

pcp_status pcp_run_simulate(const pcp_config* cfg) {
  if (!cfg) return fail(PCP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { panelcp::run_simulate(cfg->cfg); });
}

pcp_status pcp_run_experiment(const pcp_config* cfg) {
  if (!cfg) return fail(PCP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    const auto result = panelcp::run_experiment(cfg->cfg);
    panelcp::write_outputs(result, cfg->cfg);
  });
}

pcp_status pcp_run_sweep(const pcp_config* cfg) {
  if (!cfg) return fail(PCP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] {
    const auto result = panelcp::run_sweep(cfg->cfg);
    panelcp::write_outputs(result, cfg->cfg);
  });
}

pcp_status pcp_run_report(const pcp_config* cfg) {
  if (!cfg) return fail(PCP_ERR_INVALID_ARGUMENT, "null config");
  return guarded([&] { panelcp::run_report(cfg->cfg); });
}

pcp_status pcp_selftest(int verbose) {
  bool ok = false;
  const pcp_status status = guarded([&] { ok = panelcp::selftest(std::cout, verbose != 0); });
  if (status != PCP_OK) return status;
  if (!ok) return fail(PCP_ERR_SELFTEST_FAILED, "selftest failed");
  return PCP_OK;
}

}  // extern "C"
