/* panelcp C API: opaque handles plus integer status codes.
 *
 * Every function that can fail returns a pcp_status; PCP_OK is zero and
 * pcp_last_error() describes the most recent failure on the calling thread.
 * Strings returned by pcp_* functions with a char* result are owned by the
 * caller and released with pcp_free_string().
 */
#ifndef PANELCP_H
#define PANELCP_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcp_status {
  PCP_OK = 0,
  PCP_ERR_INVALID_ARGUMENT = 1,
  PCP_ERR_IO = 2,
  PCP_ERR_RUNTIME = 3,
  PCP_ERR_SELFTEST_FAILED = 4
} pcp_status;

typedef struct pcp_config pcp_config;

const char* pcp_version(void);

/* Message for the last failure on this thread; empty string when none. */
const char* pcp_last_error(void);

/* Configuration handles. */
pcp_config* pcp_config_create(void);
pcp_config* pcp_config_load(const char* path);
pcp_status pcp_config_set(pcp_config* cfg, const char* key, const char* value);
char* pcp_config_print(const pcp_config* cfg);
pcp_status pcp_config_validate(const pcp_config* cfg);
void pcp_config_free(pcp_config* cfg);
void pcp_free_string(char* s);

/* Commands; outputs land in the config's out_dir. */
pcp_status pcp_run_simulate(const pcp_config* cfg);
pcp_status pcp_run_experiment(const pcp_config* cfg);
pcp_status pcp_run_sweep(const pcp_config* cfg);
pcp_status pcp_run_report(const pcp_config* cfg);

/* Invariant suite; prints one line per check to stdout. */
pcp_status pcp_selftest(int verbose);

#ifdef __cplusplus
}
#endif

#endif /* PANELCP_H */
