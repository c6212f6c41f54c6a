/* C interface to the ant-routing WSN simulator.
 *
 * Every object is an opaque handle created and destroyed through this API.
 * Functions return an antwsn_status; on failure antwsn_last_error() holds a
 * message for the calling thread until its next failing call.
 */
#ifndef ANTWSN_ANTWSN_H
#define ANTWSN_ANTWSN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ANTWSN_BUILDING_LIBRARY)
#    define ANTWSN_API __declspec(dllexport)
#  else
#    define ANTWSN_API __declspec(dllimport)
#  endif
#else
#  define ANTWSN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum antwsn_status {
  ANTWSN_OK = 0,
  ANTWSN_ERR_CONFIG = 1,     /* bad key, value or plan */
  ANTWSN_ERR_SIMULATION = 2, /* the run itself failed, e.g. no connected layout */
  ANTWSN_ERR_IO = 3,         /* a file could not be read or written */
  ANTWSN_ERR_ARGUMENT = 4    /* null handle, bad index, buffer misuse */
} antwsn_status;

typedef struct antwsn_config antwsn_config;
typedef struct antwsn_run antwsn_run;
typedef struct antwsn_plan antwsn_plan;
typedef struct antwsn_results antwsn_results;

typedef struct antwsn_metrics {
  uint64_t generated;
  uint64_t delivered;
  int has_latency; /* 0 when nothing was delivered */
  double latency_s;
  double success_rate_pct;
  double energy_J;
  double efficiency_kbit_per_J;
  uint32_t alive_nodes;
  double conservation_error;
} antwsn_metrics;

ANTWSN_API const char* antwsn_version(void);
ANTWSN_API const char* antwsn_last_error(void);

/* Scenario configuration: defaults, then file and key overrides. Loading a
 * file layers its keys over the current values. */
ANTWSN_API antwsn_status antwsn_config_create(antwsn_config** out);
ANTWSN_API antwsn_status antwsn_config_load_file(antwsn_config* cfg, const char* path);
ANTWSN_API antwsn_status antwsn_config_set(antwsn_config* cfg, const char* key, const char* value);
/* Copies the NUL-terminated value into buf when it fits; *needed (optional)
 * receives the size including the terminator. */
ANTWSN_API antwsn_status antwsn_config_get(const antwsn_config* cfg, const char* key, char* buf, size_t cap,
                                           size_t* needed);
ANTWSN_API antwsn_status antwsn_config_dump(const antwsn_config* cfg, char* buf, size_t cap, size_t* needed);
ANTWSN_API void antwsn_config_destroy(antwsn_config* cfg);

/* A single simulation run. The config is copied at creation. */
ANTWSN_API antwsn_status antwsn_run_create(const antwsn_config* cfg, antwsn_run** out);
/* Advances to `t` seconds (clamped to the configured duration). */
ANTWSN_API antwsn_status antwsn_run_advance(antwsn_run* run, double t);
/* Runs to the configured duration. */
ANTWSN_API antwsn_status antwsn_run_execute(antwsn_run* run);
ANTWSN_API antwsn_status antwsn_run_metrics(const antwsn_run* run, antwsn_metrics* out);
ANTWSN_API uint32_t antwsn_run_node_count(const antwsn_run* run);
ANTWSN_API uint32_t antwsn_run_sink(const antwsn_run* run);
/* Routing table of `node` as CSV (neighbors as rows, destinations as columns). */
ANTWSN_API antwsn_status antwsn_run_dump_table(const antwsn_run* run, uint32_t node, char* buf, size_t cap,
                                               size_t* needed);
/* Single-row result table for a finished run (replicate 0). */
ANTWSN_API antwsn_status antwsn_run_results(const antwsn_run* run, antwsn_results** out);
ANTWSN_API void antwsn_run_destroy(antwsn_run* run);

/* Experiment plans: protocol x node count x scenario x replicate sweeps. */
ANTWSN_API antwsn_status antwsn_plan_create(antwsn_plan** out);
ANTWSN_API antwsn_status antwsn_plan_load_file(antwsn_plan* plan, const char* path);
ANTWSN_API antwsn_status antwsn_plan_set(antwsn_plan* plan, const char* key, const char* value);
ANTWSN_API antwsn_status antwsn_plan_execute(const antwsn_plan* plan, antwsn_results** out);
ANTWSN_API void antwsn_plan_destroy(antwsn_plan* plan);

/* format is "csv" or "json". */
ANTWSN_API antwsn_status antwsn_results_export(const antwsn_results* results, const char* format, const char* path);
ANTWSN_API antwsn_status antwsn_results_write_summary(const antwsn_results* results, const char* path);
ANTWSN_API antwsn_status antwsn_results_emit_plotdata(const antwsn_results* results, const char* dir,
                                                      size_t* files_written);
ANTWSN_API size_t antwsn_results_row_count(const antwsn_results* results);
ANTWSN_API size_t antwsn_results_failure_count(const antwsn_results* results);
/* Message of the index-th failed run. */
ANTWSN_API antwsn_status antwsn_results_failure(const antwsn_results* results, size_t index, char* buf, size_t cap,
                                                size_t* needed);
ANTWSN_API void antwsn_results_destroy(antwsn_results* results);

#ifdef __cplusplus
}
#endif

#endif /* ANTWSN_ANTWSN_H */
