/* C interface to the swarmgoal library. All functions return an sg_status;
 * on failure sg_last_error() describes the problem (thread-local). Strings
 * handed out through char** parameters are owned by the caller and released
 * with sg_string_free. */
#ifndef SWARMGOAL_H
#define SWARMGOAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#else
#define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_RUNTIME = 2,
  SG_ERR_IO = 3,
  SG_ERR_NO_OPTIMUM = 4,
  SG_ERR_SOLVER = 5,
  SG_ERR_DIVERGENCE = 6
} sg_status;

typedef struct sg_config sg_config;
typedef struct sg_sweep sg_sweep;

SG_API const char* sg_last_error(void);
SG_API const char* sg_version(void);
SG_API void sg_string_free(char* s);

/* --- configuration ------------------------------------------------------ */

SG_API sg_status sg_config_new_preset(const char* name, sg_config** out);
SG_API sg_status sg_config_load(const char* path, sg_config** out);
SG_API sg_status sg_config_parse(const char* json_text, sg_config** out);
SG_API sg_status sg_config_clone(const sg_config* cfg, sg_config** out);
SG_API void sg_config_free(sg_config* cfg);
/* Sets one field from text ("n", "sigma", "boundary", "controller", ...). */
SG_API sg_status sg_config_set(sg_config* cfg, const char* key, const char* value);
SG_API sg_status sg_config_get(const sg_config* cfg, const char* key, double* out);
SG_API sg_status sg_config_validate(const sg_config* cfg);
SG_API sg_status sg_config_to_json(const sg_config* cfg, char** out);
/* Comma-separated list of the shipped preset names. */
SG_API const char* sg_preset_names(void);

/* --- single trials ------------------------------------------------------ */

typedef struct sg_trial_metrics {
  int64_t total_goals;
  int64_t window_goals;
  double window_duration;
  double G;
  double blocked_fraction;
  int64_t collision_count;
  double wall_clock_seconds;
  double simulated_seconds;
  double max_goal_latency;
  int64_t plan_violations; /* planner with validation only, else -1 */
} sg_trial_metrics;

/* Runs one trial with the config's own seed. */
SG_API sg_status sg_run_trial(const sg_config* cfg, int validate_plans,
                              sg_trial_metrics* out);

/* Same trial as one CSV record (sweep header). With record_timing == 0 the
 * wall-clock columns are 0. */
SG_API sg_status sg_simulate_csv(const sg_config* cfg, int record_timing,
                                 char** csv_out);

/* Local controllers: `count` SVG snapshots evenly spaced over the trial,
 * written to <prefix>_<k>.svg. */
SG_API sg_status sg_write_svg_snapshots(const sg_config* cfg, int count,
                                        const char* prefix);

/* --- sweeps ------------------------------------------------------------- */

SG_API sg_status sg_sweep_new(const sg_config* base, sg_sweep** out);
SG_API void sg_sweep_free(sg_sweep* sweep);
/* "name=v1,v2" or "name=lo:hi:step". */
SG_API sg_status sg_sweep_add_axis(sg_sweep* sweep, const char* axis);
/* 0 restores the per-point default (50 or 20). */
SG_API sg_status sg_sweep_set_trials(sg_sweep* sweep, int trials);
SG_API sg_status sg_sweep_set_workers(sg_sweep* sweep, int workers);
SG_API sg_status sg_sweep_set_timing(sg_sweep* sweep, int record_timing);
SG_API sg_status sg_sweep_run(sg_sweep* sweep, char** csv_out);

/* --- theory ------------------------------------------------------------- */

typedef struct sg_theory_params {
  double n;
  double sigma;
  double L;
  double r;
  double gamma;
  double b;
  double v;
} sg_theory_params;

SG_API sg_status sg_theory_params_from_config(const sg_config* cfg,
                                              sg_theory_params* out);
/* Evaluates a named quantity (see the theory module). *defined is 0 when the
 * quantity has no finite value (sigma_star beyond the threshold). */
SG_API sg_status sg_theory_eval(const char* quantity, const sg_theory_params* p,
                                double x, double* out, int* defined);

/* --- optimizer ---------------------------------------------------------- */

typedef struct sg_optimum {
  int n_opt;
  double sigma_opt;
  double G_opt;
} sg_optimum;

/* Scan table CSV: "n,sigma_star,G". */
SG_API sg_status sg_optimize(const sg_theory_params* p, int n_lo, int n_hi,
                             int corrected, sg_optimum* out, char** csv_out);

/* --- planner ------------------------------------------------------------ */

typedef struct sg_plan_spec {
  int cells;      /* per side */
  double L;
  int periodic;
  double r;
  double gamma;
  double v;
  int n;
  uint64_t seed;
  int ticks;      /* 0: one planning cycle; otherwise lifelong half-unit ticks */
  int horizon;    /* A* horizon in ticks */
} sg_plan_spec;

typedef struct sg_plan_result {
  int64_t violations;
  int64_t goals;
  int64_t plan_failures;
  int64_t max_goal_latency_ticks;
} sg_plan_result;

SG_API void sg_plan_spec_default(sg_plan_spec* spec);
/* Path dump text (see write_paths) and per-agent CSV
 * "agent,start_x,start_y,end_x,end_y,steps,end_tick,goals". */
SG_API sg_status sg_plan_run(const sg_plan_spec* spec, sg_plan_result* out,
                             char** dump_out, char** csv_out);
/* Validates a path dump; *violations receives the count and report_out a
 * CSV "kind,tick,agent,other,x,y". */
SG_API sg_status sg_plan_validate(const char* dump_text, const sg_plan_spec* grid,
                                  int64_t* violations, char** report_out);

/* --- controller comparison ---------------------------------------------- */

typedef struct sg_compare_spec {
  const sg_config* constant_base;    /* NULL: fig2, constant noise */
  const sg_config* conditional_base; /* NULL: fig4-local */
  const sg_config* planner_base;     /* NULL: fig4-planner */
  const int* n_values;
  size_t n_count;
  const double* sigmas;
  size_t sigma_count;
  int trials;
  int workers;
  int record_timing;
  int validate_plans;
} sg_compare_spec;

/* records_out: per-point sweep CSV; summary_out: comparison table CSV. */
SG_API sg_status sg_compare(const sg_compare_spec* spec, char** records_out,
                            char** summary_out, int64_t* plan_violations);

#ifdef __cplusplus
}
#endif

#endif
