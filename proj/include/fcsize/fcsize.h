/* C interface to the fuel-cell rack simulator and ESD sizing engine.
 *
 * Every call returns an fcs_status. On failure fcs_last_error() returns a
 * message for the calling thread, valid until its next failing call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with fcs_string_free. */
#ifndef FCSIZE_FCSIZE_H
#define FCSIZE_FCSIZE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FCS_API __declspec(dllexport)
#else
#define FCS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fcs_status {
  FCS_OK = 0,
  FCS_ERR_INVALID_ARGUMENT = 1,
  FCS_ERR_INVALID_STATE = 2,
  FCS_ERR_MODEL_DIVERGENCE = 3,
  FCS_ERR_CALIBRATION_INFEASIBLE = 4,
  FCS_ERR_INFEASIBLE_BUDGET = 5,
  FCS_ERR_PRECONDITION = 6,
  FCS_ERR_UNDEFINED_METRICS = 7,
  FCS_ERR_PARSE = 8,
  FCS_ERR_IO = 9,
  FCS_ERR_INTERNAL = 10
} fcs_status;

typedef struct fcs_config fcs_config;
typedef struct fcs_trace fcs_trace;

FCS_API const char* fcs_version(void);
FCS_API const char* fcs_status_name(fcs_status status);
FCS_API const char* fcs_last_error(void);
FCS_API void fcs_string_free(char* s);

/* Configuration (JSON, see docs/formats.md). */
FCS_API fcs_status fcs_config_default(fcs_config** out);
FCS_API fcs_status fcs_config_load(const char* path, fcs_config** out);
FCS_API fcs_status fcs_config_parse(const char* json, fcs_config** out);
FCS_API fcs_status fcs_config_to_json(const fcs_config* config, char** out_json);
FCS_API fcs_status fcs_config_save(const fcs_config* config, const char* path);
FCS_API fcs_status fcs_config_set_dt(fcs_config* config, double dt_s);
FCS_API fcs_status fcs_config_set_seed(fcs_config* config, uint64_t seed);
FCS_API fcs_status fcs_config_set_tcapping(fcs_config* config, double t_capping_s);
FCS_API void fcs_config_free(fcs_config* config);

/* Rack demand traces. */
FCS_API fcs_status fcs_trace_load(const char* path, fcs_trace** out);
FCS_API fcs_status fcs_trace_from_samples(const double* t_s, const double* demand_w, size_t n,
                                          fcs_trace** out);
FCS_API fcs_status fcs_trace_surge(double base_w, double magnitude_w, double slope_w_per_s,
                                   double width_s, double pre_s, double post_s, double dt_s,
                                   fcs_trace** out);
/* kind: "single-surge-day" or "frequent-surge-day". */
FCS_API fcs_status fcs_trace_archetype(const char* kind, double dt_s, uint64_t seed,
                                       fcs_trace** out);
FCS_API fcs_status fcs_trace_save(const fcs_trace* trace, const char* path);
FCS_API size_t fcs_trace_size(const fcs_trace* trace);
FCS_API fcs_status fcs_trace_sample(const fcs_trace* trace, size_t index, double* t_s,
                                    double* demand_w);
FCS_API void fcs_trace_free(fcs_trace* trace);

/* Fits the fuel processor lag so target_slope is the steepest gap-free ramp
 * over [lo_w, hi_w]; target_slope <= 0 keeps the configured rate. */
FCS_API fcs_status fcs_calibrate(const fcs_config* config, double target_slope_w_per_s,
                                 double lo_w, double hi_w, fcs_config** out_calibrated,
                                 double* out_achieved_slope);

/* Smallest ESD capacity with no shortfall on the uncapped trace. */
FCS_API fcs_status fcs_min_esd(const fcs_config* config, const fcs_trace* trace,
                               double* out_joules);
/* Fully provisioned capacity used as 100% by fraction-based calls. */
FCS_API fcs_status fcs_baseline_capacity(const fcs_config* config, const fcs_trace* trace,
                                         double* out_joules);

/* Uncapped unavailability for each capacity (joules). */
FCS_API fcs_status fcs_availability(const fcs_config* config, const fcs_trace* trace,
                                    const double* capacities_j, size_t n,
                                    double* out_unavailable_fraction);

/* Capped run at capacity_fraction of the baseline capacity. step_csv_path and
 * decision_csv_path may be NULL. The report JSON embeds the resolved config. */
FCS_API fcs_status fcs_simulate(const fcs_config* config, const fcs_trace* trace,
                                const char* policy, double capacity_fraction,
                                const char* step_csv_path, const char* decision_csv_path,
                                char** out_report_json);

/* Sweep over the configured capacity fractions. policies is "all" or a comma
 * separated list; sla_json may be NULL to use the config's margins. */
FCS_API fcs_status fcs_size(const fcs_config* config, const fcs_trace* trace,
                            const char* policies, const char* sla_json, char** out_report_json,
                            char** out_sweep_csv);

#ifdef __cplusplus
}
#endif

#endif /* FCSIZE_FCSIZE_H */
