/* C interface to the microgrid fault and protection simulator.
 *
 * All entry points return MGS_OK or an error code; when an error buffer is
 * supplied it receives a NUL-terminated message. Objects are opaque and
 * must be released with their matching free function.
 */
#ifndef MGSIM_H
#define MGSIM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mgs_testbed mgs_testbed;
typedef struct mgs_scenario mgs_scenario;
typedef struct mgs_report mgs_report;

enum {
    MGS_OK = 0,
    MGS_ERR_IO = 1,
    MGS_ERR_PARSE = 2,
    MGS_ERR_INVALID = 3,
    MGS_ERR_SOLVE = 4,
    MGS_ERR_NO_SEPARATION = 5,
    MGS_ERR_INTERNAL = 6
};

const char* mgs_version(void);

int mgs_testbed_load_file(const char* path, mgs_testbed** out, char* err, size_t err_len);
void mgs_testbed_free(mgs_testbed* tb);

int mgs_scenario_load_file(const char* path, mgs_scenario** out, char* err, size_t err_len);
void mgs_scenario_free(mgs_scenario* sc);

/* Overrides applied before running. set_rf touches every fault event. */
int mgs_scenario_set_rf(mgs_scenario* sc, double rf_ohm);
int mgs_scenario_set_fs(mgs_scenario* sc, double fs_hz);
int mgs_scenario_set_thresholds(mgs_scenario* sc, double v_threshold_pct,
                                double i_threshold_pct);

/* out_dir may be NULL to skip file emission. */
int mgs_run_scenario(const mgs_scenario* sc, const char* out_dir, mgs_report** out, char* err,
                     size_t err_len);
void mgs_report_free(mgs_report* rep);

typedef struct mgs_trip_info {
    char relay[32];
    double t_trip;
    int fault_code;
    double response_time_s;
} mgs_trip_info;

size_t mgs_report_trip_count(const mgs_report* rep);
int mgs_report_trip(const mgs_report* rep, size_t index, mgs_trip_info* out);

/* 1 = declared expectations met, 0 = failed, -1 = none declared */
int mgs_report_expectations(const mgs_report* rep);
size_t mgs_report_failure_count(const mgs_report* rep);
int mgs_report_failure(const mgs_report* rep, size_t index, char* buf, size_t buf_len);

int mgs_calibrate(const mgs_testbed* tb, double fs_hz, double* v_threshold_pct,
                  double* i_threshold_pct, char* err, size_t err_len);
int mgs_calibrate_to_file(const mgs_testbed* tb, double fs_hz, const char* path, char* err,
                          size_t err_len);

#ifdef __cplusplus
}
#endif

#endif
