// Exercises the shared-library C interface end to end.

#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "mgsim.h"

static int failures = 0;

#define CHECK(cond)                                                     \
    do {                                                                \
        if (!(cond)) {                                                  \
            std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                 \
        }                                                               \
    } while (0)

static std::string cfg(const char* name) {
    return std::string(MGSIM_SOURCE_DIR) + "/configs/" + name;
}

int main() {
    char err[1024];

    // loading errors surface as codes with messages
    mgs_testbed* tb = nullptr;
    CHECK(mgs_testbed_load_file("/no/such/file.json", &tb, err, sizeof(err)) == MGS_ERR_IO);
    CHECK(tb == nullptr);

    CHECK(mgs_testbed_load_file(cfg("testbed.json").c_str(), &tb, err, sizeof(err)) == MGS_OK);
    CHECK(tb != nullptr);

    mgs_scenario* sc = nullptr;
    CHECK(mgs_scenario_load_file(cfg("four_fault_sequence.json").c_str(), &sc, err, sizeof(err)) == MGS_OK);

    mgs_report* rep = nullptr;
    CHECK(mgs_run_scenario(sc, nullptr, &rep, err, sizeof(err)) == MGS_OK);
    CHECK(mgs_report_trip_count(rep) == 8);
    CHECK(mgs_report_expectations(rep) == 1);

    bool saw_r2 = false;
    for (size_t i = 0; i < mgs_report_trip_count(rep); ++i) {
        mgs_trip_info t;
        CHECK(mgs_report_trip(rep, i, &t) == MGS_OK);
        CHECK(t.fault_code >= 1 && t.fault_code <= 4);
        CHECK(t.response_time_s > 0.0 && t.response_time_s < 0.02);
        if (std::strcmp(t.relay, "R2") == 0) {
            saw_r2 = true;
            CHECK(t.fault_code == 1);
        }
    }
    CHECK(saw_r2);
    CHECK(mgs_report_trip(rep, 999, nullptr) == MGS_ERR_INVALID);
    mgs_report_free(rep);

    // rf override pushes the same scenario through higher resistance
    CHECK(mgs_scenario_set_rf(sc, 20.0) == MGS_OK);
    CHECK(mgs_scenario_set_rf(sc, -1.0) == MGS_ERR_INVALID);
    rep = nullptr;
    CHECK(mgs_run_scenario(sc, nullptr, &rep, err, sizeof(err)) == MGS_OK);
    CHECK(mgs_report_trip_count(rep) >= 1);
    mgs_report_free(rep);
    mgs_scenario_free(sc);

    // threshold override switches behavior deterministically
    CHECK(mgs_scenario_load_file(cfg("lg_dl1_rf8.json").c_str(), &sc, err, sizeof(err)) ==
          MGS_OK);
    CHECK(mgs_scenario_set_thresholds(sc, -0.002163, 9.398) == MGS_OK);
    rep = nullptr;
    CHECK(mgs_run_scenario(sc, nullptr, &rep, err, sizeof(err)) == MGS_OK);
    CHECK(mgs_report_expectations(rep) == 1);
    mgs_report_free(rep);
    mgs_scenario_free(sc);

    // calibration through the C surface
    double v_thr = 0.0, i_thr = 0.0;
    CHECK(mgs_calibrate(tb, 10000.0, &v_thr, &i_thr, err, sizeof(err)) == MGS_OK);
    CHECK(v_thr < 0.0);
    CHECK(i_thr > 0.0);
    mgs_testbed_free(tb);

    CHECK(std::strlen(mgs_version()) > 0);

    if (failures == 0) std::printf("c api: all checks passed\n");
    return failures == 0 ? 0 : 1;
}
