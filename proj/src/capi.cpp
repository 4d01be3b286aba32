#include "mgsim.h"

#include <cstring>
#include <string>

#include "mgsim/errors.hpp"
#include "mgsim/json_io.hpp"
#include "mgsim/scenario.hpp"

namespace {

void put_error(char* err, size_t err_len, const std::string& msg) {
    if (!err || err_len == 0) return;
    size_t n = std::min(err_len - 1, msg.size());
    std::memcpy(err, msg.data(), n);
    err[n] = '\0';
}

template <typename Fn>
int guarded(char* err, size_t err_len, Fn&& fn) {
    try {
        return fn();
    } catch (const mgsim::NoSeparation& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_NO_SEPARATION;
    } catch (const mgsim::IoError& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_IO;
    } catch (const mgsim::ConfigError& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_INVALID;
    } catch (const mgsim::ScenarioError& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_INVALID;
    } catch (const mgsim::SolveFailed& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_SOLVE;
    } catch (const std::exception& e) {
        put_error(err, err_len, e.what());
        return MGS_ERR_INTERNAL;
    }
}

} // namespace

struct mgs_testbed {
    mgsim::Testbed tb;
};
struct mgs_scenario {
    mgsim::Scenario sc;
};
struct mgs_report {
    mgsim::RunReport rep;
};

extern "C" {

const char* mgs_version(void) { return "1.0.0"; }

int mgs_testbed_load_file(const char* path, mgs_testbed** out, char* err, size_t err_len) {
    if (!path || !out) return MGS_ERR_INVALID;
    *out = nullptr;
    return guarded(err, err_len, [&] {
        auto* h = new mgs_testbed{mgsim::load_testbed_file(path)};
        *out = h;
        return MGS_OK;
    });
}

void mgs_testbed_free(mgs_testbed* tb) { delete tb; }

int mgs_scenario_load_file(const char* path, mgs_scenario** out, char* err, size_t err_len) {
    if (!path || !out) return MGS_ERR_INVALID;
    *out = nullptr;
    return guarded(err, err_len, [&] {
        auto* h = new mgs_scenario{mgsim::load_scenario_file(path)};
        *out = h;
        return MGS_OK;
    });
}

void mgs_scenario_free(mgs_scenario* sc) { delete sc; }

int mgs_scenario_set_rf(mgs_scenario* sc, double rf_ohm) {
    if (!sc || rf_ohm < 0.0) return MGS_ERR_INVALID;
    for (auto& e : sc->sc.events)
        if (e.kind == mgsim::ScenarioEvent::Kind::fault) e.fault.rf_ohm = rf_ohm;
    return MGS_OK;
}

int mgs_scenario_set_fs(mgs_scenario* sc, double fs_hz) {
    if (!sc || fs_hz <= 0.0) return MGS_ERR_INVALID;
    sc->sc.fs_hz = fs_hz;
    return MGS_OK;
}

int mgs_scenario_set_thresholds(mgs_scenario* sc, double v_threshold_pct,
                                double i_threshold_pct) {
    if (!sc) return MGS_ERR_INVALID;
    sc->sc.overrides.v_threshold_pct = v_threshold_pct;
    sc->sc.overrides.i_threshold_pct = i_threshold_pct;
    return MGS_OK;
}

int mgs_run_scenario(const mgs_scenario* sc, const char* out_dir, mgs_report** out, char* err,
                     size_t err_len) {
    if (!sc || !out) return MGS_ERR_INVALID;
    *out = nullptr;
    return guarded(err, err_len, [&] {
        mgsim::RunOptions opts;
        if (out_dir) opts.out_dir = out_dir;
        auto* h = new mgs_report{mgsim::run_scenario(sc->sc, opts)};
        *out = h;
        return MGS_OK;
    });
}

void mgs_report_free(mgs_report* rep) { delete rep; }

size_t mgs_report_trip_count(const mgs_report* rep) { return rep ? rep->rep.trips.size() : 0; }

int mgs_report_trip(const mgs_report* rep, size_t index, mgs_trip_info* out) {
    if (!rep || !out || index >= rep->rep.trips.size()) return MGS_ERR_INVALID;
    const auto& t = rep->rep.trips[index];
    std::snprintf(out->relay, sizeof(out->relay), "%s", t.relay_id.c_str());
    out->t_trip = t.t_trip;
    out->fault_code = t.fault_code;
    out->response_time_s = t.response_time;
    return MGS_OK;
}

int mgs_report_expectations(const mgs_report* rep) {
    return rep ? rep->rep.expectations_status : -1;
}

size_t mgs_report_failure_count(const mgs_report* rep) {
    return rep ? rep->rep.expectation_failures.size() : 0;
}

int mgs_report_failure(const mgs_report* rep, size_t index, char* buf, size_t buf_len) {
    if (!rep || !buf || index >= rep->rep.expectation_failures.size()) return MGS_ERR_INVALID;
    put_error(buf, buf_len, rep->rep.expectation_failures[index]);
    return MGS_OK;
}

int mgs_calibrate(const mgs_testbed* tb, double fs_hz, double* v_threshold_pct,
                  double* i_threshold_pct, char* err, size_t err_len) {
    if (!tb || !v_threshold_pct || !i_threshold_pct) return MGS_ERR_INVALID;
    return guarded(err, err_len, [&] {
        auto r = mgsim::calibrate_thresholds(tb->tb, fs_hz);
        *v_threshold_pct = r.v_threshold_pct;
        *i_threshold_pct = r.i_threshold_pct;
        return MGS_OK;
    });
}

int mgs_calibrate_to_file(const mgs_testbed* tb, double fs_hz, const char* path, char* err,
                          size_t err_len) {
    if (!tb || !path) return MGS_ERR_INVALID;
    return guarded(err, err_len, [&] {
        auto r = mgsim::calibrate_thresholds(tb->tb, fs_hz);
        mgsim::write_thresholds_file(path, r);
        return MGS_OK;
    });
}

} // extern "C"
