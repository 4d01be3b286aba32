// Command-line front end for the microgrid protection simulator. Talks to
// the core exclusively through the C API in mgsim.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitExpectationFailed = 1;
constexpr int kExitInvalid = 2;

char g_err[4096];

struct ScenarioHandle {
    mgs_scenario* p = nullptr;
    ~ScenarioHandle() { mgs_scenario_free(p); }
};
struct TestbedHandle {
    mgs_testbed* p = nullptr;
    ~TestbedHandle() { mgs_testbed_free(p); }
};
struct ReportHandle {
    mgs_report* p = nullptr;
    ~ReportHandle() { mgs_report_free(p); }
};

int load_scenario(const std::string& path, ScenarioHandle& h) {
    int rc = mgs_scenario_load_file(path.c_str(), &h.p, g_err, sizeof(g_err));
    if (rc != MGS_OK) std::fprintf(stderr, "error: %s\n", g_err);
    return rc;
}

void print_trips(const mgs_report* rep) {
    size_t n = mgs_report_trip_count(rep);
    if (n == 0) {
        std::printf("no trips\n");
        return;
    }
    std::printf("%-8s %-10s %-6s %s\n", "relay", "t_trip", "code", "response_s");
    for (size_t i = 0; i < n; ++i) {
        mgs_trip_info t;
        mgs_report_trip(rep, i, &t);
        std::printf("%-8s %-10.4f %-6d %.4f\n", t.relay, t.t_trip, t.fault_code,
                    t.response_time_s);
    }
}

int report_exit_code(const mgs_report* rep) {
    int status = mgs_report_expectations(rep);
    if (status == 0) {
        size_t n = mgs_report_failure_count(rep);
        for (size_t i = 0; i < n; ++i) {
            char buf[512];
            mgs_report_failure(rep, i, buf, sizeof(buf));
            std::fprintf(stderr, "expectation failed: %s\n", buf);
        }
        return kExitExpectationFailed;
    }
    return kExitOk;
}

bool parse_range(const std::string& spec, double& start, double& stop, double& step) {
    return std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) == 3 && step > 0.0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi-static microgrid fault and protection simulator"};
    app.require_subcommand(1);

    std::string scenario_path, testbed_path, out_dir, thresholds_out, rf_range;
    double fs_override = 0.0;

    auto* run = app.add_subcommand("run", "run a scenario and report trips");
    run->add_option("scenario", scenario_path, "scenario json file")->required();
    run->add_option("--out", out_dir, "directory for events.jsonl, CSVs and summary.txt");
    run->add_option("--fs", fs_override, "sampling rate override (Hz)");

    auto* calibrate = app.add_subcommand("calibrate", "derive detection thresholds");
    calibrate->add_option("testbed", testbed_path, "testbed json file")->required();
    calibrate->add_option("--out", thresholds_out, "write thresholds json here");
    calibrate->add_option("--fs", fs_override, "sampling rate (Hz), default 10000");

    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", scenario_path, "scenario json file")->required();

    auto* sweep = app.add_subcommand("sweep", "re-run a scenario over fault resistances");
    sweep->add_option("scenario", scenario_path, "scenario json file")->required();
    sweep->add_option("--rf", rf_range, "range start:stop:step in ohms")->required();
    sweep->add_option("--out", out_dir, "base output directory (one subdir per value)");
    sweep->add_option("--fs", fs_override, "sampling rate override (Hz)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    if (run->parsed()) {
        ScenarioHandle sc;
        if (load_scenario(scenario_path, sc) != MGS_OK) return kExitInvalid;
        if (fs_override > 0.0) mgs_scenario_set_fs(sc.p, fs_override);
        ReportHandle rep;
        int rc = mgs_run_scenario(sc.p, out_dir.empty() ? nullptr : out_dir.c_str(), &rep.p,
                                  g_err, sizeof(g_err));
        if (rc != MGS_OK) {
            std::fprintf(stderr, "error: %s\n", g_err);
            return kExitInvalid;
        }
        print_trips(rep.p);
        return report_exit_code(rep.p);
    }

    if (calibrate->parsed()) {
        TestbedHandle tb;
        int rc = mgs_testbed_load_file(testbed_path.c_str(), &tb.p, g_err, sizeof(g_err));
        if (rc != MGS_OK) {
            std::fprintf(stderr, "error: %s\n", g_err);
            return kExitInvalid;
        }
        double fs = fs_override > 0.0 ? fs_override : 10000.0;
        double v_thr = 0.0, i_thr = 0.0;
        rc = mgs_calibrate(tb.p, fs, &v_thr, &i_thr, g_err, sizeof(g_err));
        if (rc != MGS_OK) {
            std::fprintf(stderr, "error: %s\n", g_err);
            return rc == MGS_ERR_NO_SEPARATION ? kExitExpectationFailed : kExitInvalid;
        }
        std::printf("v_threshold_pct %.6f\ni_threshold_pct %.6f\n", v_thr, i_thr);
        if (!thresholds_out.empty()) {
            rc = mgs_calibrate_to_file(tb.p, fs, thresholds_out.c_str(), g_err, sizeof(g_err));
            if (rc != MGS_OK) {
                std::fprintf(stderr, "error: %s\n", g_err);
                return kExitInvalid;
            }
        }
        return kExitOk;
    }

    if (validate->parsed()) {
        ScenarioHandle sc;
        if (load_scenario(scenario_path, sc) != MGS_OK) return kExitInvalid;
        std::printf("ok\n");
        return kExitOk;
    }

    if (sweep->parsed()) {
        double start = 0.0, stop = 0.0, step = 0.0;
        if (!parse_range(rf_range, start, stop, step)) {
            std::fprintf(stderr, "error: --rf expects start:stop:step with step > 0\n");
            return kExitInvalid;
        }
        bool all_ok = true;
        std::printf("%-8s %-6s %-8s %-10s %s\n", "rf_ohm", "trips", "codes", "first_trip",
                    "expectations");
        for (double rf = start; rf <= stop + 1e-9; rf += step) {
            ScenarioHandle sc;
            if (load_scenario(scenario_path, sc) != MGS_OK) return kExitInvalid;
            if (fs_override > 0.0) mgs_scenario_set_fs(sc.p, fs_override);
            mgs_scenario_set_rf(sc.p, rf);
            std::string dir;
            if (!out_dir.empty()) {
                char sub[64];
                std::snprintf(sub, sizeof(sub), "/rf_%g", rf);
                dir = out_dir + sub;
            }
            ReportHandle rep;
            int rc = mgs_run_scenario(sc.p, dir.empty() ? nullptr : dir.c_str(), &rep.p, g_err,
                                      sizeof(g_err));
            if (rc != MGS_OK) {
                std::fprintf(stderr, "error at rf=%g: %s\n", rf, g_err);
                return kExitInvalid;
            }
            size_t n = mgs_report_trip_count(rep.p);
            std::string codes;
            double first = 0.0;
            for (size_t i = 0; i < n; ++i) {
                mgs_trip_info t;
                mgs_report_trip(rep.p, i, &t);
                if (i == 0) first = t.t_trip;
                if (!codes.empty()) codes += ",";
                codes += std::to_string(t.fault_code);
            }
            int status = mgs_report_expectations(rep.p);
            const char* verdict = status < 0 ? "-" : status == 1 ? "met" : "FAILED";
            if (status == 0) all_ok = false;
            std::printf("%-8g %-6zu %-8s %-10.4f %s\n", rf, n, codes.empty() ? "-" : codes.c_str(),
                        first, verdict);
        }
        return all_ok ? kExitOk : kExitExpectationFailed;
    }

    return kExitInvalid;
}
