#ifndef MGSIM_SCENARIO_HPP
#define MGSIM_SCENARIO_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/fault.hpp"
#include "mgsim/network.hpp"
#include "mgsim/relay.hpp"
#include "mgsim/waveform.hpp"

namespace mgsim {

struct RelayRatings {
    double v_rated_v = 0.0;
    double i_rated_a = 0.0;
};

/// Electrical model plus the protection settings that ship with it.
struct Testbed {
    NetworkModel net;
    RelayConfig relay_defaults;
    std::map<std::string, RelayRatings> ratings;

    RelayConfig config_for(const std::string& relay_id) const;
    void validate() const;
};

struct ScenarioEvent {
    enum class Kind { fault, switch_action, load_action };
    double t = 0.0;
    Kind kind = Kind::fault;
    FaultSpec fault;
    std::string target_id;
    SwitchState target_state = SwitchState::open;
};

struct ExpectedTrip {
    std::string relay;
    int code = 0; // 0 = any
};

struct Expectations {
    std::vector<ExpectedTrip> trips;
    bool exclusive = false; // no trips beyond the listed relays
    std::vector<std::string> no_trips;
    std::optional<double> max_response_s;
};

struct RelayOverrides {
    std::optional<double> v_threshold_pct;
    std::optional<double> i_threshold_pct;
    std::optional<double> presence_ratio;
    std::optional<int> debounce_samples;
    std::optional<double> window_cycles;

    RelayConfig apply(RelayConfig base) const;
};

struct Scenario {
    std::string name;
    Testbed testbed;
    bool islanded = false;
    double duration_s = 0.3;
    double fs_hz = 10000.0;
    std::vector<ScenarioEvent> events;
    RelayOverrides overrides;
    std::optional<Expectations> expect;

    void validate() const; // throws ScenarioError / ConfigError
};

struct RelayFinalState {
    std::string relay_id;
    RelayStatus status = RelayStatus::monitoring;
    int fault_code = 0;
    std::optional<double> trip_time;
};

/// Everything observed at one measurement point over a run.
struct PointTrace {
    std::string line_id;
    LineEnd end = LineEnd::from_end;
    std::string relay_id;
    std::string file_stem; // e.g. "DL-1_from"
    std::vector<MeasurementSample> samples;       // t >= 0 only
    std::vector<PhasorEstimate> estimates;        // parallel to samples
};

struct RunReport {
    std::string scenario_name;
    double fs_hz = 0.0;
    double duration_s = 0.0;
    bool islanded = false;
    std::vector<TripEvent> trips;
    std::vector<RelayFinalState> relay_finals;
    std::vector<FaultSpec> fault_events;
    std::vector<PointTrace> traces;
    std::vector<std::string> output_files;
    int expectations_status = -1; // -1 none declared, 1 met, 0 failed
    std::vector<std::string> expectation_failures;
};

struct RunOptions {
    std::string out_dir;        // empty = write nothing
    bool relays_enabled = true; // false = observe only, never trip
};

RunReport run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Writes events.jsonl, one CSV per measurement point and summary.txt.
std::vector<std::string> emit_outputs(const RunReport& report, const std::string& out_dir);

struct CalibrationResult {
    double v_threshold_pct = 0.0;
    double i_threshold_pct = 0.0;
    double no_fault_i_max_pct = 0.0;
    double fault_i_min_pct = 0.0;
    double no_fault_v_floor_pct = 0.0;
    double fault_v_max_pct = 0.0;
    int rounds = 0;
};

/// Derives detection thresholds from the two weakest islanded fault cases
/// and the switching/no-fault set, then midpoints the separating
/// intervals. Throws NoSeparation when an interval is empty.
CalibrationResult calibrate_thresholds(const Testbed& testbed, double fs_hz);

} // namespace mgsim

#endif
