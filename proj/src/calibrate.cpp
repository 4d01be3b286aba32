#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mgsim/errors.hpp"
#include "mgsim/scenario.hpp"

namespace mgsim {

namespace {

// Detection must be possible this quickly after inception; observations are
// taken inside this horizon so the derived thresholds leave crossing time.
constexpr double kResponseDeadline = 0.005;
constexpr double kFaultOn = 0.05;

// The joint current entry is measured over samples at least this deep into
// the phase's own sag, mirroring where the final midpoint voltage
// threshold will sit.
constexpr double kVoltageEligibleShare = 0.5;

struct Entry {
    double i_pct = 0.0;
    double v_pct = 0.0;
    std::string who;
};

struct SeriesView {
    const PointTrace* trace = nullptr;
    RelayConfig cfg;
};

double er_pct(double value, double rated) { return 100.0 * (value - rated) / rated; }

// strongest debounce-confirmed current excursion and deepest confirmed sag
// of one phase over a sample range
struct PhaseExtrema {
    double i_confirmed_max = -std::numeric_limits<double>::infinity();
    double v_confirmed_min = std::numeric_limits<double>::infinity();
    // current excursion confirmed while the phase also sat inside the
    // eligible part of its own sag (both detection conditions together)
    double i_joint_max = -std::numeric_limits<double>::infinity();
};

PhaseExtrema phase_extrema(const SeriesView& s, int phase, size_t k0, size_t k1, int debounce) {
    PhaseExtrema ex;
    const auto& est = s.trace->estimates;
    k1 = std::min(k1, est.size());
    if (k0 >= k1) return ex;
    auto channel = [&](size_t k, bool current) {
        const ThreePhase& tp = current ? est[k].i : est[k].v;
        Complex v = phase == 0 ? tp.a : phase == 1 ? tp.b : tp.c;
        return er_pct(std::abs(v), current ? s.cfg.i_rated_a : s.cfg.v_rated_v);
    };
    const int d = std::max(1, debounce);
    struct Run {
        double i_min, v_max;
    };
    std::vector<Run> runs;
    for (size_t k = k0; k + d <= k1; ++k) {
        double i_min = std::numeric_limits<double>::infinity();
        double v_max = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < d; ++j) {
            i_min = std::min(i_min, channel(k + j, true));
            v_max = std::max(v_max, channel(k + j, false));
        }
        runs.push_back({i_min, v_max});
        ex.i_confirmed_max = std::max(ex.i_confirmed_max, i_min);
        ex.v_confirmed_min = std::min(ex.v_confirmed_min, v_max);
    }
    for (const auto& r : runs)
        if (r.v_max <= kVoltageEligibleShare * ex.v_confirmed_min)
            ex.i_joint_max = std::max(ex.i_joint_max, r.i_min);
    return ex;
}

Scenario base_scenario(const Testbed& tb, double fs, const std::string& name, double duration) {
    Scenario s;
    s.name = name;
    s.testbed = tb;
    s.islanded = true;
    s.duration_s = duration;
    s.fs_hz = fs;
    return s;
}

std::vector<SeriesView> views_for(const Scenario& s, const RunReport& rep,
                                  const std::vector<std::string>& relays) {
    std::vector<SeriesView> out;
    for (const auto& tr : rep.traces) {
        if (std::find(relays.begin(), relays.end(), tr.relay_id) == relays.end()) continue;
        out.push_back({&tr, s.overrides.apply(s.testbed.config_for(tr.relay_id))});
    }
    return out;
}

} // namespace

CalibrationResult calibrate_thresholds(const Testbed& testbed, double fs_hz) {
    testbed.validate();
    const NetworkModel& net = testbed.net;

    std::vector<const DistributionLine*> prot;
    for (const auto& l : net.lines)
        if (l.is_protected()) prot.push_back(&l);
    if (prot.empty()) throw CalibrationError("calibration: no protected lines");

    const std::string lg_line = prot.front()->id;
    const std::string lllg_line = prot.back()->id;
    const std::string external_line = prot.size() > 1 ? prot[1]->id : prot.front()->id;
    const std::vector<std::string> observe{prot.front()->relay_from, prot.front()->relay_to};

    const int debounce = testbed.relay_defaults.debounce_samples;
    const double dt = 1.0 / fs_hz;
    const size_t k_on = static_cast<size_t>(std::llround(kFaultOn * fs_hz));
    const size_t k_deadline = k_on + static_cast<size_t>(std::llround(kResponseDeadline * fs_hz));

    auto fault_scenario = [&](FaultKind kind, const std::string& line) {
        Scenario s = base_scenario(testbed, fs_hz, "calib_fault", kFaultOn + 0.05);
        ScenarioEvent e;
        e.t = kFaultOn;
        e.kind = ScenarioEvent::Kind::fault;
        e.fault.kind = kind;
        e.fault.line_id = line;
        e.fault.fraction = 0.5;
        e.fault.rf_ohm = 20.0;
        s.events.push_back(e);
        return s;
    };

    // the two weakest fault kinds that still must be seen, in both modes:
    // islanded gives the smallest currents, grid-connected the shallowest
    // sags on the stiff buses
    std::vector<Entry> fault_entries;
    for (const auto& base :
         {fault_scenario(FaultKind::LG, lg_line), fault_scenario(FaultKind::LLLG, lllg_line)}) {
        for (bool islanded : {true, false}) {
            Scenario sc = base;
            sc.islanded = islanded;
            RunReport rep = run_scenario(sc, {.out_dir = "", .relays_enabled = false});
            const auto& line = net.lines[net.line_index(sc.events[0].fault.line_id)];
            auto views = views_for(sc, rep, {line.relay_from, line.relay_to});
            Entry best;
            best.i_pct = -std::numeric_limits<double>::infinity();
            for (const auto& v : views) {
                for (int ph = 0; ph < 3; ++ph) {
                    PhaseExtrema ex = phase_extrema(v, ph, k_on, k_deadline, debounce);
                    if (ex.i_joint_max > best.i_pct) {
                        best.i_pct = ex.i_joint_max;
                        best.v_pct = ex.v_confirmed_min;
                        best.who = v.trace->relay_id;
                    }
                }
            }
            fault_entries.push_back(best);
        }
    }

    // switching set: every initially-open load, closed one per run, plus a
    // grid open/reclose pass when a grid source exists
    std::vector<Scenario> quiet_runs;
    for (const auto& load : net.loads) {
        if (load.switch_state != SwitchState::open) continue;
        Scenario s = base_scenario(testbed, fs_hz, "calib_load_" + load.id, 0.12);
        ScenarioEvent e;
        e.t = kFaultOn;
        e.kind = ScenarioEvent::Kind::load_action;
        e.target_id = load.id;
        e.target_state = SwitchState::closed;
        s.events.push_back(e);
        quiet_runs.push_back(s);
    }
    for (const auto& src : net.sources) {
        if (src.kind != SourceKind::grid) continue;
        Scenario s = base_scenario(testbed, fs_hz, "calib_sectional", 0.16);
        s.islanded = false;
        ScenarioEvent open;
        open.t = kFaultOn;
        open.kind = ScenarioEvent::Kind::switch_action;
        open.target_id = src.id;
        open.target_state = SwitchState::open;
        ScenarioEvent close = open;
        close.t = kFaultOn + 0.04;
        close.target_state = SwitchState::closed;
        s.events.push_back(open);
        s.events.push_back(close);
        quiet_runs.push_back(s);
        break;
    }

    auto collect_quiet = [&](const RunReport& rep, const Scenario& sc, std::vector<Entry>& out) {
        auto views = views_for(sc, rep, observe);
        for (const auto& v : views)
            for (int ph = 0; ph < 3; ++ph) {
                PhaseExtrema ex = phase_extrema(v, ph, 0, v.trace->estimates.size(), debounce);
                out.push_back({ex.i_confirmed_max, ex.v_confirmed_min,
                               v.trace->relay_id + "/" + std::to_string(ph)});
            }
    };

    std::vector<Entry> quiet_entries;
    for (const auto& sc : quiet_runs) {
        RunReport rep = run_scenario(sc, {.out_dir = "", .relays_enabled = false});
        collect_quiet(rep, sc, quiet_entries);
    }

    // the external fault clears through its own relays, so its imprint on
    // the observed line depends on the thresholds: iterate to a fixed point
    Scenario ext = base_scenario(testbed, fs_hz, "calib_external", 0.12);
    {
        ScenarioEvent e;
        e.t = kFaultOn;
        e.kind = ScenarioEvent::Kind::fault;
        e.fault.kind = FaultKind::LLG;
        e.fault.line_id = external_line;
        e.fault.fraction = 0.5;
        e.fault.rf_ohm = 0.0;
        ext.events.push_back(e);
    }

    auto midpoints = [&](const std::vector<Entry>& quiet,
                         const std::vector<Entry>& faulted) -> CalibrationResult {
        CalibrationResult r;
        double nf_i = -std::numeric_limits<double>::infinity();
        std::string nf_who;
        for (const auto& e : quiet)
            if (e.i_pct > nf_i) {
                nf_i = e.i_pct;
                nf_who = e.who;
            }
        double f_i = std::numeric_limits<double>::infinity();
        double f_v = -std::numeric_limits<double>::infinity();
        for (const auto& e : faulted) {
            f_i = std::min(f_i, e.i_pct);
            f_v = std::max(f_v, e.v_pct);
        }
        if (nf_i >= f_i) {
            std::ostringstream os;
            os << "no separating current threshold: no-fault I_er% reaches " << nf_i << " ("
               << nf_who << ") while the weakest fault case peaks at " << f_i;
            throw NoSeparation(os.str());
        }
        r.no_fault_i_max_pct = nf_i;
        r.fault_i_min_pct = f_i;
        r.i_threshold_pct = 0.5 * (nf_i + f_i);

        // voltage gate: no-fault samples matter only where the current
        // condition is already confirmed
        double v_floor = 0.0;
        for (const auto& e : quiet)
            if (e.i_pct >= r.i_threshold_pct) v_floor = std::min(v_floor, e.v_pct);
        if (f_v >= v_floor) {
            std::ostringstream os;
            os << "no separating voltage threshold: fault sag reaches only " << f_v
               << "% while current-eligible no-fault sag floor is " << v_floor << "%";
            throw NoSeparation(os.str());
        }
        r.no_fault_v_floor_pct = v_floor;
        r.fault_v_max_pct = f_v;
        r.v_threshold_pct = 0.5 * (v_floor + f_v);
        return r;
    };

    CalibrationResult result = midpoints(quiet_entries, fault_entries);
    for (int round = 1; round <= 10; ++round) {
        Scenario attempt = ext;
        attempt.overrides.v_threshold_pct = result.v_threshold_pct;
        attempt.overrides.i_threshold_pct = result.i_threshold_pct;
        RunReport rep = run_scenario(attempt, {.out_dir = "", .relays_enabled = true});
        std::vector<Entry> entries = quiet_entries;
        collect_quiet(rep, attempt, entries);
        CalibrationResult next = midpoints(entries, fault_entries);
        next.rounds = round;
        bool stable = std::abs(next.i_threshold_pct - result.i_threshold_pct) < 1e-9 &&
                      std::abs(next.v_threshold_pct - result.v_threshold_pct) < 1e-9;
        result = next;
        if (stable) return result;
    }
    throw CalibrationError("calibration did not settle after 10 rounds");
}

} // namespace mgsim
