#include "mgsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mgsim/errors.hpp"

namespace mgsim {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::string end_name(LineEnd e) { return e == LineEnd::from_end ? "from" : "to"; }

struct RelayPoint {
    std::string relay_id;
    int line_index = -1;
    LineEnd end = LineEnd::from_end;
    int bus_index = -1;
    RelayConfig cfg;
};

std::vector<RelayPoint> relay_points(const Scenario& s) {
    std::vector<RelayPoint> pts;
    const auto& net = s.testbed.net;
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const auto& l = net.lines[li];
        if (!l.is_protected()) continue;
        for (LineEnd end : {LineEnd::from_end, LineEnd::to_end}) {
            RelayPoint p;
            p.relay_id = end == LineEnd::from_end ? l.relay_from : l.relay_to;
            p.line_index = static_cast<int>(li);
            p.end = end;
            p.bus_index = net.bus_index(end == LineEnd::from_end ? l.from_bus : l.to_bus);
            p.cfg = s.overrides.apply(s.testbed.config_for(p.relay_id));
            p.cfg.validate();
            pts.push_back(p);
        }
    }
    return pts;
}

struct PointPhasors {
    ThreePhase v; // volts RMS
    ThreePhase i; // amperes RMS
};

std::vector<PointPhasors> measure(const NetworkModel& net, const SteadyState& st,
                                  const std::vector<RelayPoint>& pts) {
    std::vector<PointPhasors> out;
    out.reserve(pts.size());
    const Complex vb(net.base.v_phase(), 0.0);
    const Complex ib(net.base.i_a(), 0.0);
    for (const auto& p : pts) {
        PointPhasors q;
        q.v = fortescue_compose(st.bus_v[p.bus_index]) * vb;
        q.i = fortescue_compose(st.line_i[p.line_index][p.end == LineEnd::from_end ? 0 : 1]) * ib;
        out.push_back(q);
    }
    return out;
}

MeasurementSample sample_at(const PointPhasors& ph, double omega, double t) {
    MeasurementSample m;
    m.t = t;
    m.va = instantaneous(ph.v.a, omega, t);
    m.vb = instantaneous(ph.v.b, omega, t);
    m.vc = instantaneous(ph.v.c, omega, t);
    m.ia = instantaneous(ph.i.a, omega, t);
    m.ib = instantaneous(ph.i.b, omega, t);
    m.ic = instantaneous(ph.i.c, omega, t);
    return m;
}

} // namespace

RelayConfig Testbed::config_for(const std::string& relay_id) const {
    RelayConfig cfg = relay_defaults;
    auto it = ratings.find(relay_id);
    if (it != ratings.end()) {
        cfg.v_rated_v = it->second.v_rated_v;
        cfg.i_rated_a = it->second.i_rated_a;
    }
    return cfg;
}

void Testbed::validate() const {
    net.validate();
    std::vector<std::string> problems;
    for (const auto& l : net.lines) {
        if (!l.is_protected()) continue;
        for (const auto& r : {l.relay_from, l.relay_to}) {
            auto it = ratings.find(r);
            if (it == ratings.end()) {
                problems.push_back("relay " + r + ": missing ratings");
            } else {
                if (it->second.v_rated_v <= 0.0)
                    problems.push_back("relay " + r + ": v_rated_v must be > 0");
                if (it->second.i_rated_a <= 0.0)
                    problems.push_back("relay " + r + ": i_rated_a must be > 0");
            }
        }
    }
    if (!problems.empty()) {
        std::ostringstream os;
        os << "invalid testbed:";
        for (const auto& p : problems) os << "\n  - " << p;
        throw ConfigError(os.str());
    }
}

RelayConfig RelayOverrides::apply(RelayConfig base) const {
    if (v_threshold_pct) base.v_threshold_pct = *v_threshold_pct;
    if (i_threshold_pct) base.i_threshold_pct = *i_threshold_pct;
    if (presence_ratio) base.presence_ratio = *presence_ratio;
    if (debounce_samples) base.debounce_samples = *debounce_samples;
    if (window_cycles) base.window_cycles = *window_cycles;
    return base;
}

void Scenario::validate() const {
    testbed.validate();
    const auto& net = testbed.net;
    std::vector<std::string> problems;
    if (duration_s <= 0.0) problems.push_back("duration_s must be > 0");
    if (fs_hz < 20.0 * net.frequency_hz) problems.push_back("fs_hz below 20x system frequency");
    double ratio = fs_hz / net.frequency_hz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        problems.push_back("fs_hz must be an integer multiple of system frequency");

    double last_t = -1.0;
    for (const auto& e : events) {
        if (e.t < 0.0 || e.t >= duration_s)
            problems.push_back("event at t=" + fmt(e.t) + ": outside [0, duration)");
        if (e.t < last_t) problems.push_back("events not sorted by time");
        last_t = e.t;
        switch (e.kind) {
        case ScenarioEvent::Kind::fault: {
            if (net.line_index(e.fault.line_id) < 0)
                problems.push_back("fault on unknown line " + e.fault.line_id);
            try {
                e.fault.validate_phases();
            } catch (const std::exception& ex) {
                problems.push_back(ex.what());
            }
            break;
        }
        case ScenarioEvent::Kind::switch_action: {
            bool known = net.source_index(e.target_id) >= 0;
            auto colon = e.target_id.rfind(':');
            if (!known && colon != std::string::npos)
                known = net.line_index(e.target_id.substr(0, colon)) >= 0;
            if (!known) problems.push_back("switch event: unknown switch " + e.target_id);
            break;
        }
        case ScenarioEvent::Kind::load_action:
            if (net.load_index(e.target_id) < 0)
                problems.push_back("load event: unknown load " + e.target_id);
            break;
        }
    }
    if (expect) {
        auto relay_known = [&](const std::string& r) {
            for (const auto& l : net.lines)
                if (l.relay_from == r || l.relay_to == r) return true;
            return false;
        };
        for (const auto& t : expect->trips)
            if (!relay_known(t.relay)) problems.push_back("expected trip: unknown relay " + t.relay);
        for (const auto& r : expect->no_trips)
            if (!relay_known(r)) problems.push_back("no-trip expectation: unknown relay " + r);
    }
    if (!problems.empty()) {
        std::ostringstream os;
        os << "invalid scenario" << (name.empty() ? "" : " " + name) << ":";
        for (const auto& p : problems) os << "\n  - " << p;
        throw ScenarioError(os.str());
    }
}

RunReport run_scenario(const Scenario& s, const RunOptions& opts) {
    s.validate();

    NetworkModel model = s.testbed.net;
    for (auto& src : model.sources)
        if (src.kind == SourceKind::grid)
            src.connect_switch = s.islanded ? SwitchState::open : SwitchState::closed;

    const Dispatch dispatch = dispatch_sources(model);
    const double f0 = model.frequency_hz;
    const double fs = s.fs_hz;
    const double dt = 1.0 / fs;
    const double omega = 2.0 * pi() * f0;
    const long n_total = std::llround(s.duration_s * fs);

    std::vector<RelayPoint> pts = relay_points(s);
    std::vector<RelayState> states(pts.size());
    std::vector<SlidingPhasorEstimator> est;
    long preroll = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        states[i].relay_id = pts[i].relay_id;
        long n = std::llround(pts[i].cfg.window_cycles * fs / f0);
        preroll = std::max(preroll, n);
        est.emplace_back(static_cast<size_t>(n), f0, fs);
    }

    RunReport report;
    report.scenario_name = s.name;
    report.fs_hz = fs;
    report.duration_s = s.duration_s;
    report.islanded = s.islanded;
    report.traces.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        auto& tr = report.traces[i];
        tr.line_id = model.lines[pts[i].line_index].id;
        tr.end = pts[i].end;
        tr.relay_id = pts[i].relay_id;
        tr.file_stem = tr.line_id + "_" + end_name(pts[i].end);
        tr.samples.reserve(n_total);
        tr.estimates.reserve(n_total);
    }
    for (const auto& e : s.events)
        if (e.kind == ScenarioEvent::Kind::fault) {
            report.fault_events.push_back(e.fault);
            report.fault_events.back().t_on = e.t;
        }

    std::vector<FaultSpec> active_faults;
    auto recompute = [&]() -> std::vector<PointPhasors> {
        std::vector<const FaultSpec*> live;
        for (const auto& f : active_faults) {
            const auto& l = model.lines[model.line_index(f.line_id)];
            if (l.switch_from == SwitchState::closed || l.switch_to == SwitchState::closed)
                live.push_back(&f);
        }
        if (live.size() > 1)
            throw SolveFailed("simultaneous non-isolated faults are not supported");
        SteadyState st = live.empty()
                             ? solve_steady(model, dispatch)
                             : solve_network_fault(model, dispatch, *live.front()).during;
        return measure(model, st, pts);
    };

    std::vector<PointPhasors> phasors = recompute();

    // seed the estimation windows with the initial steady state
    for (long k = -preroll; k < 0; ++k) {
        double t = static_cast<double>(k) * dt;
        for (size_t i = 0; i < pts.size(); ++i) est[i].push(sample_at(phasors[i], omega, t));
    }

    size_t next_event = 0;
    std::vector<std::string> pending_isolation;
    double last_fault_on = 0.0;
    bool saw_fault = false;

    for (long k = 0; k < n_total; ++k) {
        const double t = static_cast<double>(k) * dt;

        bool dirty = false;
        for (const auto& relay : pending_isolation) {
            model = isolate(model, relay);
            dirty = true;
        }
        pending_isolation.clear();
        while (next_event < s.events.size() && s.events[next_event].t <= t + 1e-12) {
            const auto& e = s.events[next_event++];
            switch (e.kind) {
            case ScenarioEvent::Kind::fault:
                active_faults.push_back(e.fault);
                active_faults.back().t_on = t;
                last_fault_on = t;
                saw_fault = true;
                break;
            case ScenarioEvent::Kind::switch_action:
            case ScenarioEvent::Kind::load_action:
                model = apply_switch_action(model, e.target_id, e.target_state);
                break;
            }
            dirty = true;
        }
        if (dirty) phasors = recompute();

        for (size_t i = 0; i < pts.size(); ++i) {
            MeasurementSample m = sample_at(phasors[i], omega, t);
            est[i].push(m);
            PhasorEstimate pe = est[i].estimate();
            report.traces[i].samples.push_back(m);
            report.traces[i].estimates.push_back(pe);

            if (!opts.relays_enabled) continue;
            auto ev = relay_step(states[i], pe, t, pts[i].cfg);
            if (ev) {
                ev->response_time = saw_fault ? t - last_fault_on : t;
                report.trips.push_back(*ev);
                pending_isolation.push_back(pts[i].relay_id);
            }
        }
    }

    for (size_t i = 0; i < pts.size(); ++i) {
        RelayFinalState f;
        f.relay_id = states[i].relay_id;
        f.status = states[i].status;
        f.fault_code = states[i].fault_code;
        f.trip_time = states[i].trip_time;
        report.relay_finals.push_back(f);
    }
    std::sort(report.trips.begin(), report.trips.end(), [](const TripEvent& a, const TripEvent& b) {
        return a.t_trip != b.t_trip ? a.t_trip < b.t_trip : a.relay_id < b.relay_id;
    });

    if (s.expect) {
        const auto& ex = *s.expect;
        auto& fails = report.expectation_failures;
        for (const auto& want : ex.trips) {
            bool found = false;
            for (const auto& trip : report.trips)
                if (trip.relay_id == want.relay && (want.code == 0 || trip.fault_code == want.code))
                    found = true;
            if (!found)
                fails.push_back("missing trip: " + want.relay +
                                (want.code ? " code " + std::to_string(want.code) : ""));
        }
        if (ex.exclusive) {
            for (const auto& trip : report.trips) {
                bool listed = false;
                for (const auto& want : ex.trips)
                    if (want.relay == trip.relay_id) listed = true;
                if (!listed) fails.push_back("unexpected trip: " + trip.relay_id);
            }
        }
        for (const auto& quiet : ex.no_trips)
            for (const auto& trip : report.trips)
                if (trip.relay_id == quiet) fails.push_back("forbidden trip: " + quiet);
        if (ex.max_response_s)
            for (const auto& trip : report.trips)
                if (trip.response_time > *ex.max_response_s + 1e-12)
                    fails.push_back("slow trip: " + trip.relay_id + " response " +
                                    fmt(trip.response_time));
        report.expectations_status = fails.empty() ? 1 : 0;
    }

    if (!opts.out_dir.empty()) report.output_files = emit_outputs(report, opts.out_dir);
    return report;
}

std::vector<std::string> emit_outputs(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);

    std::vector<std::string> files;
    auto open_out = [&](const std::string& name) {
        std::ofstream f(out_dir + "/" + name, std::ios::binary);
        if (!f) throw IoError("cannot write " + out_dir + "/" + name);
        files.push_back(out_dir + "/" + name);
        return f;
    };

    {
        std::ofstream f = open_out("events.jsonl");
        for (const auto& trip : report.trips)
            f << "{\"t\": " << fmt(trip.t_trip) << ", \"relay\": \"" << trip.relay_id
              << "\", \"code\": " << trip.fault_code
              << ", \"response_time_s\": " << fmt(trip.response_time) << "}\n";
    }

    for (const auto& tr : report.traces) {
        std::ofstream f = open_out(tr.file_stem + ".csv");
        f << "t,va,vb,vc,ia,ib,ic,i_pos,i_neg,i_zero\n";
        for (size_t k = 0; k < tr.samples.size(); ++k) {
            const auto& m = tr.samples[k];
            SequenceSet iseq = fortescue_decompose(tr.estimates[k].i);
            f << fmt(m.t) << ',' << fmt(m.va) << ',' << fmt(m.vb) << ',' << fmt(m.vc) << ','
              << fmt(m.ia) << ',' << fmt(m.ib) << ',' << fmt(m.ic) << ','
              << fmt(std::abs(iseq.pos)) << ',' << fmt(std::abs(iseq.neg)) << ','
              << fmt(std::abs(iseq.zero)) << '\n';
        }
    }

    {
        std::ofstream f = open_out("summary.txt");
        f << "scenario: " << report.scenario_name << "\n";
        f << "mode: " << (report.islanded ? "islanded" : "grid_connected") << "\n";
        f << "sampling_hz: " << fmt(report.fs_hz) << "\n\n";

        const double dt = 1.0 / report.fs_hz;
        auto fmt_response = [&](double r) -> std::string {
            if (r < dt) return "<1 sample";
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4f", r);
            return buf;
        };

        auto owner_fault = [&](double t_trip) -> const FaultSpec* {
            const FaultSpec* best = nullptr;
            for (const auto& spec : report.fault_events)
                if (spec.t_on <= t_trip && (!best || spec.t_on > best->t_on)) best = &spec;
            return best;
        };
        f << "fault      line        rf_ohm    code  relay   t_trip     response_s\n";
        for (const auto& spec : report.fault_events) {
            bool any = false;
            for (const auto& trip : report.trips) {
                if (owner_fault(trip.t_trip) != &spec) continue;
                char line[160];
                std::snprintf(line, sizeof(line), "%-10s %-11s %-9g %-5d %-7s %-10.4f %s\n",
                              to_string(spec.kind), spec.line_id.c_str(), spec.rf_ohm,
                              trip.fault_code, trip.relay_id.c_str(), trip.t_trip,
                              fmt_response(trip.response_time).c_str());
                f << line;
                any = true;
            }
            if (!any)
                f << to_string(spec.kind) << "  " << spec.line_id << "  (no trip)\n";
        }

        f << "\nrelay final states:\n";
        for (const auto& r : report.relay_finals) {
            f << "  " << r.relay_id << ": ";
            switch (r.status) {
            case RelayStatus::monitoring: f << "monitoring"; break;
            case RelayStatus::picked_up: f << "picked_up"; break;
            case RelayStatus::tripped:
                f << "tripped code " << r.fault_code << " at " << fmt(*r.trip_time);
                break;
            }
            f << "\n";
        }
        if (report.expectations_status >= 0) {
            f << "\nexpectations: " << (report.expectations_status == 1 ? "met" : "FAILED") << "\n";
            for (const auto& msg : report.expectation_failures) f << "  - " << msg << "\n";
        }
    }
    return files;
}

} // namespace mgsim
