#include "mgsim/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mgsim/errors.hpp"

namespace mgsim {

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

Complex as_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(where + ": expected [real, imag]");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

SwitchState as_switch(const json& j, const std::string& where) {
    std::string s = j.get<std::string>();
    if (s == "closed") return SwitchState::closed;
    if (s == "open") return SwitchState::open;
    throw ConfigError(where + ": switch state must be \"closed\" or \"open\"");
}

SequenceImpedance as_seq_impedance(const json& j, const std::string& where) {
    SequenceImpedance z;
    z.pos = as_complex(j.at("z1"), where + ".z1");
    z.neg = j.contains("z2") ? as_complex(j.at("z2"), where + ".z2") : z.pos;
    z.zero = j.contains("z0") ? as_complex(j.at("z0"), where + ".z0") : z.pos;
    return z;
}

PhaseId as_phase(const json& j) {
    std::string s = j.get<std::string>();
    if (s == "a" || s == "A") return PhaseId::a;
    if (s == "b" || s == "B") return PhaseId::b;
    if (s == "c" || s == "C") return PhaseId::c;
    throw ScenarioError("fault phase must be a, b or c");
}

FaultSpec as_fault(const json& j) {
    FaultSpec f;
    f.kind = fault_kind_from_string(j.at("kind").get<std::string>());
    f.line_id = j.at("line").get<std::string>();
    f.fraction = j.value("fraction", 0.5);
    f.rf_ohm = j.value("rf_ohm", 0.0);
    if (j.contains("phases"))
        for (const auto& p : j.at("phases")) f.faulted_phases.push_back(as_phase(p));
    return f;
}

void parse_relay_config(const json& j, RelayConfig& cfg) {
    if (j.contains("v_threshold_pct")) cfg.v_threshold_pct = j.at("v_threshold_pct").get<double>();
    if (j.contains("i_threshold_pct")) cfg.i_threshold_pct = j.at("i_threshold_pct").get<double>();
    if (j.contains("presence_ratio")) cfg.presence_ratio = j.at("presence_ratio").get<double>();
    if (j.contains("debounce_samples")) cfg.debounce_samples = j.at("debounce_samples").get<int>();
    if (j.contains("window_cycles")) cfg.window_cycles = j.at("window_cycles").get<double>();
}

Testbed parse_testbed(const json& j) {
    Testbed tb;
    NetworkModel& net = tb.net;
    try {
        net.frequency_hz = j.value("frequency_hz", 50.0);
        if (j.contains("base")) {
            net.base.s_va = j.at("base").value("s_va", 1e6);
            net.base.v_ll = j.at("base").value("v_ll", 415.0);
        }
        for (const auto& b : j.at("buses")) {
            Bus bus;
            bus.id = b.at("id").get<std::string>();
            bus.nominal_v_ll = b.value("nominal_v_ll", net.base.v_ll);
            net.buses.push_back(bus);
        }
        for (const auto& s : j.at("sources")) {
            Source src;
            src.id = s.at("id").get<std::string>();
            src.bus = s.at("bus").get<std::string>();
            std::string kind = s.value("kind", "der");
            if (kind == "grid")
                src.kind = SourceKind::grid;
            else if (kind == "der")
                src.kind = SourceKind::der;
            else
                throw ConfigError("source " + src.id + ": kind must be grid or der");
            src.emf_v = s.value("emf_v", 0.0);
            src.internal_ohm = as_seq_impedance(s.at("internal_ohm"), "source " + src.id);
            if (s.contains("switch")) src.connect_switch = as_switch(s.at("switch"), src.id);
            src.rating_va = s.value("rating_va", 0.0);
            src.zero_path = s.value("zero_path", true);
            net.sources.push_back(src);
        }
        for (const auto& l : j.at("lines")) {
            DistributionLine line;
            line.id = l.at("id").get<std::string>();
            line.from_bus = l.at("from").get<std::string>();
            line.to_bus = l.at("to").get<std::string>();
            line.length_km = l.value("length_km", 1.0);
            line.per_km_ohm = as_seq_impedance(l.at("per_km_ohm"), "line " + line.id);
            line.relay_from = l.value("relay_from", std::string());
            line.relay_to = l.value("relay_to", std::string());
            if (l.contains("switch_from"))
                line.switch_from = as_switch(l.at("switch_from"), line.id + ":from");
            if (l.contains("switch_to"))
                line.switch_to = as_switch(l.at("switch_to"), line.id + ":to");
            net.lines.push_back(line);
        }
        for (const auto& ld : j.value("loads", json::array())) {
            Load load;
            load.id = ld.at("id").get<std::string>();
            load.bus = ld.at("bus").get<std::string>();
            load.p_w = ld.at("p_w").get<double>();
            load.pf = ld.value("pf", 1.0);
            load.grounded = ld.value("grounded", true);
            if (ld.contains("switch")) load.switch_state = as_switch(ld.at("switch"), load.id);
            net.loads.push_back(load);
        }
        if (j.contains("relays")) {
            const auto& r = j.at("relays");
            if (r.contains("defaults")) parse_relay_config(r.at("defaults"), tb.relay_defaults);
            const json settings = r.value("settings", json::object());
            for (const auto& [id, cfg] : settings.items()) {
                RelayRatings rr;
                rr.v_rated_v = cfg.value("v_rated_v", 0.0);
                rr.i_rated_a = cfg.value("i_rated_a", 0.0);
                tb.ratings[id] = rr;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("testbed json: ") + e.what());
    }
    tb.validate();
    return tb;
}

} // namespace

Testbed load_testbed_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("testbed json parse: ") + e.what());
    }
    return parse_testbed(j);
}

Testbed load_testbed_file(const std::string& path) { return load_testbed_json(slurp(path)); }

Scenario load_scenario_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario json parse: ") + e.what());
    }
    Scenario s;
    try {
        s.name = j.value("name", "scenario");
        std::string tb_path = j.at("testbed").get<std::string>();
        std::filesystem::path p(tb_path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        s.testbed = load_testbed_file(p.string());

        std::string mode = j.value("mode", "grid_connected");
        if (mode == "islanded")
            s.islanded = true;
        else if (mode == "grid_connected")
            s.islanded = false;
        else
            throw ScenarioError("mode must be grid_connected or islanded");

        s.duration_s = j.value("duration_s", 0.3);
        s.fs_hz = j.value("fs_hz", 10000.0);

        for (const auto& e : j.value("events", json::array())) {
            ScenarioEvent ev;
            ev.t = e.at("t").get<double>();
            if (e.contains("fault")) {
                ev.kind = ScenarioEvent::Kind::fault;
                ev.fault = as_fault(e.at("fault"));
                ev.fault.t_on = ev.t;
            } else if (e.contains("switch")) {
                ev.kind = ScenarioEvent::Kind::switch_action;
                ev.target_id = e.at("switch").at("id").get<std::string>();
                ev.target_state = as_switch(e.at("switch").at("state"), ev.target_id);
            } else if (e.contains("load")) {
                ev.kind = ScenarioEvent::Kind::load_action;
                ev.target_id = e.at("load").at("id").get<std::string>();
                ev.target_state = as_switch(e.at("load").at("state"), ev.target_id);
            } else {
                throw ScenarioError("event needs one of: fault, switch, load");
            }
            s.events.push_back(ev);
        }

        if (j.contains("relay_overrides")) {
            const auto& o = j.at("relay_overrides");
            if (o.contains("v_threshold_pct"))
                s.overrides.v_threshold_pct = o.at("v_threshold_pct").get<double>();
            if (o.contains("i_threshold_pct"))
                s.overrides.i_threshold_pct = o.at("i_threshold_pct").get<double>();
            if (o.contains("presence_ratio"))
                s.overrides.presence_ratio = o.at("presence_ratio").get<double>();
            if (o.contains("debounce_samples"))
                s.overrides.debounce_samples = o.at("debounce_samples").get<int>();
            if (o.contains("window_cycles"))
                s.overrides.window_cycles = o.at("window_cycles").get<double>();
        }

        if (j.contains("expect")) {
            Expectations ex;
            const auto& e = j.at("expect");
            for (const auto& t : e.value("trips", json::array())) {
                ExpectedTrip et;
                et.relay = t.at("relay").get<std::string>();
                et.code = t.value("code", 0);
                ex.trips.push_back(et);
            }
            ex.exclusive = e.value("exclusive", false);
            for (const auto& r : e.value("no_trips", json::array()))
                ex.no_trips.push_back(r.get<std::string>());
            if (e.contains("max_response_s")) ex.max_response_s = e.at("max_response_s").get<double>();
            s.expect = ex;
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario json: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::filesystem::path p(path);
    return load_scenario_json(slurp(path), p.parent_path().string());
}

void write_thresholds_file(const std::string& path, const CalibrationResult& r) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    json j;
    j["v_threshold_pct"] = r.v_threshold_pct;
    j["i_threshold_pct"] = r.i_threshold_pct;
    j["separation"] = {{"no_fault_i_max_pct", r.no_fault_i_max_pct},
                       {"fault_i_min_pct", r.fault_i_min_pct},
                       {"no_fault_v_floor_pct", r.no_fault_v_floor_pct},
                       {"fault_v_max_pct", r.fault_v_max_pct}};
    f << j.dump(2) << "\n";
}

} // namespace mgsim
