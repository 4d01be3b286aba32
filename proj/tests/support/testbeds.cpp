#include "testbeds.hpp"

#include "mgsim/json_io.hpp"

namespace mgsim::testsupport {

std::string config_path(const std::string& name) {
    return std::string(MGSIM_SOURCE_DIR) + "/configs/" + name;
}

Testbed default_testbed() { return load_testbed_file(config_path("testbed.json")); }

NetworkModel two_bus(const TwoBusSpec& spec) {
    NetworkModel net;
    net.buses = {{"B1", 415.0}, {"B2", 415.0}};

    DistributionLine line;
    line.id = "L1";
    line.from_bus = "B1";
    line.to_bus = "B2";
    line.length_km = spec.length_km;
    line.per_km_ohm = spec.line_per_km_ohm;
    line.relay_from = "RA";
    line.relay_to = "RB";
    net.lines.push_back(line);

    Source s1;
    s1.id = "S1";
    s1.bus = "B1";
    s1.kind = SourceKind::grid;
    s1.emf_v = spec.emf1_v;
    s1.internal_ohm = spec.zs1_ohm;
    net.sources.push_back(s1);

    Source s2;
    s2.id = "S2";
    s2.bus = "B2";
    s2.kind = SourceKind::der;
    s2.emf_v = spec.emf2_v;
    s2.internal_ohm = spec.zs2_ohm;
    s2.connect_switch = spec.source2_connected ? SwitchState::closed : SwitchState::open;
    net.sources.push_back(s2);

    auto add_load = [&](const std::string& id, const std::string& bus, double p) {
        if (p <= 0.0) return;
        Load l;
        l.id = id;
        l.bus = bus;
        l.p_w = p;
        l.pf = 0.9;
        net.loads.push_back(l);
    };
    add_load("LD1", "B1", spec.load1_w);
    add_load("LD2", "B2", spec.load2_w);
    return net;
}

TwoBusSpec random_two_bus(std::mt19937& rng) {
    std::uniform_real_distribution<double> r(0.002, 0.06);
    std::uniform_real_distribution<double> x(0.01, 0.30);
    std::uniform_real_distribution<double> emf(0.94, 1.04);
    std::uniform_real_distribution<double> load(0.0, 20000.0);
    std::bernoulli_distribution with_load(0.5);

    auto seq = [&]() {
        SequenceImpedance z;
        z.pos = {r(rng), x(rng)};
        z.neg = {r(rng), x(rng)};
        z.zero = {r(rng) * 2.0, x(rng) * 2.5};
        return z;
    };
    TwoBusSpec s;
    s.zs1_ohm = seq();
    s.zs2_ohm = seq();
    s.line_per_km_ohm = seq();
    s.emf1_v = 239.6 * emf(rng);
    s.emf2_v = 239.6 * emf(rng);
    s.load1_w = with_load(rng) ? load(rng) : 0.0;
    s.load2_w = with_load(rng) ? load(rng) : 0.0;
    return s;
}

Scenario fault_case(const Testbed& tb, FaultKind kind, const std::string& line, double rf_ohm,
                    bool islanded, double t_on, double duration) {
    Scenario s;
    s.name = std::string(to_string(kind)) + "@" + line;
    s.testbed = tb;
    s.islanded = islanded;
    s.duration_s = duration;
    s.fs_hz = 10000.0;
    ScenarioEvent e;
    e.t = t_on;
    e.kind = ScenarioEvent::Kind::fault;
    e.fault.kind = kind;
    e.fault.line_id = line;
    e.fault.fraction = 0.5;
    e.fault.rf_ohm = rf_ohm;
    e.fault.t_on = t_on;
    s.events.push_back(e);
    return s;
}

} // namespace mgsim::testsupport
