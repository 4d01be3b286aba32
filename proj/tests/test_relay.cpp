#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mgsim/errors.hpp"
#include "mgsim/relay.hpp"

using namespace mgsim;

namespace {

RelayConfig config() {
    RelayConfig c;
    c.v_rated_v = 240.0;
    c.i_rated_a = 100.0;
    c.v_threshold_pct = -10.0;
    c.i_threshold_pct = 50.0;
    c.presence_ratio = 0.1;
    c.debounce_samples = 3;
    return c;
}

ThreePhase balanced_mag(double m) { return balanced_three_phase(Complex(m, 0.0)); }

PhasorEstimate healthy() { return {balanced_mag(240.0), balanced_mag(80.0)}; }

} // namespace

TEST_CASE("relay config invariants") {
    RelayConfig c = config();
    CHECK_NOTHROW(c.validate());
    c.i_threshold_pct = -5.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config();
    c.v_threshold_pct = 5.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = config();
    c.debounce_samples = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("detection is a per-phase conjunction") {
    RelayConfig cfg = config();
    SUBCASE("nominal operation never flags") {
        PhaseFlags f = detect(balanced_mag(240.0), balanced_mag(100.0), cfg);
        CHECK_FALSE(f.any());
    }
    SUBCASE("current alone never trips") {
        // heavy load pickup: +15% current, -2% voltage against (-10, +50)
        PhaseFlags f = detect(balanced_mag(240.0 * 0.98), balanced_mag(115.0), cfg);
        CHECK_FALSE(f.any());
    }
    SUBCASE("sag alone never trips") {
        PhaseFlags f = detect(balanced_mag(240.0 * 0.4), balanced_mag(100.0), cfg);
        CHECK_FALSE(f.any());
    }
    SUBCASE("a bolted-fault signature flags") {
        // -60% voltage, +400% current
        PhaseFlags f = detect(balanced_mag(240.0 * 0.4), balanced_mag(500.0), cfg);
        CHECK(f.a);
        CHECK(f.b);
        CHECK(f.c);
    }
    SUBCASE("a swell never satisfies the voltage side") {
        PhaseFlags f = detect(balanced_mag(240.0 * 1.2), balanced_mag(500.0), cfg);
        CHECK_FALSE(f.any());
    }
    SUBCASE("only the disturbed phase flags") {
        ThreePhase v = balanced_mag(240.0);
        ThreePhase i = balanced_mag(80.0);
        v.a *= 0.5;
        i.a *= 10.0;
        PhaseFlags f = detect(v, i, cfg);
        CHECK(f.a);
        CHECK_FALSE(f.b);
        CHECK_FALSE(f.c);
    }
}

TEST_CASE("classification decision table") {
    RelayConfig cfg = config();
    const double big = 50.0; // above presence floor of 10 A

    SUBCASE("one phase with ground presence is code 1") {
        SequenceSet seq{Complex(big, 0), Complex(big, 0), Complex(big, 0)};
        Classification c = classify(seq, {true, false, false}, cfg);
        CHECK(c.code == 1);
        CHECK(c.exact);
    }
    SUBCASE("two phases without ground is code 2") {
        SequenceSet seq{Complex(big, 0), Complex(big, 0), Complex(0.1, 0)};
        Classification c = classify(seq, {false, true, true}, cfg);
        CHECK(c.code == 2);
        CHECK(c.exact);
    }
    SUBCASE("two phases with ground is code 3") {
        SequenceSet seq{Complex(big, 0), Complex(big, 0), Complex(big, 0)};
        Classification c = classify(seq, {false, true, true}, cfg);
        CHECK(c.code == 3);
        CHECK(c.exact);
    }
    SUBCASE("three phases is code 4") {
        SequenceSet seq{Complex(big, 0), Complex(0.0, 0), Complex(0.0, 0)};
        Classification c = classify(seq, {true, true, true}, cfg);
        CHECK(c.code == 4);
        CHECK(c.exact);
    }
    SUBCASE("unmatched pattern still yields the nearest code") {
        // one flagged phase but no ground current: the sequence pattern
        // says ungrounded loop, so the nearest row is 2, marked inexact
        SequenceSet seq{Complex(big, 0), Complex(big, 0), Complex(0.0, 0)};
        Classification c = classify(seq, {true, false, false}, cfg);
        CHECK(c.code == 2);
        CHECK_FALSE(c.exact);

        // ground current with three flagged phases lands on 3, inexact
        SequenceSet grounded{Complex(big, 0), Complex(big, 0), Complex(big, 0)};
        Classification g = classify(grounded, {true, true, true}, cfg);
        CHECK(g.code == 3);
        CHECK_FALSE(g.exact);
    }
    SUBCASE("permutation invariance") {
        SequenceSet seq{Complex(big, 0), Complex(big, 0), Complex(big, 0)};
        int base = classify(seq, {true, false, false}, cfg).code;
        CHECK(classify(seq, {false, true, false}, cfg).code == base);
        CHECK(classify(seq, {false, false, true}, cfg).code == base);

        SequenceSet ll{Complex(big, 0), Complex(big, 0), Complex(0.0, 0)};
        int two = classify(ll, {false, true, true}, cfg).code;
        CHECK(classify(ll, {true, false, true}, cfg).code == two);
        CHECK(classify(ll, {true, true, false}, cfg).code == two);
    }
}

TEST_CASE("debounced state machine") {
    RelayConfig cfg = config();
    RelayState st;
    st.relay_id = "R2";
    PhasorEstimate fault{balanced_mag(100.0), balanced_mag(400.0)};
    const double dt = 1e-4;

    SUBCASE("trip after exactly debounce_samples consecutive detections") {
        CHECK_FALSE(relay_step(st, fault, 0.0, cfg).has_value());
        CHECK(st.status == RelayStatus::picked_up);
        CHECK(st.pickup_time == 0.0);
        CHECK_FALSE(relay_step(st, fault, dt, cfg).has_value());
        auto ev = relay_step(st, fault, 2 * dt, cfg);
        REQUIRE(ev.has_value());
        CHECK(ev->relay_id == "R2");
        CHECK(ev->t_trip == 2 * dt);
        CHECK(st.status == RelayStatus::tripped);
        CHECK(st.fault_code == 4);

        // tripped is terminal
        CHECK_FALSE(relay_step(st, healthy(), 3 * dt, cfg).has_value());
        CHECK(st.status == RelayStatus::tripped);
    }

    SUBCASE("dropout resets the count") {
        relay_step(st, fault, 0.0, cfg);
        relay_step(st, fault, dt, cfg);
        CHECK_FALSE(relay_step(st, healthy(), 2 * dt, cfg).has_value());
        CHECK(st.status == RelayStatus::monitoring);
        CHECK_FALSE(st.pickup_time.has_value());
        // needs the full run again
        relay_step(st, fault, 3 * dt, cfg);
        relay_step(st, fault, 4 * dt, cfg);
        auto ev = relay_step(st, fault, 5 * dt, cfg);
        CHECK(ev.has_value());
    }

    SUBCASE("longer debounce never trips earlier") {
        for (int shorter = 1; shorter <= 6; ++shorter) {
            RelayConfig a = cfg;
            a.debounce_samples = shorter;
            RelayConfig b = cfg;
            b.debounce_samples = shorter + 1;
            RelayState sa{.relay_id = "A"}, sb{.relay_id = "B"};
            double trip_a = -1.0, trip_b = -1.0;
            for (int k = 0; k < 20; ++k) {
                if (auto e = relay_step(sa, fault, k * dt, a); e && trip_a < 0) trip_a = e->t_trip;
                if (auto e = relay_step(sb, fault, k * dt, b); e && trip_b < 0) trip_b = e->t_trip;
            }
            CHECK(trip_a >= 0.0);
            CHECK(trip_b >= 0.0);
            CHECK(trip_b >= trip_a);
        }
    }
}
