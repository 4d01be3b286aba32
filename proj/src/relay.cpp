#include "mgsim/relay.hpp"

#include <cmath>

#include "mgsim/errors.hpp"

namespace mgsim {

void RelayConfig::validate() const {
    std::string bad;
    if (v_rated_v <= 0.0) bad += " v_rated_v<=0";
    if (i_rated_a <= 0.0) bad += " i_rated_a<=0";
    if (v_threshold_pct >= 0.0) bad += " v_threshold_pct>=0";
    if (i_threshold_pct <= 0.0) bad += " i_threshold_pct<=0";
    if (debounce_samples < 1) bad += " debounce_samples<1";
    if (window_cycles <= 0.0) bad += " window_cycles<=0";
    if (presence_ratio <= 0.0) bad += " presence_ratio<=0";
    if (!bad.empty()) throw ConfigError("relay config:" + bad);
}

PhaseFlags detect(const ThreePhase& v_est, const ThreePhase& i_est, const RelayConfig& cfg) {
    auto phase_flag = [&](Complex v, Complex i) {
        double v_er_pct = 100.0 * (std::abs(v) - cfg.v_rated_v) / cfg.v_rated_v;
        double i_er_pct = 100.0 * (std::abs(i) - cfg.i_rated_a) / cfg.i_rated_a;
        return v_er_pct <= cfg.v_threshold_pct && i_er_pct >= cfg.i_threshold_pct;
    };
    PhaseFlags f;
    f.a = phase_flag(v_est.a, i_est.a);
    f.b = phase_flag(v_est.b, i_est.b);
    f.c = phase_flag(v_est.c, i_est.c);
    return f;
}

Classification classify(const SequenceSet& i_seq, const PhaseFlags& flags,
                        const RelayConfig& cfg) {
    const double floor = cfg.presence_ratio * cfg.i_rated_a;
    // The zero channel of the sliding estimate stays clean while a window
    // straddles the fault step; the negative channel carries a conjugate
    // image of the positive component there, so it only confirms.
    const bool zero_present = std::abs(i_seq.zero) >= floor;
    const bool neg_present = std::abs(i_seq.neg) >= floor;
    const int n = flags.count();

    Classification c;
    if (n == 0) {
        c.code = 0;
        c.exact = false;
        return c;
    }
    if (zero_present) {
        c.code = n <= 1 ? 1 : 3;
        c.exact = (c.code == 1 && neg_present) || (c.code == 3 && n == 2);
    } else if (n >= 3) {
        c.code = 4;
    } else {
        c.code = 2;
        c.exact = n == 2 && neg_present;
    }
    return c;
}

std::optional<TripEvent> relay_step(RelayState& state, const PhasorEstimate& est, double t,
                                    const RelayConfig& cfg) {
    if (state.status == RelayStatus::tripped) return std::nullopt;

    PhaseFlags flags = detect(est.v, est.i, cfg);
    if (!flags.any()) {
        state.status = RelayStatus::monitoring;
        state.pickup_time.reset();
        state.consecutive = 0;
        state.flags_seen = PhaseFlags{};
        return std::nullopt;
    }

    if (state.consecutive == 0) state.pickup_time = t;
    state.status = RelayStatus::picked_up;
    ++state.consecutive;
    // phases reveal themselves at different samples as the window fills;
    // classification therefore counts every phase seen during this pickup
    // run plus any phase whose current rides at the same order as the
    // largest one
    state.flags_seen.a = state.flags_seen.a || flags.a;
    state.flags_seen.b = state.flags_seen.b || flags.b;
    state.flags_seen.c = state.flags_seen.c || flags.c;
    if (state.consecutive < cfg.debounce_samples) return std::nullopt;

    PhaseFlags involved = state.flags_seen;
    {
        double ia = std::abs(est.i.a), ib = std::abs(est.i.b), ic = std::abs(est.i.c);
        double top = std::max({ia, ib, ic});
        double bar = std::max(0.08 * top, cfg.presence_ratio * cfg.i_rated_a);
        involved.a = involved.a || ia >= bar;
        involved.b = involved.b || ib >= bar;
        involved.c = involved.c || ic >= bar;
    }
    Classification cls = classify(fortescue_decompose(est.i), involved, cfg);
    state.status = RelayStatus::tripped;
    state.trip_time = t;
    state.fault_code = cls.code;

    TripEvent ev;
    ev.relay_id = state.relay_id;
    ev.t_trip = t;
    ev.fault_code = cls.code;
    ev.exact_classification = cls.exact;
    return ev;
}

} // namespace mgsim
