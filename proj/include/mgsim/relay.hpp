#ifndef MGSIM_RELAY_HPP
#define MGSIM_RELAY_HPP

#include <optional>
#include <string>

#include "mgsim/phasor.hpp"
#include "mgsim/waveform.hpp"

namespace mgsim {

struct RelayConfig {
    double v_rated_v = 0.0;        // per-phase RMS
    double i_rated_a = 0.0;
    double v_threshold_pct = -10.0; // trip-eligible when V_er% <= this
    double i_threshold_pct = 50.0;  // and I_er% >= this
    double presence_ratio = 0.1;
    int debounce_samples = 3;
    double window_cycles = 1.0;

    void validate() const; // throws ConfigError
};

struct PhaseFlags {
    bool a = false, b = false, c = false;
    int count() const { return (a ? 1 : 0) + (b ? 1 : 0) + (c ? 1 : 0); }
    bool any() const { return a || b || c; }
};

/// Per-phase error comparison: V_er% = 100·(|V|-rated)/rated must fall at
/// or below the voltage threshold while I_er% rises to or above the
/// current threshold. Both must hold on the same phase.
PhaseFlags detect(const ThreePhase& v_est, const ThreePhase& i_est, const RelayConfig& cfg);

struct Classification {
    int code = 0;       // 1..4
    bool exact = true;  // false when the pattern matched no row and the
                        // nearest code by flagged-phase count was used
};

/// Maps the flagged-phase count and sequence-presence pattern of the
/// current estimate onto identification codes 1..4.
Classification classify(const SequenceSet& i_seq, const PhaseFlags& flags,
                        const RelayConfig& cfg);

enum class RelayStatus { monitoring, picked_up, tripped };

struct RelayState {
    std::string relay_id;
    RelayStatus status = RelayStatus::monitoring;
    std::optional<double> pickup_time;
    std::optional<double> trip_time;
    int fault_code = 0; // 0 = none
    int consecutive = 0;
    PhaseFlags flags_seen; // union of flags across the current pickup run
};

struct TripEvent {
    std::string relay_id;
    double t_trip = 0.0;
    int fault_code = 0;
    double response_time = 0.0; // filled by the runner
    bool exact_classification = true;
};

/// Advances one relay by one sample window. Detection must hold for
/// debounce_samples consecutive samples; the trip fires on the completing
/// sample. A tripped relay never changes again.
std::optional<TripEvent> relay_step(RelayState& state, const PhasorEstimate& est, double t,
                                    const RelayConfig& cfg);

} // namespace mgsim

#endif
