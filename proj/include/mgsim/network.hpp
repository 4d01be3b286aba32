#ifndef MGSIM_NETWORK_HPP
#define MGSIM_NETWORK_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/phasor.hpp"

namespace mgsim {

enum class Sequence { pos, neg, zero };

/// Positive/negative/zero impedance triple for one element.
struct SequenceImpedance {
    Complex pos{0.0, 0.0};
    Complex neg{0.0, 0.0};
    Complex zero{0.0, 0.0};

    Complex get(Sequence s) const {
        switch (s) {
        case Sequence::pos: return pos;
        case Sequence::neg: return neg;
        default: return zero;
        }
    }
    SequenceImpedance scaled(double k) const { return {pos * k, neg * k, zero * k}; }
    SequenceImpedance operator+(const SequenceImpedance& o) const {
        return {pos + o.pos, neg + o.neg, zero + o.zero};
    }
};

enum class SwitchState { closed, open };
enum class SourceKind { grid, der };
enum class LineEnd { from_end, to_end };

struct Bus {
    std::string id;
    double nominal_v_ll = 0.0; // volts, line-to-line RMS
};

struct DistributionLine {
    std::string id;
    std::string from_bus;
    std::string to_bus;
    double length_km = 1.0;
    SequenceImpedance per_km_ohm;
    std::string relay_from; // empty when this end carries no relay
    std::string relay_to;
    SwitchState switch_from = SwitchState::closed;
    SwitchState switch_to = SwitchState::closed;

    bool is_protected() const { return !relay_from.empty() || !relay_to.empty(); }
    bool fully_closed() const {
        return switch_from == SwitchState::closed && switch_to == SwitchState::closed;
    }
};

struct Source {
    std::string id;
    std::string bus;
    SourceKind kind = SourceKind::der;
    double emf_v = 0.0; // per-phase RMS; 0 = hold terminal at nominal pre-fault
    SequenceImpedance internal_ohm;
    SwitchState connect_switch = SwitchState::closed;
    double rating_va = 0.0;
    bool zero_path = true; // false = no zero-sequence return through this source
};

struct Load {
    std::string id;
    std::string bus;
    double p_w = 0.0;
    double pf = 1.0; // lagging
    bool grounded = true;
    SwitchState switch_state = SwitchState::closed;
};

struct PerUnitBase {
    double s_va = 1e6;
    double v_ll = 415.0;

    double z_ohm() const { return v_ll * v_ll / s_va; }
    double i_a() const { return s_va / (std::sqrt(3.0) * v_ll); }
    double v_phase() const { return v_ll / std::sqrt(3.0); }
};

struct NetworkModel {
    std::vector<Bus> buses;
    std::vector<DistributionLine> lines;
    std::vector<Source> sources;
    std::vector<Load> loads;
    double frequency_hz = 50.0;
    PerUnitBase base;

    int bus_index(const std::string& id) const;
    int line_index(const std::string& id) const;
    int source_index(const std::string& id) const;
    int load_index(const std::string& id) const;

    /// True when no grid source is connected.
    bool islanded() const;

    /// Throws ConfigError listing every problem found.
    void validate() const;
};

/// Series impedance of the whole line (ohms).
SequenceImpedance line_total_impedance(const DistributionLine& line);

/// Returns a copy of the model with one switch changed. Switch ids:
/// source id, load id, or "<line>:from" / "<line>:to".
NetworkModel apply_switch_action(const NetworkModel& net, const std::string& switch_id,
                                 SwitchState state);

/// Opens the line-end switch owned by the given relay.
NetworkModel isolate(const NetworkModel& net, const std::string& relay_id);

/// Per-source positive-sequence EMF (pu), frozen for one run.
struct Dispatch {
    std::vector<Complex> emf_pu; // indexed like NetworkModel::sources
};

/// EMFs chosen so every connected source holds its terminal at nominal in
/// the initial steady state; explicit emf_v settings are kept as-is.
Dispatch dispatch_sources(const NetworkModel& net);

/// One steady electrical state, all values per-unit.
struct SteadyState {
    std::vector<SequenceSet> bus_v;                    // indexed like buses
    std::vector<std::array<SequenceSet, 2>> line_i;    // [line][0=from,1=to], into the line
    std::vector<bool> bus_energized;
};

SteadyState solve_steady(const NetworkModel& net, const Dispatch& dispatch);

/// One side of the two-source equivalent. A missing entry means that
/// sequence has no path on that side (open branch, not a large number).
struct SequenceBranch {
    std::optional<Complex> pos;
    std::optional<Complex> neg;
    std::optional<Complex> zero;

    std::optional<Complex> get(Sequence s) const {
        switch (s) {
        case Sequence::pos: return pos;
        case Sequence::neg: return neg;
        default: return zero;
        }
    }
};

/// Two-source equivalent seen from a fault point, plus the pre-fault
/// operating context needed to superpose observable quantities.
struct TheveninPair {
    SequenceBranch z1; // side entered through the from-end half of the line
    SequenceBranch z2;
    Phasor vfp_prefault;     // positive sequence, pu
    bool energized = true;
    double z_base_ohm = 1.0; // converts fault resistance in ohms to pu

    SequenceImpedance zd1_pu; // line halves (pu)
    SequenceImpedance zd2_pu;

    // pre-fault end-bus voltages and line currents (toward the fault point)
    Complex v1_pre{1.0, 0.0};
    Complex v2_pre{1.0, 0.0};
    Complex i1_pre{0.0, 0.0};
    Complex i2_pre{0.0, 0.0};
};

/// Collapses everything behind each end of the (closed) line at the given
/// split fraction into one impedance per sequence per side.
TheveninPair reduce_to_thevenin(const NetworkModel& net, const Dispatch& dispatch,
                                const std::string& line_id, double fraction);

namespace detail {

/// Per-sequence nodal assembly over the energized part of the network,
/// optionally with an extra node splitting one line. Shared by the steady
/// solver, the Thevenin reduction and the fault push-back.
class NodalContext {
public:
    NodalContext(const NetworkModel& net, int split_line, double fraction);

    const NetworkModel& net() const { return *net_; }
    bool has_fault_node() const { return split_line_ >= 0; }
    bool fault_energized() const;
    int node_of_bus(int bus) const { return node_of_bus_[bus]; }
    int fault_node() const { return fault_node_; }

    /// Positive-sequence solve with source EMF injections; returns node
    /// voltages (pu). De-energized buses are absent from the node space.
    std::vector<Complex> solve_prefault(const Dispatch& dispatch) const;

    /// Sequence solve for a single current injection at a node (EMFs dead).
    /// Empty result when that sequence has no ground path in the injected
    /// node's island.
    std::vector<Complex> solve_injection(Sequence s, int node, Complex amps_pu) const;

    /// True when the sequence network of the given node's island is solvable
    /// (has at least one shunt to the reference).
    bool sequence_available(Sequence s, int node) const;

    SteadyState to_state(const std::vector<Complex>& v_pos,
                         const std::vector<Complex>& v_neg,
                         const std::vector<Complex>& v_zero) const;

    Complex half_impedance(Sequence s, LineEnd end) const; // split line halves, pu
    bool half_present(LineEnd end) const;

private:
    const NetworkModel* net_;
    int split_line_ = -1;
    double fraction_ = 0.5;
    int fault_node_ = -1;
    int n_nodes_ = 0;
    std::vector<int> node_of_bus_;    // -1 when de-energized
    std::vector<int> island_of_node_;
    std::vector<bool> island_energized_;

    struct Branch {
        int n1, n2;                  // node indices
        SequenceImpedance z_pu;
    };
    struct Shunt {
        int node;
        SequenceImpedance z_pu;
        bool has_zero;               // grounded path in zero sequence
        int source_index;            // -1 for loads
    };
    std::vector<Branch> branches_;
    std::vector<Shunt> shunts_;

    friend Dispatch mgsim::dispatch_sources(const NetworkModel&);
    std::vector<Complex> solve_linear(Sequence s, const std::vector<Complex>& injections) const;
    bool island_has_shunt(Sequence s, int island) const;
};

} // namespace detail

} // namespace mgsim

#endif
