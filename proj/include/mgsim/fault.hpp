#ifndef MGSIM_FAULT_HPP
#define MGSIM_FAULT_HPP

#include <string>
#include <vector>

#include "mgsim/network.hpp"
#include "mgsim/phasor.hpp"

namespace mgsim {

enum class FaultKind { LG, LL, LLG, LLLG };
enum class PhaseId { a = 0, b = 1, c = 2 };

const char* to_string(FaultKind k);
FaultKind fault_kind_from_string(const std::string& s);

/// Identification codes used throughout reports: LG=1, LL=2, LLG=3, LLLG=4.
int fault_code(FaultKind k);

struct FaultSpec {
    FaultKind kind = FaultKind::LG;
    std::string line_id;
    double fraction = 0.5;
    double rf_ohm = 0.0;
    double t_on = 0.0;
    std::vector<PhaseId> faulted_phases; // empty = kind default

    std::vector<PhaseId> phases_or_default() const;
    /// Throws ScenarioError when the phase set does not fit the kind.
    void validate_phases() const;
};

/// Sequence-domain solution at the fault point. Currents carry the
/// injected-at-the-fault sign (they come out with negative real part for a
/// sagging network); bus voltage entries are fault components to superpose
/// on the pre-fault state.
struct FaultSolution {
    SequenceSet i_fault;
    SequenceSet i_side1;
    SequenceSet i_side2;
    SequenceSet v_bus1;
    SequenceSet v_bus2;
    bool energized = true;

    // pre-fault context copied from the TheveninPair (pu)
    Complex v1_pre{1.0, 0.0};
    Complex v2_pre{1.0, 0.0};
    Complex i1_pre{0.0, 0.0};
    Complex i2_pre{0.0, 0.0};
};

/// Solves the kind-specific interconnection of the sequence networks over
/// the two-source equivalent. Never produces NaN: a de-energized pair
/// yields an all-zero flagged solution.
FaultSolution solve_internal_fault(const TheveninPair& th, const FaultSpec& spec);

/// Through-current of a healthy line from its end-bus sequence voltages:
/// I = (V1 - V2)/(Zd1 + Zd2) per sequence.
SequenceSet solve_external_fault(const TheveninPair& th_between, const SequenceSet& v1,
                                 const SequenceSet& v2);

/// Observable three-phase voltage and current at one side of the faulted
/// line (pre-fault superposed; current oriented toward the fault point).
struct PhaseQuantities {
    ThreePhase voltage;
    ThreePhase current;
};
PhaseQuantities phase_quantities(const FaultSolution& sol, int side);

/// Full-network during-fault state: the two-source solution at the fault
/// point plus nodal voltages/currents everywhere (totals, pu).
struct FaultContext {
    TheveninPair pair;
    FaultSolution solution;
    SteadyState during;
};

FaultContext solve_network_fault(const NetworkModel& net, const Dispatch& dispatch,
                                 const FaultSpec& spec);

} // namespace mgsim

#endif
