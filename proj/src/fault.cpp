#include "mgsim/fault.hpp"

#include <algorithm>
#include <cmath>

#include "mgsim/errors.hpp"

namespace mgsim {

namespace {

std::optional<Complex> parallel(std::optional<Complex> a, std::optional<Complex> b) {
    if (a && b) return (*a) * (*b) / (*a + *b);
    if (a) return a;
    return b;
}

// Sequence scaling that moves a solution computed for the reference phase
// assignment (a for LG, b-c for LL/LLG) onto phases rotated by k positions:
// positive unchanged, negative gains alpha^{-2k}, zero gains alpha^{-k}.
struct Rotation {
    Complex neg_factor{1.0, 0.0};
    Complex zero_factor{1.0, 0.0};

    SequenceSet apply(const SequenceSet& s) const {
        return {s.pos, s.neg * neg_factor, s.zero * zero_factor};
    }
};

Complex alpha_pow(int k) {
    k = ((k % 3) + 3) % 3;
    if (k == 0) return Complex(1.0, 0.0);
    return k == 1 ? alpha() : alpha2();
}

Rotation rotation_for(const FaultSpec& spec) {
    auto phases = spec.phases_or_default();
    int k = 0;
    if (spec.kind == FaultKind::LG) {
        k = static_cast<int>(phases[0]);
    } else if (spec.kind == FaultKind::LL || spec.kind == FaultKind::LLG) {
        std::vector<int> p{static_cast<int>(phases[0]), static_cast<int>(phases[1])};
        std::sort(p.begin(), p.end());
        if (p[0] == 1 && p[1] == 2) k = 0;        // b-c
        else if (p[0] == 0 && p[1] == 2) k = 1;   // c-a
        else k = 2;                               // a-b
    }
    Rotation r;
    r.neg_factor = alpha_pow(-2 * k);
    r.zero_factor = alpha_pow(-k);
    return r;
}

} // namespace

const char* to_string(FaultKind k) {
    switch (k) {
    case FaultKind::LG: return "L-G";
    case FaultKind::LL: return "L-L";
    case FaultKind::LLG: return "L-L-G";
    default: return "L-L-L-G";
    }
}

FaultKind fault_kind_from_string(const std::string& s) {
    std::string u;
    for (char c : s)
        if (c != '-') u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u == "LG") return FaultKind::LG;
    if (u == "LL") return FaultKind::LL;
    if (u == "LLG") return FaultKind::LLG;
    if (u == "LLLG" || u == "LLL") return FaultKind::LLLG;
    throw ScenarioError("unknown fault kind: " + s);
}

int fault_code(FaultKind k) {
    switch (k) {
    case FaultKind::LG: return 1;
    case FaultKind::LL: return 2;
    case FaultKind::LLG: return 3;
    default: return 4;
    }
}

std::vector<PhaseId> FaultSpec::phases_or_default() const {
    if (!faulted_phases.empty()) return faulted_phases;
    switch (kind) {
    case FaultKind::LG: return {PhaseId::a};
    case FaultKind::LL:
    case FaultKind::LLG: return {PhaseId::b, PhaseId::c};
    default: return {PhaseId::a, PhaseId::b, PhaseId::c};
    }
}

void FaultSpec::validate_phases() const {
    auto phases = phases_or_default();
    std::vector<int> p;
    for (auto ph : phases) p.push_back(static_cast<int>(ph));
    std::sort(p.begin(), p.end());
    if (std::adjacent_find(p.begin(), p.end()) != p.end())
        throw ScenarioError("fault phases: duplicate phase");
    size_t want = kind == FaultKind::LG ? 1 : kind == FaultKind::LLLG ? 3 : 2;
    if (p.size() != want)
        throw ScenarioError("fault phases: wrong count for kind");
    if (rf_ohm < 0.0) throw ScenarioError("fault resistance must be >= 0");
    if (fraction < 0.0 || fraction > 1.0) throw ScenarioError("fault fraction outside [0,1]");
}

FaultSolution solve_internal_fault(const TheveninPair& th, const FaultSpec& spec) {
    spec.validate_phases();

    FaultSolution sol;
    sol.v1_pre = th.v1_pre;
    sol.v2_pre = th.v2_pre;
    sol.i1_pre = th.i1_pre;
    sol.i2_pre = th.i2_pre;

    auto zp = parallel(th.z1.pos, th.z2.pos);
    if (!th.energized || !zp) {
        sol.energized = false;
        return sol;
    }

    const Complex vf = th.vfp_prefault.value();
    const double rf = spec.rf_ohm / th.z_base_ohm;
    auto zn = parallel(th.z1.neg, th.z2.neg);
    auto z0 = parallel(th.z1.zero, th.z2.zero);

    // fault currents, reference phase assignment, load convention V/Z
    Complex ip(0.0, 0.0), in(0.0, 0.0), i0(0.0, 0.0);
    auto guard = [](Complex denom) {
        if (std::abs(denom) == 0.0)
            throw ZeroImpedanceFault("fault loop impedance is exactly zero");
        return denom;
    };
    switch (spec.kind) {
    case FaultKind::LG: {
        if (zn && z0) {
            Complex denom = guard(*zp + *zn + *z0 + 3.0 * rf);
            ip = vf / denom;
            in = ip;
            i0 = ip;
        } // no ground path: no fault current flows
        break;
    }
    case FaultKind::LL: {
        if (zn) {
            Complex denom = guard(*zp + *zn + rf);
            ip = vf / denom;
            in = -ip;
        }
        break;
    }
    case FaultKind::LLG: {
        if (zn && z0) {
            Complex zg = *z0 + 3.0 * rf;
            Complex denom = guard(*zp + (*zn * zg) / (*zn + zg));
            ip = vf / denom;
            Complex vmid = vf - ip * *zp;
            in = -vmid / *zn;
            i0 = -vmid / zg;
        } else if (zn) {
            // no ground return: degenerates to a bolted phase-to-phase loop
            Complex denom = guard(*zp + *zn);
            ip = vf / denom;
            in = -ip;
        }
        break;
    }
    case FaultKind::LLLG: {
        Complex denom = guard(*zp + rf);
        ip = vf / denom;
        break;
    }
    }

    // split each sequence current over the two sides
    auto divide = [&](Sequence s, Complex i_total, Complex& i1, Complex& i2) {
        auto z1 = th.z1.get(s);
        auto z2 = th.z2.get(s);
        if (z1 && z2) {
            i1 = i_total * *z2 / (*z1 + *z2);
            i2 = i_total * *z1 / (*z1 + *z2);
        } else if (z1) {
            i1 = i_total;
            i2 = Complex(0.0, 0.0);
        } else if (z2) {
            i1 = Complex(0.0, 0.0);
            i2 = i_total;
        } else {
            i1 = i2 = Complex(0.0, 0.0);
        }
    };
    SequenceSet itb{ip, in, i0};
    SequenceSet i1tb, i2tb;
    divide(Sequence::pos, itb.pos, i1tb.pos, i2tb.pos);
    divide(Sequence::neg, itb.neg, i1tb.neg, i2tb.neg);
    divide(Sequence::zero, itb.zero, i1tb.zero, i2tb.zero);

    // fault-component bus voltages: -I·Zs with Zs the side impedance behind
    // the line half
    auto bus_component = [&](Sequence s, const SequenceBranch& z, const SequenceImpedance& zd,
                             Complex i_tb) {
        auto zs = z.get(s);
        if (!zs) return Complex(0.0, 0.0);
        return -i_tb * (*zs - zd.get(s));
    };
    SequenceSet v1{bus_component(Sequence::pos, th.z1, th.zd1_pu, i1tb.pos),
                   bus_component(Sequence::neg, th.z1, th.zd1_pu, i1tb.neg),
                   bus_component(Sequence::zero, th.z1, th.zd1_pu, i1tb.zero)};
    SequenceSet v2{bus_component(Sequence::pos, th.z2, th.zd2_pu, i2tb.pos),
                   bus_component(Sequence::neg, th.z2, th.zd2_pu, i2tb.neg),
                   bus_component(Sequence::zero, th.z2, th.zd2_pu, i2tb.zero)};

    // injected-at-the-fault sign for the stored currents
    Rotation rot = rotation_for(spec);
    sol.i_fault = rot.apply(itb * Complex(-1.0, 0.0));
    sol.i_side1 = rot.apply(i1tb * Complex(-1.0, 0.0));
    sol.i_side2 = rot.apply(i2tb * Complex(-1.0, 0.0));
    sol.v_bus1 = rot.apply(v1);
    sol.v_bus2 = rot.apply(v2);
    return sol;
}

SequenceSet solve_external_fault(const TheveninPair& th, const SequenceSet& v1,
                                 const SequenceSet& v2) {
    SequenceImpedance zd = th.zd1_pu + th.zd2_pu;
    if (std::abs(zd.pos) == 0.0)
        throw ZeroLineImpedance("through-current over a zero-impedance line");
    SequenceSet i;
    i.pos = (v1.pos - v2.pos) / zd.pos;
    i.neg = (v1.neg - v2.neg) / zd.neg;
    i.zero = std::abs(zd.zero) == 0.0 ? Complex(0.0, 0.0) : (v1.zero - v2.zero) / zd.zero;
    return i;
}

PhaseQuantities phase_quantities(const FaultSolution& sol, int side) {
    const SequenceSet& dv = side == 1 ? sol.v_bus1 : sol.v_bus2;
    const SequenceSet& di = side == 1 ? sol.i_side1 : sol.i_side2;
    Complex v_pre = side == 1 ? sol.v1_pre : sol.v2_pre;
    Complex i_pre = side == 1 ? sol.i1_pre : sol.i2_pre;

    SequenceSet v_total{v_pre + dv.pos, dv.neg, dv.zero};
    // stored side currents are fault-node injections; the relay-facing
    // current toward the fault point is their negative
    SequenceSet i_total{i_pre - di.pos, -di.neg, -di.zero};

    PhaseQuantities q;
    q.voltage = fortescue_compose(v_total);
    q.current = fortescue_compose(i_total);
    return q;
}

FaultContext solve_network_fault(const NetworkModel& net, const Dispatch& dispatch,
                                 const FaultSpec& spec) {
    int li = net.line_index(spec.line_id);
    if (li < 0) throw ScenarioError("fault on unknown line " + spec.line_id);

    FaultContext ctx;
    ctx.pair = reduce_to_thevenin(net, dispatch, spec.line_id, spec.fraction);
    ctx.solution = solve_internal_fault(ctx.pair, spec);

    detail::NodalContext nodal(net, li, spec.fraction);
    auto v_pre = nodal.solve_prefault(dispatch);
    std::vector<Complex> zeros(v_pre.size(), Complex(0.0, 0.0));
    if (!ctx.solution.energized || !nodal.fault_energized()) {
        ctx.during = nodal.to_state(v_pre, zeros, zeros);
        return ctx;
    }

    // the stored fault current is already the nodal injection at the fault
    const int nf = nodal.fault_node();
    auto dpos = nodal.solve_injection(Sequence::pos, nf, ctx.solution.i_fault.pos);
    auto dneg = nodal.solve_injection(Sequence::neg, nf, ctx.solution.i_fault.neg);
    auto dzero = nodal.solve_injection(Sequence::zero, nf, ctx.solution.i_fault.zero);
    std::vector<Complex> v_pos(v_pre.size());
    for (size_t i = 0; i < v_pre.size(); ++i) v_pos[i] = v_pre[i] + dpos[i];
    ctx.during = nodal.to_state(v_pos, dneg, dzero);
    return ctx;
}

} // namespace mgsim
