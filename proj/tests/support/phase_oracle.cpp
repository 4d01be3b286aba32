#include "phase_oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgsim::oracle {

namespace {

using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

Mat3 compose_matrix() {
    Mat3 A;
    Complex a = alpha(), a2 = alpha2();
    // columns: positive, negative, zero
    A << Complex(1, 0), Complex(1, 0), Complex(1, 0),
         a2,            a,             Complex(1, 0),
         a,             a2,            Complex(1, 0);
    return A;
}

Mat3 phase_admittance(const SequenceImpedance& z, bool zero_path) {
    Mat3 A = compose_matrix();
    Mat3 D = Mat3::Zero();
    D(0, 0) = 1.0 / z.pos;
    D(1, 1) = 1.0 / z.neg;
    D(2, 2) = zero_path ? 1.0 / z.zero : Complex(0.0, 0.0);
    return A * D * A.inverse();
}

Vec3 balanced_emf(Complex e) {
    Vec3 v;
    v << e, alpha2() * e, alpha() * e;
    return v;
}

} // namespace

Solution solve(const Network& net, const Fault& fault) {
    const int nv = 3 * net.n_nodes;

    // extra unknowns for fault branch currents and the common node
    std::vector<PhaseId> phases;
    int extra = 0;
    bool common_node = false;
    if (fault.active) {
        FaultSpec helper;
        helper.kind = fault.kind;
        helper.faulted_phases = fault.phases;
        phases = helper.phases_or_default();
        switch (fault.kind) {
        case FaultKind::LG: extra = 1; break;                    // I_f
        case FaultKind::LL: extra = 1; break;                    // loop current
        case FaultKind::LLG: extra = 4; common_node = true; break; // I_p, I_q, I_g, v_m
        case FaultKind::LLLG: extra = 3; break;                  // one current per phase
        }
    }
    const int n = nv + extra;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);

    auto ix = [&](int node, int ph) { return 3 * node + ph; };

    auto stamp_block = [&](int n1, int n2, const Mat3& y) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                A(ix(n1, r), ix(n1, c)) += y(r, c);
                if (n2 >= 0) {
                    A(ix(n2, r), ix(n2, c)) += y(r, c);
                    A(ix(n1, r), ix(n2, c)) -= y(r, c);
                    A(ix(n2, r), ix(n1, c)) -= y(r, c);
                }
            }
    };

    for (const auto& b : net.branches) stamp_block(b.n1, b.n2, phase_admittance(b.z_pu, true));
    for (const auto& s : net.shunts) stamp_block(s.node, -1, phase_admittance(s.z_pu, s.zero_path));
    for (const auto& s : net.sources) {
        Mat3 y = phase_admittance(s.z_pu, s.zero_path);
        stamp_block(s.node, -1, y);
        Vec3 inj = y * balanced_emf(s.emf_pu);
        for (int r = 0; r < 3; ++r) rhs(ix(s.node, r)) += inj(r);
    }

    if (fault.active) {
        const int f = fault.node;
        const double rf = fault.rf_pu;
        if (fault.kind == FaultKind::LG) {
            int p = static_cast<int>(phases[0]);
            int iu = nv; // fault current leaving phase p into ground
            A(ix(f, p), iu) += 1.0;
            A(iu, ix(f, p)) = 1.0;
            A(iu, iu) = -rf;
        } else if (fault.kind == FaultKind::LL) {
            int p = static_cast<int>(phases[0]);
            int q = static_cast<int>(phases[1]);
            int iu = nv; // current p -> q
            A(ix(f, p), iu) += 1.0;
            A(ix(f, q), iu) -= 1.0;
            A(iu, ix(f, p)) = 1.0;
            A(iu, ix(f, q)) = -1.0;
            A(iu, iu) = -rf;
        } else if (fault.kind == FaultKind::LLG) {
            int p = static_cast<int>(phases[0]);
            int q = static_cast<int>(phases[1]);
            int ip = nv, iq = nv + 1, ig = nv + 2, vm = nv + 3;
            // phase-to-common ties are ideal
            A(ix(f, p), ip) += 1.0;
            A(ip, ix(f, p)) = 1.0;
            A(ip, vm) = -1.0;
            A(ix(f, q), iq) += 1.0;
            A(iq, ix(f, q)) = 1.0;
            A(iq, vm) = -1.0;
            // common node KCL and its ground connection through rf
            A(ig, ip) = 1.0;
            A(ig, iq) = 1.0;
            A(ig, ig) = -1.0;
            A(vm, vm) = 1.0;
            A(vm, ig) = -rf;
        } else { // LLLG: each phase through rf to ground
            for (int k = 0; k < 3; ++k) {
                int p = static_cast<int>(phases[k]);
                int iu = nv + k;
                A(ix(f, p), iu) += 1.0;
                A(iu, ix(f, p)) = 1.0;
                A(iu, iu) = -rf;
            }
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) throw std::runtime_error("oracle: singular system");
    Eigen::VectorXcd x = lu.solve(rhs);

    Solution sol;
    sol.v.resize(net.n_nodes);
    for (int nd = 0; nd < net.n_nodes; ++nd)
        for (int p = 0; p < 3; ++p) sol.v[nd][p] = x(ix(nd, p));

    sol.branch_i.resize(net.branches.size());
    for (size_t bi = 0; bi < net.branches.size(); ++bi) {
        const auto& b = net.branches[bi];
        Mat3 y = phase_admittance(b.z_pu, true);
        Vec3 v1, v2;
        for (int p = 0; p < 3; ++p) {
            v1(p) = sol.v[b.n1][p];
            v2(p) = sol.v[b.n2][p];
        }
        Vec3 i12 = y * (v1 - v2);
        for (int p = 0; p < 3; ++p) {
            sol.branch_i[bi][0][p] = i12(p);
            sol.branch_i[bi][1][p] = -i12(p);
        }
    }

    sol.fault_i = {Complex(0, 0), Complex(0, 0), Complex(0, 0)};
    if (fault.active) {
        if (fault.kind == FaultKind::LG) {
            sol.fault_i[static_cast<int>(phases[0])] = x(nv);
        } else if (fault.kind == FaultKind::LL) {
            sol.fault_i[static_cast<int>(phases[0])] = x(nv);
            sol.fault_i[static_cast<int>(phases[1])] = -x(nv);
        } else if (fault.kind == FaultKind::LLG) {
            sol.fault_i[static_cast<int>(phases[0])] = x(nv);
            sol.fault_i[static_cast<int>(phases[1])] = x(nv + 1);
        } else {
            for (int k = 0; k < 3; ++k) sol.fault_i[static_cast<int>(phases[k])] = x(nv + k);
        }
    }
    return sol;
}

Expanded expand(const NetworkModel& model, const Dispatch& dispatch, const FaultSpec& spec) {
    Expanded out;
    Network& net = out.net;
    net.n_nodes = static_cast<int>(model.buses.size());
    const double zb = model.base.z_ohm();

    int split = spec.line_id.empty() ? -1 : model.line_index(spec.line_id);
    if (split >= 0) {
        out.fault_node = net.n_nodes++;
    }

    for (size_t li = 0; li < model.lines.size(); ++li) {
        const auto& l = model.lines[li];
        SequenceImpedance z = line_total_impedance(l).scaled(1.0 / zb);
        int bf = model.bus_index(l.from_bus);
        int bt = model.bus_index(l.to_bus);
        if (static_cast<int>(li) == split) {
            double f = std::clamp(spec.fraction, 1e-6, 1.0 - 1e-6);
            if (l.switch_from == SwitchState::closed) {
                out.split_branch_from = static_cast<int>(net.branches.size());
                net.branches.push_back({bf, out.fault_node, z.scaled(f)});
            }
            if (l.switch_to == SwitchState::closed) {
                out.split_branch_to = static_cast<int>(net.branches.size());
                net.branches.push_back({bt, out.fault_node, z.scaled(1.0 - f)});
            }
        } else if (l.fully_closed()) {
            net.branches.push_back({bf, bt, z});
        }
    }
    for (size_t si = 0; si < model.sources.size(); ++si) {
        const auto& s = model.sources[si];
        if (s.connect_switch != SwitchState::closed) continue;
        SourceElem e;
        e.node = model.bus_index(s.bus);
        e.z_pu = s.internal_ohm.scaled(1.0 / zb);
        e.emf_pu = dispatch.emf_pu[si];
        e.zero_path = s.zero_path;
        net.sources.push_back(e);
    }
    for (const auto& l : model.loads) {
        if (l.switch_state != SwitchState::closed || l.p_w <= 0.0) continue;
        double s_va = l.p_w / l.pf;
        double q = s_va * std::sqrt(std::max(0.0, 1.0 - l.pf * l.pf));
        Complex s_pu(l.p_w / model.base.s_va, q / model.base.s_va);
        Complex z = 1.0 / std::conj(s_pu);
        net.shunts.push_back({model.bus_index(l.bus), {z, z, z}, l.grounded});
    }
    return out;
}

} // namespace mgsim::oracle
