#include "mgsim/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "mgsim/errors.hpp"

namespace mgsim {

namespace {

constexpr double kMinFraction = 1e-6;
constexpr double kGammaFloor = 1e-12;

Complex load_impedance_pu(const Load& load, const PerUnitBase& base) {
    // constant-impedance load at nominal voltage
    double s_va = load.p_w / load.pf;
    double q_var = s_va * std::sqrt(std::max(0.0, 1.0 - load.pf * load.pf));
    Complex s_pu(load.p_w / base.s_va, q_var / base.s_va);
    return 1.0 / std::conj(s_pu);
}

} // namespace

int NetworkModel::bus_index(const std::string& id) const {
    for (size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int NetworkModel::line_index(const std::string& id) const {
    for (size_t i = 0; i < lines.size(); ++i)
        if (lines[i].id == id) return static_cast<int>(i);
    return -1;
}

int NetworkModel::source_index(const std::string& id) const {
    for (size_t i = 0; i < sources.size(); ++i)
        if (sources[i].id == id) return static_cast<int>(i);
    return -1;
}

int NetworkModel::load_index(const std::string& id) const {
    for (size_t i = 0; i < loads.size(); ++i)
        if (loads[i].id == id) return static_cast<int>(i);
    return -1;
}

bool NetworkModel::islanded() const {
    for (const auto& s : sources)
        if (s.kind == SourceKind::grid && s.connect_switch == SwitchState::closed)
            return false;
    return true;
}

void NetworkModel::validate() const {
    std::vector<std::string> problems;
    if (buses.empty()) problems.push_back("buses: empty");
    for (const auto& b : buses)
        if (b.nominal_v_ll <= 0.0)
            problems.push_back("bus " + b.id + ": nominal_v_ll must be > 0");
    std::map<std::string, int> seen;
    for (const auto& b : buses)
        if (++seen[b.id] > 1) problems.push_back("bus " + b.id + ": duplicate id");

    for (const auto& l : lines) {
        if (l.length_km <= 0.0) problems.push_back("line " + l.id + ": length must be > 0");
        if (bus_index(l.from_bus) < 0)
            problems.push_back("line " + l.id + ": unknown from bus " + l.from_bus);
        if (bus_index(l.to_bus) < 0)
            problems.push_back("line " + l.id + ": unknown to bus " + l.to_bus);
        if (l.is_protected() && (l.relay_from.empty() || l.relay_to.empty()))
            problems.push_back("line " + l.id + ": protected line needs a relay at each end");
    }
    for (const auto& s : sources) {
        if (bus_index(s.bus) < 0)
            problems.push_back("source " + s.id + ": unknown bus " + s.bus);
        if (std::abs(s.internal_ohm.pos) == 0.0)
            problems.push_back("source " + s.id + ": zero internal impedance");
        if (s.emf_v < 0.0)
            problems.push_back("source " + s.id + ": negative emf");
    }
    for (const auto& l : loads) {
        if (bus_index(l.bus) < 0) problems.push_back("load " + l.id + ": unknown bus " + l.bus);
        if (l.p_w < 0.0) problems.push_back("load " + l.id + ": negative power");
        if (l.pf <= 0.0 || l.pf > 1.0) problems.push_back("load " + l.id + ": pf out of (0,1]");
    }
    if (base.s_va <= 0.0 || base.v_ll <= 0.0) problems.push_back("base: s_va and v_ll must be > 0");
    if (frequency_hz <= 0.0) problems.push_back("frequency_hz must be > 0");

    if (!problems.empty()) {
        std::ostringstream os;
        os << "invalid network config:";
        for (const auto& p : problems) os << "\n  - " << p;
        throw ConfigError(os.str());
    }
}

SequenceImpedance line_total_impedance(const DistributionLine& line) {
    return line.per_km_ohm.scaled(line.length_km);
}

NetworkModel apply_switch_action(const NetworkModel& net, const std::string& switch_id,
                                 SwitchState state) {
    NetworkModel out = net;
    int si = out.source_index(switch_id);
    if (si >= 0) {
        out.sources[si].connect_switch = state;
        return out;
    }
    int li = out.load_index(switch_id);
    if (li >= 0) {
        out.loads[li].switch_state = state;
        return out;
    }
    auto colon = switch_id.rfind(':');
    if (colon != std::string::npos) {
        int line = out.line_index(switch_id.substr(0, colon));
        std::string end = switch_id.substr(colon + 1);
        if (line >= 0 && (end == "from" || end == "to")) {
            if (end == "from")
                out.lines[line].switch_from = state;
            else
                out.lines[line].switch_to = state;
            return out;
        }
    }
    throw UnknownSwitch(switch_id);
}

NetworkModel isolate(const NetworkModel& net, const std::string& relay_id) {
    for (const auto& l : net.lines) {
        if (l.relay_from == relay_id)
            return apply_switch_action(net, l.id + ":from", SwitchState::open);
        if (l.relay_to == relay_id)
            return apply_switch_action(net, l.id + ":to", SwitchState::open);
    }
    throw UnknownSwitch("relay " + relay_id);
}

namespace detail {

NodalContext::NodalContext(const NetworkModel& net, int split_line, double fraction)
    : net_(&net), split_line_(split_line), fraction_(fraction) {
    if (split_line_ >= 0)
        fraction_ = std::clamp(fraction_, kMinFraction, 1.0 - kMinFraction);

    const int nb = static_cast<int>(net.buses.size());
    const int total_vertices = nb + (split_line_ >= 0 ? 1 : 0);
    const int fault_vertex = nb;

    // union-find over buses (+ fault vertex) across closed branches
    std::vector<int> parent(total_vertices);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };

    struct RawBranch {
        int v1, v2;
        SequenceImpedance z_pu;
    };
    std::vector<RawBranch> raw;
    const double zb = net.base.z_ohm();
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const auto& l = net.lines[li];
        int bf = net.bus_index(l.from_bus);
        int bt = net.bus_index(l.to_bus);
        SequenceImpedance z_total = line_total_impedance(l).scaled(1.0 / zb);
        if (static_cast<int>(li) == split_line_) {
            if (l.switch_from == SwitchState::closed)
                raw.push_back({bf, fault_vertex, z_total.scaled(fraction_)});
            if (l.switch_to == SwitchState::closed)
                raw.push_back({bt, fault_vertex, z_total.scaled(1.0 - fraction_)});
        } else if (l.fully_closed()) {
            raw.push_back({bf, bt, z_total});
        }
    }
    for (const auto& b : raw) unite(b.v1, b.v2);

    // a component is energized when it holds a connected source
    std::vector<bool> root_energized(total_vertices, false);
    for (const auto& s : net.sources)
        if (s.connect_switch == SwitchState::closed)
            root_energized[find(net.bus_index(s.bus))] = true;

    node_of_bus_.assign(nb, -1);
    std::map<int, int> island_of_root;
    auto island_id = [&](int root) {
        if (!island_of_root.count(root))
            island_of_root[root] = static_cast<int>(island_of_root.size());
        return island_of_root[root];
    };
    island_of_node_.clear();
    for (int b = 0; b < nb; ++b) {
        int root = find(b);
        if (!root_energized[root]) continue;
        node_of_bus_[b] = n_nodes_++;
        island_of_node_.push_back(island_id(root));
    }
    if (split_line_ >= 0) {
        int root = find(fault_vertex);
        if (root_energized[root]) {
            fault_node_ = n_nodes_++;
            island_of_node_.push_back(island_id(root));
        }
    }
    island_energized_.assign(island_of_root.size(), true);

    // keep only branches inside the energized node space
    for (const auto& b : raw) {
        auto to_node = [&](int v) { return v == fault_vertex ? fault_node_ : node_of_bus_[v]; };
        int n1 = to_node(b.v1), n2 = to_node(b.v2);
        if (n1 >= 0 && n2 >= 0) branches_.push_back({n1, n2, b.z_pu});
    }
    for (size_t si = 0; si < net.sources.size(); ++si) {
        const auto& s = net.sources[si];
        if (s.connect_switch != SwitchState::closed) continue;
        int n = node_of_bus_[net.bus_index(s.bus)];
        if (n < 0) continue;
        shunts_.push_back({n, s.internal_ohm.scaled(1.0 / zb), s.zero_path, static_cast<int>(si)});
    }
    for (const auto& l : net.loads) {
        if (l.switch_state != SwitchState::closed || l.p_w <= 0.0) continue;
        int n = node_of_bus_[net.bus_index(l.bus)];
        if (n < 0) continue;
        Complex z = load_impedance_pu(l, net.base);
        shunts_.push_back({n, {z, z, z}, l.grounded, -1});
    }
}

bool NodalContext::fault_energized() const { return fault_node_ >= 0; }

bool NodalContext::island_has_shunt(Sequence s, int island) const {
    for (const auto& sh : shunts_) {
        if (island_of_node_[sh.node] != island) continue;
        if (s == Sequence::zero && !sh.has_zero) continue;
        return true;
    }
    return false;
}

bool NodalContext::sequence_available(Sequence s, int node) const {
    if (node < 0) return false;
    return island_has_shunt(s, island_of_node_[node]);
}

std::vector<Complex> NodalContext::solve_linear(Sequence s,
                                                const std::vector<Complex>& injections) const {
    std::vector<Complex> v(n_nodes_, Complex(0.0, 0.0));
    if (n_nodes_ == 0) return v;

    int n_islands = static_cast<int>(island_energized_.size());
    for (int isl = 0; isl < n_islands; ++isl) {
        std::vector<int> local; // node -> local index
        std::vector<int> members;
        local.assign(n_nodes_, -1);
        for (int n = 0; n < n_nodes_; ++n)
            if (island_of_node_[n] == isl) {
                local[n] = static_cast<int>(members.size());
                members.push_back(n);
            }
        if (members.empty()) continue;

        bool has_injection = false;
        for (int n : members)
            if (std::abs(injections[n]) > 0.0) has_injection = true;
        if (!has_injection) continue; // homogeneous => zero

        if (!island_has_shunt(s, isl)) continue; // no reference path, no current

        const int m = static_cast<int>(members.size());
        Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(m, m);
        for (const auto& b : branches_) {
            if (island_of_node_[b.n1] != isl) continue;
            Complex y = 1.0 / b.z_pu.get(s);
            int i = local[b.n1], j = local[b.n2];
            Y(i, i) += y;
            Y(j, j) += y;
            Y(i, j) -= y;
            Y(j, i) -= y;
        }
        for (const auto& sh : shunts_) {
            if (island_of_node_[sh.node] != isl) continue;
            if (s == Sequence::zero && !sh.has_zero) continue;
            Y(local[sh.node], local[sh.node]) += 1.0 / sh.z_pu.get(s);
        }
        Eigen::VectorXcd rhs(m);
        for (int k = 0; k < m; ++k) rhs(k) = injections[members[k]];

        Eigen::FullPivLU<Eigen::MatrixXcd> lu(Y);
        if (!lu.isInvertible())
            throw SolveFailed("singular sequence network");
        Eigen::VectorXcd x = lu.solve(rhs);
        for (int k = 0; k < m; ++k) v[members[k]] = x(k);
    }
    return v;
}

std::vector<Complex> NodalContext::solve_prefault(const Dispatch& dispatch) const {
    std::vector<Complex> inj(n_nodes_, Complex(0.0, 0.0));
    for (const auto& sh : shunts_) {
        if (sh.source_index < 0) continue;
        Complex e = dispatch.emf_pu[sh.source_index];
        inj[sh.node] += e / sh.z_pu.pos;
    }
    return solve_linear(Sequence::pos, inj);
}

std::vector<Complex> NodalContext::solve_injection(Sequence s, int node, Complex amps_pu) const {
    std::vector<Complex> inj(n_nodes_, Complex(0.0, 0.0));
    if (node < 0) return std::vector<Complex>(n_nodes_, Complex(0.0, 0.0));
    inj[node] = amps_pu;
    return solve_linear(s, inj);
}

Complex NodalContext::half_impedance(Sequence s, LineEnd end) const {
    const auto& l = net_->lines[split_line_];
    SequenceImpedance z = line_total_impedance(l).scaled(1.0 / net_->base.z_ohm());
    double f = end == LineEnd::from_end ? fraction_ : 1.0 - fraction_;
    return z.get(s) * f;
}

bool NodalContext::half_present(LineEnd end) const {
    if (split_line_ < 0 || fault_node_ < 0) return false;
    const auto& l = net_->lines[split_line_];
    if (end == LineEnd::from_end)
        return l.switch_from == SwitchState::closed &&
               node_of_bus_[net_->bus_index(l.from_bus)] >= 0;
    return l.switch_to == SwitchState::closed && node_of_bus_[net_->bus_index(l.to_bus)] >= 0;
}

SteadyState NodalContext::to_state(const std::vector<Complex>& v_pos,
                                   const std::vector<Complex>& v_neg,
                                   const std::vector<Complex>& v_zero) const {
    const auto& net = *net_;
    SteadyState st;
    st.bus_v.assign(net.buses.size(), SequenceSet{});
    st.line_i.assign(net.lines.size(), {SequenceSet{}, SequenceSet{}});
    st.bus_energized.assign(net.buses.size(), false);

    auto at = [](const std::vector<Complex>& v, int n) {
        return n >= 0 && n < static_cast<int>(v.size()) ? v[n] : Complex(0.0, 0.0);
    };
    for (size_t b = 0; b < net.buses.size(); ++b) {
        int n = node_of_bus_[b];
        st.bus_energized[b] = n >= 0;
        st.bus_v[b] = {at(v_pos, n), at(v_neg, n), at(v_zero, n)};
    }
    const double zb = net.base.z_ohm();
    for (size_t li = 0; li < net.lines.size(); ++li) {
        const auto& l = net.lines[li];
        int nf = node_of_bus_[net.bus_index(l.from_bus)];
        int nt = node_of_bus_[net.bus_index(l.to_bus)];
        auto branch_i = [&](int n1, int n2, const SequenceImpedance& z) {
            SequenceSet i;
            i.pos = (at(v_pos, n1) - at(v_pos, n2)) / z.pos;
            i.neg = (at(v_neg, n1) - at(v_neg, n2)) / z.neg;
            i.zero = (at(v_zero, n1) - at(v_zero, n2)) / z.zero;
            return i;
        };
        SequenceImpedance z_total = line_total_impedance(l).scaled(1.0 / zb);
        if (static_cast<int>(li) == split_line_ && fault_node_ >= 0) {
            if (half_present(LineEnd::from_end))
                st.line_i[li][0] = branch_i(nf, fault_node_, z_total.scaled(fraction_));
            if (half_present(LineEnd::to_end))
                st.line_i[li][1] = branch_i(nt, fault_node_, z_total.scaled(1.0 - fraction_));
        } else if (l.fully_closed() && nf >= 0 && nt >= 0) {
            st.line_i[li][0] = branch_i(nf, nt, z_total);
            st.line_i[li][1] = branch_i(nt, nf, z_total);
        }
    }
    return st;
}

} // namespace detail

Dispatch dispatch_sources(const NetworkModel& net) {
    detail::NodalContext ctx(net, -1, 0.5);

    Dispatch d;
    d.emf_pu.assign(net.sources.size(), Complex(1.0, 0.0));
    const double vb = net.base.v_phase();
    for (size_t si = 0; si < net.sources.size(); ++si)
        if (net.sources[si].emf_v > 0.0)
            d.emf_pu[si] = Complex(net.sources[si].emf_v / vb, 0.0);

    // nodes pinned at nominal by at least one connected auto-dispatch source
    std::vector<bool> pinned(ctx.n_nodes_, false);
    for (const auto& sh : ctx.shunts_) {
        if (sh.source_index < 0) continue;
        if (net.sources[sh.source_index].emf_v == 0.0) pinned[sh.node] = true;
    }

    const int n = ctx.n_nodes_;
    if (n == 0) return d;

    // Y without auto-source shunts; explicit sources enter as Norton pairs
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(n);
    for (const auto& b : ctx.branches_) {
        Complex y = 1.0 / b.z_pu.pos;
        Y(b.n1, b.n1) += y;
        Y(b.n2, b.n2) += y;
        Y(b.n1, b.n2) -= y;
        Y(b.n2, b.n1) -= y;
    }
    for (const auto& sh : ctx.shunts_) {
        bool is_auto =
            sh.source_index >= 0 && net.sources[sh.source_index].emf_v == 0.0;
        if (is_auto) continue;
        Complex y = 1.0 / sh.z_pu.pos;
        Y(sh.node, sh.node) += y;
        if (sh.source_index >= 0) inj(sh.node) += d.emf_pu[sh.source_index] * y;
    }

    // solve the free nodes with pinned nodes held at 1∠0
    std::vector<int> free_ix(n, -1);
    int nf = 0;
    for (int i = 0; i < n; ++i)
        if (!pinned[i]) free_ix[i] = nf++;
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    if (nf > 0) {
        Eigen::MatrixXcd Yff = Eigen::MatrixXcd::Zero(nf, nf);
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(nf);
        for (int i = 0; i < n; ++i) {
            if (pinned[i]) continue;
            rhs(free_ix[i]) = inj(i);
            for (int j = 0; j < n; ++j) {
                if (pinned[j])
                    rhs(free_ix[i]) -= Y(i, j) * Complex(1.0, 0.0);
                else
                    Yff(free_ix[i], free_ix[j]) = Y(i, j);
            }
        }
        // islands with no pinned node and no shunt at all cannot occur here:
        // energized islands always carry a source shunt or a pin
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(Yff);
        if (!lu.isInvertible()) throw SolveFailed("dispatch: singular network");
        Eigen::VectorXcd vf = lu.solve(rhs);
        for (int i = 0; i < n; ++i)
            if (!pinned[i]) v(i) = vf(free_ix[i]);
    }

    // back out each pinned node's required injection and split it across
    // that node's auto sources in proportion to their admittance
    for (int i = 0; i < n; ++i) {
        if (!pinned[i]) continue;
        Complex needed = -inj(i);
        for (int j = 0; j < n; ++j) needed += Y(i, j) * v(j);
        Complex y_sum(0.0, 0.0);
        for (const auto& sh : ctx.shunts_) {
            if (sh.node != i || sh.source_index < 0) continue;
            if (net.sources[sh.source_index].emf_v != 0.0) continue;
            y_sum += 1.0 / sh.z_pu.pos;
        }
        for (const auto& sh : ctx.shunts_) {
            if (sh.node != i || sh.source_index < 0) continue;
            if (net.sources[sh.source_index].emf_v != 0.0) continue;
            Complex y = 1.0 / sh.z_pu.pos;
            Complex share = needed * (y / y_sum);
            d.emf_pu[sh.source_index] = v(i) + share * sh.z_pu.pos;
        }
    }
    return d;
}

SteadyState solve_steady(const NetworkModel& net, const Dispatch& dispatch) {
    detail::NodalContext ctx(net, -1, 0.5);
    auto v_pos = ctx.solve_prefault(dispatch);
    std::vector<Complex> zeros(v_pos.size(), Complex(0.0, 0.0));
    return ctx.to_state(v_pos, zeros, zeros);
}

TheveninPair reduce_to_thevenin(const NetworkModel& net, const Dispatch& dispatch,
                                const std::string& line_id, double fraction) {
    int li = net.line_index(line_id);
    if (li < 0) throw ConfigError("reduce_to_thevenin: unknown line " + line_id);

    detail::NodalContext ctx(net, li, fraction);
    TheveninPair pair;
    const double zb = net.base.z_ohm();
    pair.z_base_ohm = zb;
    const auto& l = net.lines[li];
    SequenceImpedance z_total = line_total_impedance(l).scaled(1.0 / zb);
    double f = std::clamp(fraction, kMinFraction, 1.0 - kMinFraction);
    pair.zd1_pu = z_total.scaled(f);
    pair.zd2_pu = z_total.scaled(1.0 - f);

    if (!ctx.fault_energized()) {
        pair.energized = false;
        pair.vfp_prefault = Phasor(Complex(0.0, 0.0));
        return pair;
    }

    auto v_pre = ctx.solve_prefault(dispatch);
    const int nF = ctx.fault_node();
    pair.vfp_prefault = Phasor(v_pre[nF]);

    int bf = net.bus_index(l.from_bus);
    int bt = net.bus_index(l.to_bus);
    int n1 = ctx.node_of_bus(bf);
    int n2 = ctx.node_of_bus(bt);
    if (ctx.half_present(LineEnd::from_end)) {
        pair.v1_pre = v_pre[n1];
        pair.i1_pre = (v_pre[n1] - v_pre[nF]) / pair.zd1_pu.pos;
    }
    if (ctx.half_present(LineEnd::to_end)) {
        pair.v2_pre = v_pre[n2];
        pair.i2_pre = (v_pre[n2] - v_pre[nF]) / pair.zd2_pu.pos;
    }

    for (Sequence s : {Sequence::pos, Sequence::neg, Sequence::zero}) {
        if (!ctx.sequence_available(s, nF)) continue;
        auto v = ctx.solve_injection(s, nF, Complex(1.0, 0.0));
        Complex zf = v[nF];
        auto side = [&](LineEnd end, int bus_node) -> std::optional<Complex> {
            if (!ctx.half_present(end)) return std::nullopt;
            Complex gamma = (v[nF] - v[bus_node]) / ctx.half_impedance(s, end);
            if (std::abs(gamma) < kGammaFloor) return std::nullopt;
            return zf / gamma;
        };
        auto z1 = side(LineEnd::from_end, n1);
        auto z2 = side(LineEnd::to_end, n2);
        auto assign = [&](SequenceBranch& b, std::optional<Complex> z) {
            switch (s) {
            case Sequence::pos: b.pos = z; break;
            case Sequence::neg: b.neg = z; break;
            case Sequence::zero: b.zero = z; break;
            }
        };
        assign(pair.z1, z1);
        assign(pair.z2, z2);
    }
    return pair;
}

} // namespace mgsim
