#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "circuitvec/expansion.hpp"
#include "circuitvec/graph.hpp"

namespace circuitvec {

/// Voltage drops at or below this threshold carry no current; the downhill
/// constraint is strict and this guards float noise on near-equal voltages.
inline constexpr double kVoltageDropEpsilon = 1e-12;

/// Interior nodes must satisfy the harmonic equation to this relative
/// residual after a solve.
inline constexpr double kSolveTolerance = 1e-10;

/// Unknown counts above this use the Gauss-Seidel sweep instead of a direct
/// factorization.
inline constexpr std::size_t kDirectSolveLimit = 2000;

enum class SolveMethod {
    kAuto,         ///< direct up to kDirectSolveLimit unknowns, Gauss-Seidel beyond
    kDirect,       ///< sparse LDLT factorization
    kGaussSeidel,  ///< fixpoint sweeps of the harmonic equation
};

/// One downhill edge current: V(tail) > V(head), current > 0. Ids are global;
/// head may be the sink.
struct EdgeCurrent {
    NodeId tail;
    NodeId head;
    double current;
};

/// Solved circuit over an expanded neighborhood plus the sink z.
/// nodes lists the members in expansion order with z appended last;
/// voltages is parallel to nodes with V(source)=1, V(z)=0, all in [0,1].
struct CircuitSolution {
    NodeId source = 0;
    NodeId sink = 0;
    std::vector<NodeId> nodes;
    std::vector<double> voltages;
    std::vector<EdgeCurrent> currents;  // sorted by (tail, head)
    std::size_t isolated_members = 0;
    double max_relative_residual = 0.0;

    std::size_t sink_index() const { return nodes.size() - 1; }
};

/// Inflow and outflow of one circuit node under the downhill orientation.
struct FlowBalance {
    double inflow = 0.0;
    double outflow = 0.0;
};

/// Per-node flow totals, indexed like cs.nodes. Interior nodes conserve
/// current; the source only emits and the sink only absorbs.
inline std::vector<FlowBalance> flow_balance(const CircuitSolution& cs) {
    std::vector<FlowBalance> balance(cs.nodes.size());
    std::vector<std::size_t> local(cs.sink + 1, 0);
    for (std::size_t i = 0; i < cs.nodes.size(); ++i) local[cs.nodes[i]] = i;
    for (const EdgeCurrent& e : cs.currents) {
        balance[local[e.tail]].outflow += e.current;
        balance[local[e.head]].inflow += e.current;
    }
    return balance;
}

namespace detail {

struct CircuitSystem {
    // Local layout: members in expansion order, z implicit at index M.
    std::vector<std::uint32_t> member_of_unknown;      // unknown index -> local member index
    std::vector<std::int32_t> unknown_of_member;       // local member index -> unknown or -1
    std::vector<std::vector<Neighbor>> induced;        // local member -> (local member, C), by global id
    std::vector<double> diagonal;                      // per member: total circuit conductance
    std::vector<double> sink_edge;                     // per member: C(v,z)
};

inline CircuitSystem build_circuit_system(const std::vector<NodeId>& members,
                                          const AugmentedGraph& ag) {
    const Graph& g = ag.base();
    CircuitSystem sys;
    const std::size_t m = members.size();
    std::vector<std::int32_t> local(g.node_count(), -1);
    for (std::size_t i = 0; i < m; ++i) local[members[i]] = static_cast<std::int32_t>(i);

    sys.induced.resize(m);
    sys.diagonal.assign(m, 0.0);
    sys.sink_edge.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        NodeId v = members[i];
        for (const Neighbor& n : g.neighbors(v)) {
            std::int32_t j = local[n.id];
            if (j < 0) continue;  // neighbor outside the expansion
            sys.induced[i].push_back({static_cast<NodeId>(j), n.conductance});
            sys.diagonal[i] += n.conductance;
        }
        if (v != ag.source()) {
            sys.sink_edge[i] = ag.sink_conductance(v);
            sys.diagonal[i] += sys.sink_edge[i];
        }
    }

    sys.unknown_of_member.assign(m, -1);
    for (std::size_t i = 0; i < m; ++i) {
        if (members[i] == ag.source()) continue;
        if (sys.diagonal[i] == 0.0) continue;  // isolated in the circuit
        sys.unknown_of_member[i] = static_cast<std::int32_t>(sys.member_of_unknown.size());
        sys.member_of_unknown.push_back(static_cast<std::uint32_t>(i));
    }
    return sys;
}

/// Sparse LDLT on the interior block of the circuit Laplacian. The system is
/// symmetric positive definite: every unknown row carries its sink edge on
/// the diagonal.
inline std::vector<double> solve_direct(const CircuitSystem& sys, std::size_t source_local) {
    const Eigen::Index k = static_cast<Eigen::Index>(sys.member_of_unknown.size());
    Eigen::SparseMatrix<double> a(k, k);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index row = 0; row < k; ++row) {
        std::uint32_t i = sys.member_of_unknown[static_cast<std::size_t>(row)];
        triplets.emplace_back(row, row, sys.diagonal[i]);
        for (const Neighbor& n : sys.induced[i]) {
            if (n.id == source_local) {
                b[row] += n.conductance;  // V(u) = 1
            } else {
                std::int32_t col = sys.unknown_of_member[n.id];
                if (col >= 0) triplets.emplace_back(row, col, -n.conductance);
                // isolated neighbors sit at V = 0 and the sink contributes 0
            }
        }
    }
    a.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(a);
    if (factor.info() != Eigen::Success)
        throw std::runtime_error("circuit solve: factorization failed");
    Eigen::VectorXd x = factor.solve(b);
    // One refinement pass keeps the interior residual far below tolerance.
    Eigen::VectorXd r = b - a * x;
    x += factor.solve(r);
    return std::vector<double>(x.data(), x.data() + x.size());
}

/// Gauss-Seidel sweeps of the harmonic fixpoint V(s) = sum C(s,v)V(v) / sum
/// C(s,v). Converges on these systems because every unknown row is strictly
/// diagonally dominant through its sink edge.
inline std::vector<double> solve_gauss_seidel(const CircuitSystem& sys,
                                              std::size_t source_local) {
    const std::size_t k = sys.member_of_unknown.size();
    std::vector<double> x(k, 0.0);
    constexpr std::size_t kMaxSweeps = 500000;
    for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double worst = 0.0;
        for (std::size_t row = 0; row < k; ++row) {
            std::uint32_t i = sys.member_of_unknown[row];
            double acc = 0.0;
            for (const Neighbor& n : sys.induced[i]) {
                if (n.id == source_local) {
                    acc += n.conductance;
                } else {
                    std::int32_t col = sys.unknown_of_member[n.id];
                    if (col >= 0) acc += n.conductance * x[static_cast<std::size_t>(col)];
                }
            }
            double updated = acc / sys.diagonal[i];
            double delta = std::abs(updated - x[row]);
            if (delta > worst) worst = delta;
            x[row] = updated;
        }
        if (worst <= kSolveTolerance * 0.01) return x;
    }
    throw std::runtime_error("circuit solve: Gauss-Seidel did not converge");
}

}  // namespace detail

/// Solves the electrical circuit over ne's members: induced base edges among
/// members plus a sink edge (v,z) for every member except the source, with
/// boundary conditions V(source)=1 and V(z)=0. Members with no circuit edge
/// at all are assigned V=0 and counted in isolated_members. Currents are
/// then read off every edge whose voltage drop exceeds kVoltageDropEpsilon.
inline CircuitSolution solve_voltages(const ExpandedNeighborhood& ne, const AugmentedGraph& ag,
                                      SolveMethod method = SolveMethod::kAuto) {
    const std::vector<NodeId>& members = ne.members;
    if (members.empty() || members.front() != ne.source)
        throw std::invalid_argument("solve_voltages: neighborhood must start at its source");

    detail::CircuitSystem sys = detail::build_circuit_system(members, ag);
    std::size_t source_local = 0;

    SolveMethod chosen = method;
    if (chosen == SolveMethod::kAuto)
        chosen = sys.member_of_unknown.size() <= kDirectSolveLimit ? SolveMethod::kDirect
                                                                   : SolveMethod::kGaussSeidel;
    std::vector<double> x = chosen == SolveMethod::kDirect
                                ? detail::solve_direct(sys, source_local)
                                : detail::solve_gauss_seidel(sys, source_local);

    CircuitSolution cs;
    cs.source = ne.source;
    cs.sink = ag.sink_id();
    cs.nodes = members;
    cs.nodes.push_back(cs.sink);
    cs.voltages.assign(cs.nodes.size(), 0.0);
    cs.voltages[0] = 1.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        std::int32_t row = sys.unknown_of_member[i];
        if (row >= 0) cs.voltages[i] = x[static_cast<std::size_t>(row)];
        if (members[i] != ne.source && sys.diagonal[i] == 0.0) ++cs.isolated_members;
    }

    // Interior residual check against the assembled equations.
    double max_rel = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (sys.unknown_of_member[i] < 0) continue;
        double acc = sys.diagonal[i] * cs.voltages[i];
        for (const Neighbor& n : sys.induced[i]) acc -= n.conductance * cs.voltages[n.id];
        double rel = std::abs(acc) / sys.diagonal[i];
        if (rel > max_rel) max_rel = rel;
    }
    cs.max_relative_residual = max_rel;
    if (max_rel > kSolveTolerance)
        throw std::runtime_error("circuit solve: residual above tolerance");

    // The exact solution obeys the maximum principle; clip float noise so the
    // stored voltages honor it verbatim.
    for (double& v : cs.voltages)
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);

    for (std::size_t i = 0; i < members.size(); ++i) {
        for (const Neighbor& n : sys.induced[i]) {
            if (members[n.id] < members[i]) continue;  // visit each edge once
            double drop = cs.voltages[i] - cs.voltages[n.id];
            if (std::abs(drop) <= kVoltageDropEpsilon) continue;
            if (drop > 0.0)
                cs.currents.push_back({members[i], members[n.id], n.conductance * drop});
            else
                cs.currents.push_back({members[n.id], members[i], -n.conductance * drop});
        }
        if (sys.sink_edge[i] > 0.0) {
            double drop = cs.voltages[i];  // V(z) = 0
            if (drop > kVoltageDropEpsilon)
                cs.currents.push_back({members[i], cs.sink, sys.sink_edge[i] * drop});
        }
    }
    std::sort(cs.currents.begin(), cs.currents.end(), [](const EdgeCurrent& a, const EdgeCurrent& b) {
        if (a.tail != b.tail) return a.tail < b.tail;
        return a.head < b.head;
    });
    return cs;
}

}  // namespace circuitvec
