#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "circuitvec/graph.hpp"
#include "circuitvec/parallel.hpp"

namespace circuitvec {

/// Distance-selected neighborhood of one source node. members are listed in
/// expansion order (source first, distance 0); distances are non-decreasing
/// along the list and the sink never appears.
struct ExpandedNeighborhood {
    NodeId source = 0;
    std::vector<NodeId> members;
    std::vector<double> distances;
    std::size_t size_target = 0;
};

/// Length of the directed hop s -> t in the augmented view:
/// log10(deg(s)^2 / C(s,t)^2), clamped below at 0 so the expansion metric
/// stays non-negative on heavy edges. The squared degree in the numerator is
/// what pushes high-degree hops away from every source.
inline double edge_length(const AugmentedGraph& ag, NodeId s, NodeId t) {
    auto c = ag.base().conductance(s, t);
    if (!c) throw std::domain_error("edge_length: (s,t) is not an edge");
    double deg = weighted_degree(ag, s);
    double len = std::log10((deg * deg) / (*c * *c));
    return len < 0.0 ? 0.0 : len;
}

/// Best-first expansion around ag.source(): repeatedly pops the pending node
/// with the smallest accumulated hop-length distance (ties to the smaller
/// id), appends it, and relaxes its base neighbors. Stops at e members or
/// when the reachable component is exhausted.
inline ExpandedNeighborhood expand(const AugmentedGraph& ag, std::size_t e) {
    if (e < 1) throw std::invalid_argument("expand: e must be >= 1");
    const Graph& g = ag.base();
    const NodeId source = ag.source();

    ExpandedNeighborhood out;
    out.source = source;
    out.size_target = e;

    constexpr double kUnreached = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.node_count(), kUnreached);
    std::vector<char> expanded(g.node_count(), 0);

    using Entry = std::pair<double, NodeId>;  // (distance, id), min-heap
    auto greater = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> pending(greater);

    dist[source] = 0.0;
    pending.push({0.0, source});
    while (!pending.empty() && out.members.size() < e) {
        auto [d, v] = pending.top();
        pending.pop();
        if (expanded[v]) continue;  // stale entry
        expanded[v] = 1;
        out.members.push_back(v);
        out.distances.push_back(d);
        for (const Neighbor& n : g.neighbors(v)) {
            if (expanded[n.id]) continue;
            double candidate = d + edge_length(ag, v, n.id);
            if (candidate < dist[n.id]) {
                dist[n.id] = candidate;
                pending.push({candidate, n.id});
            }
        }
    }
    return out;
}

/// One expansion per node, each with its own source-excluding augmentation.
/// Safe to fan out across workers: every source is independent and results
/// land in id-indexed slots, so the output is invariant to thread count.
inline std::vector<ExpandedNeighborhood> expand_all(const Graph& g, double alpha, std::size_t e,
                                                    unsigned threads = 1) {
    std::vector<ExpandedNeighborhood> out(g.node_count());
    parallel_for(g.node_count(), threads, [&](std::size_t u) {
        AugmentedGraph ag(g, static_cast<NodeId>(u), alpha);
        out[u] = expand(ag, e);
    });
    return out;
}

}  // namespace circuitvec
