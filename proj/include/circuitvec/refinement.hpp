#pragma once

#include <cstddef>
#include <unordered_set>
#include <vector>

#include "circuitvec/circuit.hpp"
#include "circuitvec/parallel.hpp"
#include "circuitvec/paths.hpp"

namespace circuitvec {

/// Current-selected neighborhood: nodes collected from end-to-end
/// source-to-sink paths taken in decreasing total current. members keeps
/// first-inclusion order (source first, sink excluded) and is always a
/// subset of the expansion it came from.
struct RefinedNeighborhood {
    NodeId source = 0;
    std::vector<NodeId> members;
    std::vector<CurrentPath> paths;  // every consumed path, non-increasing total
    std::size_t size_target = 0;
    bool exhausted = false;  // path supply ran out before reaching size_target
};

/// Pulls paths from the circuit solution of ne best-first and appends their
/// unseen nodes until at least r members are collected, the enumerator runs
/// dry, or k_max paths have been consumed. An undersized result is valid and
/// carries the exhausted flag.
inline RefinedNeighborhood refine(const ExpandedNeighborhood& ne, const AugmentedGraph& ag,
                                  std::size_t r, std::size_t k_max) {
    if (r < 1) throw std::invalid_argument("refine: r must be >= 1");
    RefinedNeighborhood out;
    out.source = ne.source;
    out.size_target = r;

    CircuitSolution cs = solve_voltages(ne, ag);
    PathEnumerator gen(cs);
    std::unordered_set<NodeId> seen;
    while (out.members.size() < r && out.paths.size() < k_max) {
        auto path = gen.next();
        if (!path) {
            out.exhausted = true;
            break;
        }
        for (NodeId v : path->nodes) {
            if (v == cs.sink) continue;
            if (seen.insert(v).second) out.members.push_back(v);
        }
        out.paths.push_back(std::move(*path));
    }
    if (out.members.size() < r && !out.exhausted && out.paths.size() >= k_max)
        out.exhausted = true;
    return out;
}

/// Refines every expansion, one independent circuit per source. Parallel
/// across sources with id-indexed gather; output is invariant to thread count.
inline std::vector<RefinedNeighborhood> refine_all(const Graph& g,
                                                   const std::vector<ExpandedNeighborhood>& expanded,
                                                   double alpha, std::size_t r, std::size_t k_max,
                                                   unsigned threads = 1) {
    std::vector<RefinedNeighborhood> out(expanded.size());
    parallel_for(expanded.size(), threads, [&](std::size_t u) {
        AugmentedGraph ag(g, expanded[u].source, alpha);
        out[u] = refine(expanded[u], ag, r, k_max);
    });
    return out;
}

}  // namespace circuitvec
