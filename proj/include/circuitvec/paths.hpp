#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "circuitvec/circuit.hpp"

namespace circuitvec {

/// One end-to-end source-to-sink path with its ranking key: the sum of the
/// edge currents along the path, accumulated in path order.
struct CurrentPath {
    std::vector<NodeId> nodes;  // global ids, source first, sink last
    double total_current = 0.0;
};

/// Lazy best-first generator of source->sink paths over the downhill current
/// DAG, in non-increasing total current; ties break on the lexicographically
/// smaller node-id sequence.
///
/// Partial paths are ranked by accumulated current plus the best possible
/// completion (a max-completion table over the DAG). The completion bound is
/// nudged up by a hair so float rounding can never rank a partial below one
/// of its own completions: finished paths then pop by their exact totals.
class PathEnumerator {
public:
    explicit PathEnumerator(const CircuitSolution& cs) : queue_(EntryOrder{this}) {
        const std::size_t count = cs.nodes.size();
        global_ids_ = cs.nodes;
        out_.resize(count);

        std::vector<std::size_t> local(cs.sink + 1);
        for (std::size_t i = 0; i < count; ++i) local[cs.nodes[i]] = i;
        for (const EdgeCurrent& e : cs.currents)
            out_[local[e.tail]].push_back({static_cast<NodeId>(local[e.head]), e.current});
        // cs.currents is (tail, head)-sorted, so each out list is already
        // ordered by global head id.

        best_completion_ = compute_best_completion(cs);

        const std::size_t source_local = 0;
        const std::size_t sink_local = cs.sink_index();
        sink_local_ = sink_local;
        if (best_completion_[source_local] >= 0.0) {
            arena_.push_back({static_cast<NodeId>(source_local), -1});
            queue_.push(Entry{priority_of(0.0, source_local), 0.0, 0});
        }
    }

    // The queue comparator points back at the arena, so the enumerator is
    // pinned in place once constructed.
    PathEnumerator(const PathEnumerator&) = delete;
    PathEnumerator& operator=(const PathEnumerator&) = delete;

    /// Next path in order, or nullopt when the supply is exhausted.
    std::optional<CurrentPath> next() {
        while (!queue_.empty()) {
            Entry top = queue_.top();
            queue_.pop();
            const ArenaNode& tip = arena_[static_cast<std::size_t>(top.arena)];
            if (tip.node == sink_local_) {
                CurrentPath path;
                path.total_current = top.accumulated;
                path.nodes = materialize(top.arena);
                return path;
            }
            for (const Neighbor& edge : out_[tip.node]) {
                if (best_completion_[edge.id] < 0.0 && edge.id != sink_local_) continue;
                double g = top.accumulated + edge.conductance;  // conductance slot holds current
                std::int32_t child = static_cast<std::int32_t>(arena_.size());
                arena_.push_back({edge.id, top.arena});
                queue_.push(Entry{priority_of(g, edge.id), g, child});
            }
        }
        return std::nullopt;
    }

private:
    struct ArenaNode {
        NodeId node;  // local index
        std::int32_t parent;
    };

    struct Entry {
        double priority;
        double accumulated;
        std::int32_t arena;
    };

    struct EntryOrder {
        const PathEnumerator* owner;
        // std::priority_queue pops the largest element; "largest" here is the
        // highest priority, with the lexicographically smaller path winning ties.
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.priority != b.priority) return a.priority < b.priority;
            return owner->lex_greater(a.arena, b.arena);
        }
    };

    double priority_of(double accumulated, std::size_t node_local) const {
        if (node_local == sink_local_) return accumulated;  // exact final key
        return (accumulated + best_completion_[node_local]) * (1.0 + 1e-12);
    }

    std::vector<double> compute_best_completion(const CircuitSolution& cs) const {
        constexpr double kUnreachable = -1.0;
        std::vector<double> best(cs.nodes.size(), kUnreachable);
        best[cs.sink_index()] = 0.0;
        // Downhill edges only ever point to strictly lower voltage, so
        // ascending-voltage order is a reverse topological order of the DAG.
        std::vector<std::size_t> order(cs.nodes.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cs.voltages[a] != cs.voltages[b]) return cs.voltages[a] < cs.voltages[b];
            return a < b;
        });
        for (std::size_t i : order) {
            for (const Neighbor& edge : out_[i]) {
                if (best[edge.id] < 0.0) continue;
                double candidate = edge.conductance + best[edge.id];
                if (candidate > best[i]) best[i] = candidate;
            }
        }
        return best;
    }

    std::vector<NodeId> materialize(std::int32_t arena) const {
        std::vector<NodeId> nodes;
        for (std::int32_t i = arena; i >= 0; i = arena_[static_cast<std::size_t>(i)].parent)
            nodes.push_back(global_ids_[arena_[static_cast<std::size_t>(i)].node]);
        std::reverse(nodes.begin(), nodes.end());
        return nodes;
    }

    bool lex_greater(std::int32_t a, std::int32_t b) const {
        std::vector<NodeId> pa = materialize(a);
        std::vector<NodeId> pb = materialize(b);
        return std::lexicographical_compare(pb.begin(), pb.end(), pa.begin(), pa.end());
    }

    std::vector<NodeId> global_ids_;
    std::vector<std::vector<Neighbor>> out_;  // local downhill adjacency, current in .conductance
    std::vector<double> best_completion_;
    std::size_t sink_local_ = 0;
    std::vector<ArenaNode> arena_;
    std::priority_queue<Entry, std::vector<Entry>, EntryOrder> queue_;
};

/// Eager form of the enumerator: up to k_max paths, best first.
inline std::vector<CurrentPath> enumerate_paths(const CircuitSolution& cs, std::size_t k_max) {
    if (k_max < 1) throw std::invalid_argument("enumerate_paths: k_max must be >= 1");
    PathEnumerator gen(cs);
    std::vector<CurrentPath> paths;
    while (paths.size() < k_max) {
        auto p = gen.next();
        if (!p) break;
        paths.push_back(std::move(*p));
    }
    return paths;
}

}  // namespace circuitvec
