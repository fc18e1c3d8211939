#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "circuitvec/errors.hpp"

namespace circuitvec {

/// Dense node index, assigned in first-appearance order at load time.
using NodeId = std::uint32_t;

/// One incident edge: neighbor id plus the edge conductance (weight).
struct Neighbor {
    NodeId id;
    double conductance;

    bool operator==(const Neighbor&) const = default;
};

/// Undirected weighted graph with a bidirectional name table.
///
/// Invariants enforced at construction:
///   - adjacency is symmetric with identical conductance on both directions
///   - conductances are > 0, no self-loops, no duplicate edges
///   - neighbor lists are sorted ascending by id (determinism contract)
class Graph {
public:
    Graph() = default;  // empty graph

    std::size_t node_count() const { return adjacency_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    const std::vector<Neighbor>& neighbors(NodeId v) const { return adjacency_[v]; }

    /// Sum of conductances of v's incident edges (0 for isolated nodes).
    double strength(NodeId v) const { return strength_[v]; }

    /// Conductance of edge (u,v), or nullopt if not an edge.
    std::optional<double> conductance(NodeId u, NodeId v) const {
        const auto& adj = adjacency_[u];
        auto it = std::lower_bound(adj.begin(), adj.end(), v,
                                   [](const Neighbor& n, NodeId id) { return n.id < id; });
        if (it == adj.end() || it->id != v) return std::nullopt;
        return it->conductance;
    }

    const std::string& name(NodeId v) const { return names_[v]; }

    std::optional<NodeId> id_of(const std::string& name) const {
        auto it = name_to_id_.find(name);
        if (it == name_to_id_.end()) return std::nullopt;
        return it->second;
    }

private:
    friend class GraphBuilder;

    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<double> strength_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> name_to_id_;
    std::size_t edge_count_ = 0;
};

/// Incremental graph assembly with the load-time cleanup rules: duplicate
/// undirected edges collapse keeping the first weight, self-loops are
/// skipped and counted.
class GraphBuilder {
public:
    NodeId add_node(const std::string& name) {
        auto it = name_to_id_.find(name);
        if (it != name_to_id_.end()) return it->second;
        NodeId id = static_cast<NodeId>(names_.size());
        names_.push_back(name);
        name_to_id_.emplace(name, id);
        return id;
    }

    void add_edge(NodeId u, NodeId v, double conductance) {
        if (conductance <= 0.0)
            throw std::domain_error("edge conductance must be positive");
        if (u == v) {
            ++self_loops_skipped_;
            return;
        }
        std::uint64_t key = edge_key(u, v);
        if (!edge_weight_.emplace(key, conductance).second) ++duplicates_collapsed_;
    }

    std::size_t self_loops_skipped() const { return self_loops_skipped_; }
    std::size_t duplicates_collapsed() const { return duplicates_collapsed_; }

    Graph build() && {
        Graph g;
        g.names_ = std::move(names_);
        g.name_to_id_ = std::move(name_to_id_);
        g.adjacency_.assign(g.names_.size(), {});
        for (const auto& [key, w] : edge_weight_) {
            NodeId u = static_cast<NodeId>(key >> 32);
            NodeId v = static_cast<NodeId>(key & 0xFFFFFFFFu);
            g.adjacency_[u].push_back({v, w});
            g.adjacency_[v].push_back({u, w});
        }
        for (auto& adj : g.adjacency_)
            std::sort(adj.begin(), adj.end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
        g.strength_.assign(g.names_.size(), 0.0);
        for (NodeId v = 0; v < g.names_.size(); ++v)
            for (const Neighbor& n : g.adjacency_[v]) g.strength_[v] += n.conductance;
        g.edge_count_ = edge_weight_.size();
        return g;
    }

private:
    static std::uint64_t edge_key(NodeId u, NodeId v) {
        if (u > v) std::swap(u, v);
        return (static_cast<std::uint64_t>(u) << 32) | v;
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> name_to_id_;
    std::unordered_map<std::uint64_t, double> edge_weight_;
    std::size_t self_loops_skipped_ = 0;
    std::size_t duplicates_collapsed_ = 0;
};

/// Graph plus the per-edge cleanup counters from ingestion.
struct EdgeListResult {
    Graph graph;
    std::size_t self_loops_skipped = 0;
    std::size_t duplicates_collapsed = 0;
};

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

inline double parse_positive_weight(const std::string& token, std::size_t line_no) {
    double w = 0.0;
    std::size_t consumed = 0;
    try {
        w = std::stod(token, &consumed);
    } catch (const std::exception&) {
        throw ParseError("invalid edge weight '" + token + "'", line_no);
    }
    if (consumed != token.size())
        throw ParseError("invalid edge weight '" + token + "'", line_no);
    if (!std::isfinite(w) || !(w > 0.0))
        throw std::domain_error("edge weight must be positive (line " +
                                std::to_string(line_no) + ")");
    return w;
}

}  // namespace detail

/// Reads a whitespace-delimited edge list: one `u v` (or `u v w` when
/// weighted) per line, `#`-prefixed comment lines and blank lines skipped.
/// Node names map to dense ids in first-appearance order. Unweighted edges
/// load with conductance 1.
inline EdgeListResult load_edge_list(std::istream& in, bool weighted) {
    GraphBuilder builder;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.front() == '#') continue;
        auto tokens = detail::split_tokens(line);
        if (tokens.empty()) continue;
        std::size_t expected = weighted ? 3u : 2u;
        if (tokens.size() != expected)
            throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                                 std::to_string(tokens.size()),
                             line_no);
        NodeId u = builder.add_node(tokens[0]);
        NodeId v = builder.add_node(tokens[1]);
        double w = weighted ? detail::parse_positive_weight(tokens[2], line_no) : 1.0;
        builder.add_edge(u, v, w);
    }
    EdgeListResult result;
    result.self_loops_skipped = builder.self_loops_skipped();
    result.duplicates_collapsed = builder.duplicates_collapsed();
    result.graph = std::move(builder).build();
    return result;
}

/// Writes the canonical weighted edge list: one `u v w` line per undirected
/// edge, ordered by (min id, max id), weights with full precision.
inline void write_edge_list(const Graph& g, std::ostream& out) {
    char buf[64];
    for (NodeId u = 0; u < g.node_count(); ++u) {
        for (const Neighbor& n : g.neighbors(u)) {
            if (n.id < u) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", n.conductance);
            out << g.name(u) << ' ' << g.name(n.id) << ' ' << buf << '\n';
        }
    }
}

/// Dense label index into the finite label set L.
using LabelId = std::uint32_t;

/// Per-node label sets for multi-label evaluation. Nodes absent from the
/// label file have empty sets.
class LabelSet {
public:
    explicit LabelSet(std::size_t node_count) : labels_(node_count) {}

    LabelId add_label_name(const std::string& name) {
        auto it = label_to_id_.find(name);
        if (it != label_to_id_.end()) return it->second;
        LabelId id = static_cast<LabelId>(label_names_.size());
        label_names_.push_back(name);
        label_to_id_.emplace(name, id);
        return id;
    }

    void assign(NodeId node, LabelId label) {
        auto& set = labels_[node];
        auto it = std::lower_bound(set.begin(), set.end(), label);
        if (it == set.end() || *it != label) set.insert(it, label);
    }

    /// Sorted, duplicate-free label ids of the node.
    const std::vector<LabelId>& labels_of(NodeId node) const { return labels_[node]; }

    std::size_t node_count() const { return labels_.size(); }
    std::size_t label_count() const { return label_names_.size(); }
    const std::string& label_name(LabelId id) const { return label_names_[id]; }

private:
    std::vector<std::vector<LabelId>> labels_;
    std::vector<std::string> label_names_;
    std::unordered_map<std::string, LabelId> label_to_id_;
};

/// Reads `node label1 label2 ...` lines. Every node name must exist in the
/// graph's name table; label names get dense ids in first-appearance order.
inline LabelSet load_labels(std::istream& in, const Graph& g) {
    LabelSet labels(g.node_count());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.front() == '#') continue;
        auto tokens = detail::split_tokens(line);
        if (tokens.empty()) continue;
        if (tokens.size() < 2)
            throw ParseError("expected `node label...`, got a bare token", line_no);
        auto node = g.id_of(tokens[0]);
        if (!node)
            throw ReferenceError("label file references unknown node '" + tokens[0] +
                                 "' (line " + std::to_string(line_no) + ")");
        for (std::size_t i = 1; i < tokens.size(); ++i)
            labels.assign(*node, labels.add_label_name(tokens[i]));
    }
    return labels;
}

/// The sink-augmented view of a graph for one source node: a grounded
/// universal sink z (id = node_count) attached to every node except the
/// source, with conductance alpha times the node's base strength.
class AugmentedGraph {
public:
    AugmentedGraph(const Graph& base, NodeId source, double alpha)
        : base_(&base), source_(source), alpha_(alpha) {
        if (source >= base.node_count())
            throw std::invalid_argument("augment: source id out of range");
        if (!(alpha > 0.0)) throw std::invalid_argument("augment: alpha must be positive");
        sink_conductance_.resize(base.node_count());
        for (NodeId v = 0; v < base.node_count(); ++v)
            sink_conductance_[v] = (v == source) ? 0.0 : alpha * base.strength(v);
    }

    const Graph& base() const { return *base_; }
    NodeId source() const { return source_; }
    double alpha() const { return alpha_; }

    /// Id of the universal sink z (one past the last base node).
    NodeId sink_id() const { return static_cast<NodeId>(base_->node_count()); }

    /// Conductance of the edge (v, z); 0 for the source, which has no sink edge.
    double sink_conductance(NodeId v) const { return sink_conductance_[v]; }

private:
    const Graph* base_;
    NodeId source_;
    double alpha_;
    std::vector<double> sink_conductance_;
};

inline AugmentedGraph augment(const Graph& g, NodeId source, double alpha) {
    return AugmentedGraph(g, source, alpha);
}

/// Weighted degree in the augmented view: base strength plus the sink edge
/// (the source contributes no sink edge).
inline double weighted_degree(const AugmentedGraph& ag, NodeId v) {
    return ag.base().strength(v) + ag.sink_conductance(v);
}

}  // namespace circuitvec
