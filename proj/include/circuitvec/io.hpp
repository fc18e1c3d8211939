#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "circuitvec/errors.hpp"
#include "circuitvec/expansion.hpp"
#include "circuitvec/graph.hpp"
#include "circuitvec/refinement.hpp"
#include "circuitvec/skipgram.hpp"

namespace circuitvec {

namespace detail {

inline std::string format_g9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace detail

/// Embedding text format: header `n d`, then one `name v1 ... vd` line per
/// node in ascending id order, values with 9 significant digits.
inline void write_embedding(std::ostream& out, const EmbeddingMatrix& emb, const Graph& g) {
    out << emb.node_count() << ' ' << emb.dimensions() << '\n';
    for (NodeId v = 0; v < emb.node_count(); ++v) {
        out << g.name(v);
        for (double x : emb.input_row(v)) out << ' ' << detail::format_g9(x);
        out << '\n';
    }
}

/// Parsed embedding file: names in file order and one row per name.
struct EmbeddingFile {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::size_t dimensions = 0;
};

inline EmbeddingFile read_embedding(std::istream& in) {
    EmbeddingFile file;
    std::size_t n = 0;
    if (!(in >> n >> file.dimensions))
        throw ParseError("embedding file missing `n d` header", 1);
    file.names.reserve(n);
    file.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string name;
        if (!(in >> name)) throw ParseError("embedding file truncated", i + 2);
        std::vector<double> row(file.dimensions);
        for (std::size_t j = 0; j < file.dimensions; ++j)
            if (!(in >> row[j])) throw ParseError("embedding row truncated", i + 2);
        file.names.push_back(std::move(name));
        file.rows.push_back(std::move(row));
    }
    return file;
}

/// Expanded-neighborhood dump: one `u: m1 m2 ... me` line per source with
/// members in expansion order (the source itself leads the list).
inline void write_expanded_dump(std::ostream& out, const std::vector<ExpandedNeighborhood>& all,
                                const Graph& g) {
    for (const ExpandedNeighborhood& ne : all) {
        out << g.name(ne.source) << ':';
        for (NodeId v : ne.members) out << ' ' << g.name(v);
        out << '\n';
    }
}

/// Refined-neighborhood dump: `u: m1 m2 ... | path_count first_total` per
/// source, members in first-inclusion order.
inline void write_refined_dump(std::ostream& out, const std::vector<RefinedNeighborhood>& all,
                               const Graph& g) {
    for (const RefinedNeighborhood& nb : all) {
        out << g.name(nb.source) << ':';
        for (NodeId v : nb.members) out << ' ' << g.name(v);
        out << " | " << nb.paths.size() << ' '
            << detail::format_g9(nb.paths.empty() ? 0.0 : nb.paths.front().total_current) << '\n';
    }
}

/// Line-oriented circuit debug dump for golden tests: one `V node voltage`
/// line per circuit node (the sink prints as `z`), then one
/// `I tail head current` line per downhill edge.
inline void write_circuit_debug(std::ostream& out, const CircuitSolution& cs, const Graph& g) {
    auto node_token = [&](NodeId v) { return v == cs.sink ? std::string("z") : g.name(v); };
    for (std::size_t i = 0; i < cs.nodes.size(); ++i)
        out << "V " << node_token(cs.nodes[i]) << ' ' << detail::format_g9(cs.voltages[i])
            << '\n';
    for (const EdgeCurrent& e : cs.currents)
        out << "I " << node_token(e.tail) << ' ' << node_token(e.head) << ' '
            << detail::format_g9(e.current) << '\n';
}

/// Reads a refined dump back into per-source member lists (path details are
/// not reconstructed; training only needs the member order).
inline std::vector<RefinedNeighborhood> read_refined_dump(std::istream& in, const Graph& g) {
    std::vector<RefinedNeighborhood> all(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) all[v].source = v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("refined dump line missing ':'", line_no);
        std::string source_name = line.substr(0, colon);
        auto source = g.id_of(source_name);
        if (!source)
            throw ReferenceError("refined dump references unknown node '" + source_name + "'");
        auto bar = line.find('|', colon);
        std::string member_part =
            line.substr(colon + 1, bar == std::string::npos ? std::string::npos : bar - colon - 1);
        RefinedNeighborhood& nb = all[*source];
        nb.members.clear();
        for (const std::string& tok : detail::split_tokens(member_part)) {
            auto id = g.id_of(tok);
            if (!id) throw ReferenceError("refined dump references unknown node '" + tok + "'");
            nb.members.push_back(*id);
        }
    }
    return all;
}

}  // namespace circuitvec
