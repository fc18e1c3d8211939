#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "circuitvec/graph.hpp"
#include "circuitvec/rng.hpp"
#include "test_support.hpp"

using namespace circuitvec;
using Catch::Approx;

TEST_CASE("edge list: unweighted path graph") {
    std::istringstream in("0 1\n1 2\n");
    EdgeListResult result = load_edge_list(in, false);
    const Graph& g = result.graph;
    REQUIRE(g.node_count() == 3);
    REQUIRE(g.edge_count() == 2);
    CHECK(g.conductance(0, 1) == 1.0);
    CHECK(g.conductance(1, 2) == 1.0);
    CHECK_FALSE(g.conductance(0, 2).has_value());
}

TEST_CASE("edge list: weighted with name table in first-appearance order") {
    std::istringstream in("a b 2.5\nb c 0.5\n");
    Graph g = load_edge_list(in, true).graph;
    REQUIRE(g.node_count() == 3);
    CHECK(g.id_of("a") == NodeId{0});
    CHECK(g.id_of("b") == NodeId{1});
    CHECK(g.id_of("c") == NodeId{2});
    CHECK(g.conductance(0, 1) == 2.5);
    CHECK(g.conductance(1, 2) == 0.5);
    CHECK(g.name(2) == "c");
}

TEST_CASE("edge list: duplicate undirected edge collapses keeping first weight") {
    std::istringstream in("0 1\n1 0\n");
    EdgeListResult result = load_edge_list(in, false);
    CHECK(result.graph.node_count() == 2);
    CHECK(result.graph.edge_count() == 1);
    CHECK(result.duplicates_collapsed == 1);

    std::istringstream weighted_in("x y 3\ny x 9\n");
    EdgeListResult weighted = load_edge_list(weighted_in, true);
    CHECK(weighted.graph.conductance(0, 1) == 3.0);
}

TEST_CASE("edge list: comments, blank lines, and error paths") {
    std::istringstream ok("# header\n\n0 1\n");
    CHECK(load_edge_list(ok, false).graph.edge_count() == 1);

    std::istringstream malformed("0 1\n0\n");
    CHECK_THROWS_AS(load_edge_list(malformed, false), ParseError);
    std::istringstream malformed2("0 1 2\n");
    CHECK_THROWS_AS(load_edge_list(malformed2, false), ParseError);
    std::istringstream bad_weight("0 1 zero\n");
    CHECK_THROWS_AS(load_edge_list(bad_weight, true), ParseError);
    std::istringstream nonpositive("0 1 -2\n");
    CHECK_THROWS_AS(load_edge_list(nonpositive, true), std::domain_error);

    std::istringstream self_loop("0 0\n0 1\n");
    EdgeListResult result = load_edge_list(self_loop, false);
    CHECK(result.graph.edge_count() == 1);
    CHECK(result.self_loops_skipped == 1);
}

TEST_CASE("parse error carries the line number") {
    std::istringstream malformed("0 1\n\n0 1 7\n");
    try {
        load_edge_list(malformed, false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("graph invariants: symmetry and handshake sum") {
    SplitMix64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 2 + rng.next_below(10);
        Graph g = testsupport::random_connected_graph(n, 0.3, 0.1, 5.0, rng);
        std::size_t degree_sum = 0;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            degree_sum += g.neighbors(v).size();
            NodeId previous = 0;
            bool first = true;
            for (const Neighbor& nb : g.neighbors(v)) {
                REQUIRE(nb.conductance > 0.0);
                REQUIRE(nb.id != v);
                if (!first) REQUIRE(nb.id > previous);
                previous = nb.id;
                first = false;
                auto back = g.conductance(nb.id, v);
                REQUIRE(back.has_value());
                REQUIRE(*back == nb.conductance);
            }
        }
        REQUIRE(degree_sum == 2 * g.edge_count());
    }
}

TEST_CASE("edge list round-trip preserves the named adjacency structure") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        Graph g = testsupport::random_connected_graph(3 + rng.next_below(8), 0.4, 0.1, 5.0, rng);
        std::ostringstream serialized;
        write_edge_list(g, serialized);
        std::istringstream reread(serialized.str());
        Graph h = load_edge_list(reread, true).graph;

        REQUIRE(h.node_count() == g.node_count());
        REQUIRE(h.edge_count() == g.edge_count());
        for (NodeId v = 0; v < g.node_count(); ++v) {
            NodeId hv = h.id_of(g.name(v)).value();
            REQUIRE(h.neighbors(hv).size() == g.neighbors(v).size());
            for (const Neighbor& nb : g.neighbors(v)) {
                NodeId hn = h.id_of(g.name(nb.id)).value();
                auto w = h.conductance(hv, hn);
                REQUIRE(w.has_value());
                REQUIRE(*w == nb.conductance);
            }
        }
    }
}

TEST_CASE("labels: basic load and empty stream") {
    std::istringstream graph_in("0 1\n1 2\n");
    Graph g = load_edge_list(graph_in, false).graph;

    std::istringstream in("0 3\n1 3 7\n");
    LabelSet labels = load_labels(in, g);
    REQUIRE(labels.label_count() == 2);
    LabelId three = labels.labels_of(0).at(0);
    CHECK(labels.label_name(three) == "3");
    CHECK(labels.labels_of(1).size() == 2);
    CHECK(labels.labels_of(2).empty());

    std::istringstream empty("");
    LabelSet none = load_labels(empty, g);
    for (NodeId v = 0; v < g.node_count(); ++v) CHECK(none.labels_of(v).empty());
}

TEST_CASE("labels: unknown node is a reference error") {
    std::istringstream graph_in("0 1\n");
    Graph g = load_edge_list(graph_in, false).graph;
    std::istringstream in("x 1\n");
    CHECK_THROWS_AS(load_labels(in, g), ReferenceError);
}

TEST_CASE("augment: unit star and worked 48-neighbor instance") {
    Graph star = testsupport::make_graph(5, {{0, 1, 1.0}, {1, 2, 1.0}, {1, 3, 1.0}});
    AugmentedGraph ag = augment(star, 0, 1.0);
    CHECK(ag.sink_conductance(1) == Approx(3.0));
    CHECK(ag.sink_conductance(0) == 0.0);
    CHECK(ag.sink_id() == star.node_count());

    std::vector<testsupport::EdgeTriple> edges;
    for (int leaf = 1; leaf <= 48; ++leaf) edges.push_back({0, leaf, 1.0});
    Graph hub = testsupport::make_graph(49, edges);
    AugmentedGraph hub_ag = augment(hub, 1, 1.0);
    CHECK(hub_ag.sink_conductance(0) == Approx(48.0));

    Graph weighted = testsupport::make_graph(3, {{0, 1, 2.5}, {0, 2, 0.5}});
    AugmentedGraph weighted_ag = augment(weighted, 1, 2.0);
    CHECK(weighted_ag.sink_conductance(0) == Approx(6.0));
}

TEST_CASE("augment: precondition violations") {
    Graph g = testsupport::make_graph(2, {{0, 1, 1.0}});
    CHECK_THROWS_AS(augment(g, 5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(augment(g, 0, 0.0), std::invalid_argument);
}

TEST_CASE("augment is linear in alpha") {
    SplitMix64 rng(7);
    Graph g = testsupport::random_connected_graph(8, 0.4, 0.1, 5.0, rng);
    AugmentedGraph one = augment(g, 2, 1.0);
    AugmentedGraph two = augment(g, 2, 2.0);
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (v == 2) {
            CHECK(two.sink_conductance(v) == 0.0);
        } else {
            CHECK(two.sink_conductance(v) == Approx(2.0 * one.sink_conductance(v)));
        }
    }
}

TEST_CASE("weighted_degree: source excluded from sink, isolated node is zero") {
    // Source with 3 unit neighbors: degree 3 (no sink edge).
    Graph star = testsupport::make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
    AugmentedGraph ag = augment(star, 0, 1.0);
    CHECK(weighted_degree(ag, 0) == Approx(3.0));

    // Non-source with 3 unit neighbors at alpha=1: 3 base + 3 sink.
    AugmentedGraph ag_from_leaf = augment(star, 1, 1.0);
    CHECK(weighted_degree(ag_from_leaf, 0) == Approx(6.0));

    Graph with_isolated = testsupport::make_graph(3, {{0, 1, 1.0}});
    AugmentedGraph iso_ag = augment(with_isolated, 0, 1.0);
    CHECK(weighted_degree(iso_ag, 2) == 0.0);
}
