#include <catch2/catch_amalgamated.hpp>

#include "circuitvec/paths.hpp"
#include "test_support.hpp"

using namespace circuitvec;
using Catch::Approx;

namespace {

CircuitSolution solve_full(const Graph& g, NodeId source, double alpha = 1.0) {
    AugmentedGraph ag = augment(g, source, alpha);
    return solve_voltages(expand(ag, g.node_count()), ag);
}

}  // namespace

TEST_CASE("paths: single chain yields one path with summed current") {
    Graph g = testsupport::make_graph(2, {{0, 1, 1.0}});
    CircuitSolution cs = solve_full(g, 0);
    auto paths = enumerate_paths(cs, 10);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].nodes == std::vector<NodeId>{0, 1, 2});
    CHECK(paths[0].total_current == Approx(1.0).margin(1e-12));
}

TEST_CASE("paths: parallel branches ordered by total current") {
    // Branch a carries 0.6 per hop, branch b 0.4 per hop.
    Graph g = testsupport::make_graph(3, {{0, 1, 1.2}, {0, 2, 0.8}});
    CircuitSolution cs = solve_full(g, 0);
    auto paths = enumerate_paths(cs, 10);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].nodes == std::vector<NodeId>{0, 1, 3});
    CHECK(paths[0].total_current == Approx(1.2).margin(1e-12));
    CHECK(paths[1].nodes == std::vector<NodeId>{0, 2, 3});
    CHECK(paths[1].total_current == Approx(0.8).margin(1e-12));
}

TEST_CASE("paths: equal branches tie-break on the node sequence") {
    Graph g = testsupport::make_graph(3, {{0, 1, 1.0}, {0, 2, 1.0}});
    CircuitSolution cs = solve_full(g, 0);
    auto paths = enumerate_paths(cs, 10);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].total_current == paths[1].total_current);
    CHECK(paths[0].nodes == std::vector<NodeId>{0, 1, 3});
    CHECK(paths[1].nodes == std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("paths: k_max caps production") {
    Graph g = testsupport::make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
    CircuitSolution cs = solve_full(g, 0);
    CHECK(enumerate_paths(cs, 2).size() == 2);
    CHECK_THROWS_AS(enumerate_paths(cs, 0), std::invalid_argument);
}

TEST_CASE("paths: no route to the sink yields an empty list") {
    Graph g = testsupport::make_graph(1, {});
    AugmentedGraph ag = augment(g, 0, 1.0);
    CircuitSolution cs = solve_voltages(expand(ag, 1), ag);
    CHECK(enumerate_paths(cs, 10).empty());
}

TEST_CASE("paths: lazy generator matches the eager list") {
    SplitMix64 rng(222);
    Graph g = testsupport::random_connected_graph(8, 0.4, 0.2, 4.0, rng);
    CircuitSolution cs = solve_full(g, 0);
    auto eager = enumerate_paths(cs, 1000);
    PathEnumerator gen(cs);
    for (const CurrentPath& want : eager) {
        auto got = gen.next();
        REQUIRE(got.has_value());
        CHECK(got->nodes == want.nodes);
        CHECK(got->total_current == want.total_current);
    }
}

TEST_CASE("paths: exact agreement with brute-force enumeration") {
    SplitMix64 rng(333);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 3 + rng.next_below(8);  // members <= 10
        Graph g = testsupport::random_connected_graph(n, 0.4, 0.1, 5.0, rng);
        NodeId source = static_cast<NodeId>(rng.next_below(n));
        AugmentedGraph ag = augment(g, source, 1.0);
        ExpandedNeighborhood ne = expand(ag, 1 + rng.next_below(n));
        CircuitSolution cs = solve_voltages(ne, ag);

        auto want = testsupport::brute_force_paths(cs);
        auto got = enumerate_paths(cs, want.size() + 10);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            REQUIRE(got[i].nodes == want[i].nodes);
            REQUIRE(got[i].total_current == want[i].total_current);  // bit-exact
        }
        checked += static_cast<int>(want.size());
    }
    CHECK(checked > 100);  // the instances actually exercised path variety
}
