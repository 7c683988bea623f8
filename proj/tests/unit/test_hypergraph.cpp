#include <algorithm>
#include <map>
#include <random>

#include "bzeta/hypergraph.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bzeta;

TEST_SUITE("hypergraph") {

TEST_CASE("feed relation on small graphs") {
  CHECK(feed_pairs(cycle_graph(3)).size() == 6);
  CHECK(feed_pairs(path_graph(3)).size() == 2);
  for (const auto& g : {cycle_graph(4), complete_graph(4), example_hypergraph(), double_triangle_hypergraph()}) {
    int count = 0;
    for (int e = 0; e < g.num_edges(); ++e)
      for (int f = 0; f < g.num_edges(); ++f) {
        CHECK(g.feeds(e, f) == oracle::feeds(g, e, f));
        count += oracle::feeds(g, e, f);
      }
    CHECK(static_cast<int>(feed_pairs(g).size()) == count);
  }
}

TEST_CASE("edge numbering is factor by factor") {
  auto g = example_hypergraph();
  CHECK(g.num_edges() == 7);
  int e = 0;
  for (int a = 0; a < g.num_factors(); ++a)
    for (int p = 0; p < g.factor_degree(a); ++p, ++e) {
      CHECK(g.edge(e).factor == a);
      CHECK(g.edge(e).vertex == g.members(a)[p]);
      CHECK(g.edge_id(a, p) == e);
    }
}

TEST_CASE("nullity and euler number") {
  CHECK(nullity(cycle_graph(5)) == 1);
  CHECK(nullity(complete_graph(4)) == 3);
  CHECK(nullity(path_graph(6)) == 0);
  CHECK(is_tree(star_graph(4)));
  CHECK_FALSE(is_tree(cycle_graph(3)));
  auto h = example_hypergraph();
  CHECK(euler_number(h) == 4 + 3 - 7);
  CHECK(nullity(h) == 1);
  CHECK(nullity(double_triangle_hypergraph()) == 2);
  auto two = FactorGraph(4, {{0, 1}, {2, 3}});
  CHECK(connected_components(two).count == 2);
  CHECK(nullity(two) == 0);
}

TEST_CASE("prime cycle counts match the trace formula") {
  for (const auto& g : {cycle_graph(3), complete_graph(4), complete_bipartite_graph(2, 3), example_hypergraph(),
                        double_triangle_hypergraph(), torus_graph(2, 3)}) {
    const int L = 8;
    auto cycles = prime_cycles(g, L);
    std::map<int, long> by_len;
    for (const auto& c : cycles) {
      ++by_len[static_cast<int>(c.size())];
      for (std::size_t k = 0; k < c.size(); ++k) CHECK(oracle::feeds(g, c[k], c[(k + 1) % c.size()]));
      for (std::size_t s = 1; s < c.size(); ++s) {
        if (c.size() % s) continue;
        bool periodic = true;
        for (std::size_t k = 0; k < c.size(); ++k) periodic &= c[k] == c[(k + s) % c.size()];
        CHECK_FALSE(periodic);
      }
      auto lo = std::min_element(c.begin(), c.end());
      CHECK(lo == c.begin());
    }
    auto expect = oracle::prime_cycle_counts(g, L);
    for (int n = 1; n <= L; ++n) CHECK(by_len[n] == expect[n]);
  }
}

TEST_CASE("K4 short prime cycles") {
  auto counts = oracle::prime_cycle_counts(complete_graph(4), 4);
  CHECK(counts[1] == 0);
  CHECK(counts[2] == 0);
  CHECK(counts[3] == 8);
  CHECK(counts[4] == 6);
}

TEST_CASE("trees have no prime cycles") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 5; ++k) {
    auto g = oracle::random_tree(7, rng);
    CHECK(prime_cycles(g, 10).empty());
    CHECK(is_tree(g));
  }
}

TEST_CASE("spanning tree counts") {
  CHECK(spanning_tree_count_graph(complete_graph(4)) == 16);
  CHECK(spanning_tree_count_graph(cycle_graph(5)) == 5);
  for (const auto& g : {complete_graph(4), complete_bipartite_graph(2, 3), cycle_graph(6), torus_graph(2, 3)})
    CHECK(spanning_tree_count_graph(g) == oracle::spanning_trees_graph(g));
  for (const auto& g : {complete_graph(4), example_hypergraph(), double_triangle_hypergraph(), cycle_graph(4)})
    CHECK(spanning_tree_count_bipartite(g) == oracle::spanning_trees_bipartite(g));
  CHECK(spanning_tree_count_bipartite(double_triangle_hypergraph()) == 12);
  CHECK_THROWS_AS(spanning_tree_count_graph(FactorGraph(4, {{0, 1}, {2, 3}})), InputError);
}

TEST_CASE("feed components of a cycle with a pendant") {
  auto g = FactorGraph(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
  auto comps = feed_components(g);
  int big = 0;
  for (const auto& c : comps) big = std::max<int>(big, c.size());
  CHECK(big == 3);
}

TEST_CASE("malformed hypergraphs are rejected") {
  CHECK_THROWS_AS(FactorGraph(3, {{0, 0}}), InputError);
  CHECK_THROWS_AS(FactorGraph(3, {{0, 5}}), InputError);
  CHECK_THROWS_AS(FactorGraph(3, {{}}), InputError);
  CHECK_THROWS_AS(FactorGraph(2, {{0, 1}}, {"a"}), InputError);
  CHECK_THROWS_AS(FactorGraph::from_labels({"a", "b"}, {{"a", "c"}}), InputError);
}

TEST_CASE("generators") {
  auto t = torus_graph(3, 3);
  CHECK(t.num_vertices() == 9);
  CHECK(t.num_factors() == 18);
  for (int i = 0; i < 9; ++i) CHECK(t.vertex_degree(i) == 4);
  auto t2 = torus_graph(2, 2);
  CHECK(t2.num_factors() == 8);
  auto gm = grid_model_graph(3, 3);
  CHECK(gm.num_factors() == 9);
  CHECK(gm.num_vertices() == 18);
  for (int i = 0; i < gm.num_vertices(); ++i) CHECK(gm.vertex_degree(i) == 2);
  CHECK(complete_bipartite_graph(2, 3).num_factors() == 6);
  CHECK(star_graph(5).num_vertices() == 6);
}

}
