#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bzeta/types.hpp"

namespace bzeta {

// (alpha -> i): factor alpha, vertex i, i sits at `position` in alpha's member list.
struct DirectedEdge {
  int factor;
  int vertex;
  int position;
};

// H = (V, F). Vertices are 0..n-1, factors keep their member order.
// Directed edges are numbered factor by factor, members in order.
class FactorGraph {
 public:
  FactorGraph() = default;
  FactorGraph(int num_vertices, std::vector<std::vector<int>> factors,
              std::vector<std::string> vertex_labels = {});

  static FactorGraph from_labels(const std::vector<std::string>& vertex_ids,
                                 const std::vector<std::vector<std::string>>& factors);

  int num_vertices() const { return num_vertices_; }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  std::span<const int> members(int a) const { return factors_[a]; }
  std::span<const int> vertex_factors(int i) const { return vertex_factors_[i]; }
  std::span<const int> edges_into(int i) const { return edges_into_[i]; }
  int factor_degree(int a) const { return static_cast<int>(factors_[a].size()); }
  int vertex_degree(int i) const { return static_cast<int>(vertex_factors_[i].size()); }

  const DirectedEdge& edge(int e) const { return edges_[e]; }
  int edge_id(int a, int position) const { return edge_offset_[a] + position; }
  int first_edge(int a) const { return edge_offset_[a]; }
  // position of vertex i inside factor a, -1 if absent
  int position_of(int a, int i) const;

  const std::string& vertex_label(int i) const { return labels_[i]; }
  int vertex_index(const std::string& label) const;

  bool is_pairwise() const;

  // e' feeds e  <=>  e' in feeds_into(e)
  std::span<const int> feeds_into(int e) const { return feed_in_[e]; }
  std::span<const int> feeds_from(int e) const { return feed_out_[e]; }
  bool feeds(int from, int to) const;

 private:
  int num_vertices_ = 0;
  std::vector<std::vector<int>> factors_;
  std::vector<std::vector<int>> vertex_factors_;
  std::vector<std::vector<int>> edges_into_;
  std::vector<DirectedEdge> edges_;
  std::vector<int> edge_offset_;
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> feed_in_;
  std::vector<std::vector<int>> feed_out_;
};

struct FeedPair {
  int from;
  int to;
};

// Connected components of the bipartite incidence graph B_H.
struct Components {
  int count = 0;
  std::vector<int> vertex_component;
  std::vector<int> factor_component;
};

Components connected_components(const FactorGraph& g);
int nullity(const FactorGraph& g);
int euler_number(const FactorGraph& g);
bool is_tree(const FactorGraph& g);
std::vector<FeedPair> feed_pairs(const FactorGraph& g);

// Prime closed geodesics up to length max_len, one per rotation class,
// rotated so the sequence of edge ids is lexicographically smallest.
using PrimeCycle = std::vector<int>;
std::vector<PrimeCycle> prime_cycles(const FactorGraph& g, int max_len);

// Strongly connected components of the feed digraph on directed edges.
std::vector<std::vector<int>> feed_components(const FactorGraph& g);

// Matrix-tree counts. Throws InputError when disconnected.
std::int64_t spanning_tree_count_bipartite(const FactorGraph& g);
// Only for pairwise H, counted on the multigraph G with V and one edge per factor.
std::int64_t spanning_tree_count_graph(const FactorGraph& g);

// Generators.
FactorGraph path_graph(int n);
FactorGraph cycle_graph(int n);
FactorGraph complete_graph(int n);
FactorGraph star_graph(int leaves);
FactorGraph complete_bipartite_graph(int m, int n);
// Pairwise torus on rows x cols vertices. 2 x k tori carry doubled edges.
FactorGraph torus_graph(int rows, int cols);
// Factors at torus vertices, variables on torus edges (each variable in two factors).
FactorGraph grid_model_graph(int rows, int cols);
// V={1,2,3,4}, F={{1,2},{1,2,3,4},{4}}.
FactorGraph example_hypergraph();
// V={1,2,3}, F = two copies of {1,2,3}; B_H is K_{2,3}.
FactorGraph double_triangle_hypergraph();

}  // namespace bzeta
