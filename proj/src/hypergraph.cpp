#include "bzeta/hypergraph.hpp"

#include <algorithm>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace bzeta {

FactorGraph::FactorGraph(int num_vertices, std::vector<std::vector<int>> factors,
                         std::vector<std::string> vertex_labels)
    : num_vertices_(num_vertices), factors_(std::move(factors)), labels_(std::move(vertex_labels)) {
  if (num_vertices < 0) throw InputError("negative vertex count");
  if (labels_.empty()) {
    for (int i = 0; i < num_vertices; ++i) labels_.push_back(std::to_string(i + 1));
  }
  if (static_cast<int>(labels_.size()) != num_vertices) throw InputError("label count does not match vertex count");

  vertex_factors_.assign(num_vertices, {});
  edges_into_.assign(num_vertices, {});
  for (int a = 0; a < num_factors(); ++a) {
    const auto& mem = factors_[a];
    if (mem.empty()) throw InputError("factor " + std::to_string(a) + " is empty");
    std::vector<int> sorted = mem;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw InputError("factor " + std::to_string(a) + " has a duplicate member");
    edge_offset_.push_back(num_edges());
    for (int p = 0; p < static_cast<int>(mem.size()); ++p) {
      int i = mem[p];
      if (i < 0 || i >= num_vertices) throw InputError("factor " + std::to_string(a) + " has unknown vertex");
      vertex_factors_[i].push_back(a);
      edges_into_[i].push_back(num_edges());
      edges_.push_back({a, i, p});
    }
  }

  // (beta -> j) feeds (alpha -> i): j in alpha, j != i, beta != alpha
  feed_in_.assign(edges_.size(), {});
  feed_out_.assign(edges_.size(), {});
  for (int e = 0; e < num_edges(); ++e) {
    const auto& ed = edges_[e];
    for (int j : factors_[ed.factor]) {
      if (j == ed.vertex) continue;
      for (int f : edges_into_[j]) {
        if (edges_[f].factor == ed.factor) continue;
        feed_in_[e].push_back(f);
      }
    }
    std::sort(feed_in_[e].begin(), feed_in_[e].end());
  }
  for (int e = 0; e < num_edges(); ++e)
    for (int f : feed_in_[e]) feed_out_[f].push_back(e);
  for (auto& v : feed_out_) std::sort(v.begin(), v.end());
}

FactorGraph FactorGraph::from_labels(const std::vector<std::string>& vertex_ids,
                                     const std::vector<std::vector<std::string>>& factors) {
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(vertex_ids.size()); ++i) {
    if (!index.emplace(vertex_ids[i], i).second) throw InputError("duplicate vertex id '" + vertex_ids[i] + "'");
  }
  std::vector<std::vector<int>> f;
  for (const auto& mem : factors) {
    std::vector<int> row;
    for (const auto& id : mem) {
      auto it = index.find(id);
      if (it == index.end()) throw InputError("unknown vertex id '" + id + "'");
      row.push_back(it->second);
    }
    f.push_back(std::move(row));
  }
  return FactorGraph(static_cast<int>(vertex_ids.size()), std::move(f), vertex_ids);
}

int FactorGraph::position_of(int a, int i) const {
  const auto& mem = factors_[a];
  auto it = std::find(mem.begin(), mem.end(), i);
  return it == mem.end() ? -1 : static_cast<int>(it - mem.begin());
}

int FactorGraph::vertex_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw InputError("unknown vertex id '" + label + "'");
  return static_cast<int>(it - labels_.begin());
}

bool FactorGraph::is_pairwise() const {
  return std::all_of(factors_.begin(), factors_.end(), [](const auto& m) { return m.size() == 2; });
}

bool FactorGraph::feeds(int from, int to) const {
  const auto& v = feed_in_[to];
  return std::binary_search(v.begin(), v.end(), from);
}

Components connected_components(const FactorGraph& g) {
  int n = g.num_vertices() + g.num_factors();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    int a = find(g.num_vertices() + g.edge(e).factor), b = find(g.edge(e).vertex);
    if (a != b) parent[a] = b;
  }
  Components c;
  std::vector<int> label(n, -1);
  auto comp = [&](int x) {
    int r = find(x);
    if (label[r] < 0) label[r] = c.count++;
    return label[r];
  };
  for (int i = 0; i < g.num_vertices(); ++i) c.vertex_component.push_back(comp(i));
  for (int a = 0; a < g.num_factors(); ++a) c.factor_component.push_back(comp(g.num_vertices() + a));
  return c;
}

int nullity(const FactorGraph& g) {
  return g.num_edges() - g.num_vertices() - g.num_factors() + connected_components(g).count;
}

int euler_number(const FactorGraph& g) { return g.num_vertices() + g.num_factors() - g.num_edges(); }

bool is_tree(const FactorGraph& g) { return connected_components(g).count == 1 && nullity(g) == 0; }

std::vector<FeedPair> feed_pairs(const FactorGraph& g) {
  std::vector<FeedPair> out;
  for (int e = 0; e < g.num_edges(); ++e)
    for (int f : g.feeds_from(e)) out.push_back({e, f});
  return out;
}

namespace {

bool is_lyndon(const std::vector<int>& w) {
  int k = static_cast<int>(w.size());
  for (int s = 1; s < k; ++s) {
    for (int t = 0; t < k; ++t) {
      int a = w[t], b = w[(t + s) % k];
      if (a < b) break;
      if (a > b) return false;
      if (t == k - 1) return false;  // equal rotation: periodic
    }
  }
  return true;
}

}  // namespace

std::vector<PrimeCycle> prime_cycles(const FactorGraph& g, int max_len) {
  if (max_len < 1) throw InputError("max_len must be at least 1");
  std::vector<PrimeCycle> out;
  std::vector<int> path;
  for (int s = 0; s < g.num_edges(); ++s) {
    path.assign(1, s);
    // explicit DFS over successor indices, restricted to ids >= s
    std::vector<std::size_t> next(1, 0);
    while (!path.empty()) {
      int cur = path.back();
      auto succ = g.feeds_from(cur);
      std::size_t& k = next.back();
      if (k == 0 && static_cast<int>(path.size()) <= max_len && g.feeds(cur, s) && is_lyndon(path)) {
        out.push_back(path);
      }
      while (k < succ.size() && succ[k] < s) ++k;
      if (k < succ.size() && static_cast<int>(path.size()) < max_len) {
        int nx = succ[k++];
        path.push_back(nx);
        next.push_back(0);
      } else {
        path.pop_back();
        next.pop_back();
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const PrimeCycle& a, const PrimeCycle& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

std::vector<std::vector<int>> feed_components(const FactorGraph& g) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph dg(g.num_edges());
  for (const auto& p : feed_pairs(g)) boost::add_edge(p.from, p.to, dg);
  std::vector<int> comp(g.num_edges());
  int n = g.num_edges() == 0 ? 0 : boost::strong_components(dg, comp.data());
  std::vector<std::vector<int>> out(n);
  for (int e = 0; e < g.num_edges(); ++e) out[comp[e]].push_back(e);
  return out;
}

namespace {

std::int64_t matrix_tree(const Mat& laplacian) {
  int n = static_cast<int>(laplacian.rows());
  if (n <= 1) return 1;
  double d = laplacian.topLeftCorner(n - 1, n - 1).fullPivLu().determinant();
  double r = std::round(d);
  if (std::abs(d - r) > 1e-6 * std::max(1.0, std::abs(d))) throw NumericalError("spanning tree count is not integral");
  return static_cast<std::int64_t>(r);
}

}  // namespace

std::int64_t spanning_tree_count_bipartite(const FactorGraph& g) {
  if (connected_components(g).count != 1) throw InputError("spanning tree count needs a connected graph");
  int nv = g.num_vertices();
  Mat L = Mat::Zero(nv + g.num_factors(), nv + g.num_factors());
  for (int e = 0; e < g.num_edges(); ++e) {
    int i = g.edge(e).vertex, a = nv + g.edge(e).factor;
    L(i, i) += 1;
    L(a, a) += 1;
    L(i, a) -= 1;
    L(a, i) -= 1;
  }
  return matrix_tree(L);
}

std::int64_t spanning_tree_count_graph(const FactorGraph& g) {
  if (!g.is_pairwise()) throw InputError("graph spanning tree count needs degree-2 factors");
  if (connected_components(g).count != 1) throw InputError("spanning tree count needs a connected graph");
  Mat L = Mat::Zero(g.num_vertices(), g.num_vertices());
  for (int a = 0; a < g.num_factors(); ++a) {
    int i = g.members(a)[0], j = g.members(a)[1];
    L(i, i) += 1;
    L(j, j) += 1;
    L(i, j) -= 1;
    L(j, i) -= 1;
  }
  return matrix_tree(L);
}

FactorGraph path_graph(int n) {
  std::vector<std::vector<int>> f;
  for (int i = 0; i + 1 < n; ++i) f.push_back({i, i + 1});
  return FactorGraph(n, f);
}

FactorGraph cycle_graph(int n) {
  if (n < 3) throw InputError("cycle needs at least 3 vertices");
  std::vector<std::vector<int>> f;
  for (int i = 0; i < n; ++i) f.push_back({i, (i + 1) % n});
  return FactorGraph(n, f);
}

FactorGraph complete_graph(int n) {
  std::vector<std::vector<int>> f;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) f.push_back({i, j});
  return FactorGraph(n, f);
}

FactorGraph star_graph(int leaves) {
  std::vector<std::vector<int>> f;
  for (int i = 1; i <= leaves; ++i) f.push_back({0, i});
  return FactorGraph(leaves + 1, f);
}

FactorGraph complete_bipartite_graph(int m, int n) {
  std::vector<std::vector<int>> f;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) f.push_back({i, m + j});
  return FactorGraph(m + n, f);
}

FactorGraph torus_graph(int rows, int cols) {
  if (rows < 2 || cols < 2) throw InputError("torus needs at least 2 rows and 2 columns");
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::vector<int>> f;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      f.push_back({id(r, c), id(r, (c + 1) % cols)});
      f.push_back({id(r, c), id((r + 1) % rows, c)});
    }
  return FactorGraph(rows * cols, f);
}

FactorGraph grid_model_graph(int rows, int cols) {
  if (rows < 2 || cols < 2) throw InputError("grid needs at least 2 rows and 2 columns");
  // variable 2*(r*cols+c) is the edge to the right of (r,c), +1 the edge below
  auto right = [cols](int r, int c) { return 2 * (r * cols + c); };
  auto down = [cols](int r, int c) { return 2 * (r * cols + c) + 1; };
  std::vector<std::vector<int>> f;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      f.push_back({right(r, c), down(r, c), right(r, (c + cols - 1) % cols), down((r + rows - 1) % rows, c)});
    }
  return FactorGraph(2 * rows * cols, f);
}

FactorGraph example_hypergraph() { return FactorGraph(4, {{0, 1}, {0, 1, 2, 3}, {3}}); }

FactorGraph double_triangle_hypergraph() { return FactorGraph(3, {{0, 1, 2}, {0, 1, 2}}); }

}  // namespace bzeta
