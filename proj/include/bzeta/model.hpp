#pragma once

#include <memory>
#include <vector>

#include "bzeta/expfamily.hpp"
#include "bzeta/hypergraph.hpp"

namespace bzeta {

// Vertex and factor families of an inference family on a fixed graph.
class FamilySpec {
 public:
  FamilySpec() = default;
  FamilySpec(const FactorGraph& g, std::vector<VertexSpec> vertices);

  const VertexSpec& vertex_spec(int i) const { return vertices_[i]; }
  const std::vector<VertexSpec>& vertex_specs() const { return vertices_; }
  const ExpFamily& vertex_family(int i) const { return *vertex_fam_[i]; }
  const ExpFamily& factor_family(int a) const { return *factor_fam_[a]; }
  int vertex_dim(int i) const { return vertices_[i].stat_dim(); }
  int max_vertex_dim() const;

  bool all_discrete() const;
  bool all_fixed_mean() const;
  bool all_free_gaussian() const;
  bool all_binary() const;

 private:
  std::vector<VertexSpec> vertices_;
  std::vector<std::shared_ptr<const ExpFamily>> vertex_fam_;
  std::vector<std::shared_ptr<const ExpFamily>> factor_fam_;
};

// Graph, family and the natural parameters theta_bar of each compatibility function.
class ModelSpec {
 public:
  ModelSpec() = default;
  ModelSpec(FactorGraph g, std::vector<VertexSpec> vertices, std::vector<Vec> theta_bar);

  const FactorGraph& graph() const { return graph_; }
  const FamilySpec& family() const { return family_; }
  const Vec& theta_bar(int a) const { return theta_bar_[a]; }
  const std::vector<Vec>& theta_bars() const { return theta_bar_; }

  // message layout: edge e owns coordinates [message_offset(e), +r_{t(e)})
  int message_offset(int e) const { return msg_offset_[e]; }
  int message_dim(int e) const { return family_.vertex_dim(graph_.edge(e).vertex); }
  int total_message_dim() const { return msg_offset_.empty() ? 0 : msg_offset_.back(); }

  // Global precision and shift (Gaussian models only), variables in vertex order, centred for fixed mean.
  std::pair<Mat, Vec> gaussian_global() const;

 private:
  FactorGraph graph_;
  FamilySpec family_;
  std::vector<Vec> theta_bar_;
  std::vector<int> msg_offset_;
};

// Model builders.
// Binary +-1 pairwise: theta_bar_a = (J_a, h_i/d_i, h_j/d_j) on a pairwise graph.
ModelSpec binary_pairwise_model(const FactorGraph& g, const Vec& couplings, const Vec& fields);
// Multinomial model with random natural parameters U(-scale, scale).
ModelSpec random_discrete_model(const FactorGraph& g, const std::vector<VertexSpec>& vertices, double scale,
                                std::uint64_t seed);
// Fixed-mean Gaussian on a pairwise graph: precision diag `diag`, off-diagonal -J_a per factor.
ModelSpec fixed_mean_gaussian_model(const FactorGraph& g, const Vec& couplings, double diag);
// Free-mean Gaussian with precision diag `diag`, coupling -J_a and linear shift h.
ModelSpec gaussian_model(const FactorGraph& g, const Vec& couplings, const Vec& shift, double diag);
// 3x3-style torus grid model: every factor exp(K * sum_{triples} + J * sum_{pairs}).
ModelSpec grid_model(int rows, int cols, double K, double J);
// Single factor exp(K x1x2x3 + c (x1x2 + x1x3 + x2x3)).
ModelSpec triple_factor_model(double K, double c);

}  // namespace bzeta
