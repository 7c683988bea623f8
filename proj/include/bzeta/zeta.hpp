#pragma once

#include <vector>

#include "bzeta/hypergraph.hpp"

namespace bzeta {

// u^alpha_{i->j} for every factor and ordered pair of member positions, shape r_j x r_i.
class EdgeWeights {
 public:
  EdgeWeights() = default;
  EdgeWeights(const FactorGraph& g, std::vector<int> vertex_dims);

  static EdgeWeights uniform(const FactorGraph& g, double u);

  int vertex_dim(int i) const { return dims_[i]; }
  const std::vector<int>& vertex_dims() const { return dims_; }

  // from member position p to member position q of factor a
  Mat& at(int a, int p, int q) { return w_[a][p * deg_[a] + q]; }
  const Mat& at(int a, int p, int q) const { return w_[a][p * deg_[a] + q]; }

  // u^alpha_{i->j} (r_j x r_i) with matching transposes, i.e. the symmetric regime
  bool symmetric(double tol = 1e-12) const;
  double max_norm() const;
  // entrywise operator norms, as scalar weights
  EdgeWeights norms() const;

 private:
  std::vector<int> dims_;
  std::vector<int> deg_;
  std::vector<std::vector<Mat>> w_;
};

struct BlockEdgeMatrix {
  std::vector<int> offsets;  // size |E|+1
  std::vector<int> dims;     // r_{t(e)}
  Mat matrix;

  int size() const { return static_cast<int>(matrix.rows()); }
  auto block(int e, int f) { return matrix.block(offsets[e], offsets[f], dims[e], dims[f]); }
  auto block(int e, int f) const { return matrix.block(offsets[e], offsets[f], dims[e], dims[f]); }
};

// Row block e, column block e', nonzero iff e' feeds e, entry u^{s(e)}_{t(e') -> t(e)}.
BlockEdgeMatrix directed_edge_matrix(const FactorGraph& g, const EdgeWeights& w);
// Scalar, all weights one: the Perron-Frobenius operator.
BlockEdgeMatrix unweighted_edge_matrix(const FactorGraph& g);

// det(I - M(u))
double zeta_inverse(const FactorGraph& g, const EdgeWeights& w);
// det(I - M(u))^{-1}; NumericalError at a pole
double zeta_determinant(const FactorGraph& g, const EdgeWeights& w);

struct EulerProduct {
  double value = 1.0;
  double tail_bound = 0.0;  // bound on |value * det(I-M) - 1|, infinite when rho(M(|u|)) >= 1
  int num_prime_cycles = 0;
};
EulerProduct zeta_euler_truncated(const FactorGraph& g, const EdgeWeights& w, int max_len = 12);

struct IharaBass {
  double vertex_determinant = 0;  // det(I - D + W)
  std::vector<double> factor_determinants;  // det U_alpha
  double product = 0;
  Mat vertex_operator;  // I - D + W
};
IharaBass ihara_bass_factorization(const FactorGraph& g, const EdgeWeights& w);
double ihara_bass_graph(const FactorGraph& g, const EdgeWeights& w);
double classical_ihara_bass(const FactorGraph& g, double u);

// Eigenvalues via the strongly connected components of the block pattern, so acyclic parts give exact zeros.
CVec spectrum(const BlockEdgeMatrix& m);
double spectral_radius(const BlockEdgeMatrix& m);
// an eigenvalue is in R_{>=1} iff |Im| < 1e-9 and Re >= 1 - 1e-9
bool avoids_real_ray(const CVec& eig);

struct PfBounds {
  int k_min = 0;
  int k_max = 0;
};
PfBounds pf_bounds(const FactorGraph& g);

struct HashimotoReport {
  double u = 0;
  double numeric = 0;    // zeta^{-1}(1-u)^{chi-1}
  double predicted = 0;  // chi * kappa(B_H)
  bool graph_form = false;
  double graph_numeric = 0;    // Z^{-1}(1-u)^{-(|E|-|V|+1)}
  double graph_predicted = 0;  // -2^{|E|-|V|+1}(|E|-|V|) kappa(G)
  std::int64_t kappa_bipartite = 0;
  std::int64_t kappa_graph = 0;
};
HashimotoReport hashimoto_limit(const FactorGraph& g, double u = 1.0 - 1e-4);

// max-abs entry of M(u) - (iota T T* - iota)
double iota_decomposition_check(const FactorGraph& g, const EdgeWeights& w);

// greedy nearest matching; largest matched distance (infinite on size mismatch)
double spectrum_distance(const CVec& a, const CVec& b);

}  // namespace bzeta
