#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bzeta/lbp.hpp"

namespace bzeta {

// eta_alpha = (eta-dot_alpha, eta_i for i in alpha)
Vec assemble_factor(const ModelSpec& model, const PseudomarginalPoint& pt, int a);
bool in_local_polytope(const ModelSpec& model, const PseudomarginalPoint& pt);

// Flat coordinates: eta-dot by factor, then eta_i by vertex.
int coordinate_dim(const ModelSpec& model);
Vec flatten(const ModelSpec& model, const PseudomarginalPoint& pt);
PseudomarginalPoint unflatten(const ModelSpec& model, const Vec& x);

double bethe_free_energy(const ModelSpec& model, const PseudomarginalPoint& pt);
// gradient in flat coordinates; its blocks are the two stationarity residuals
Vec bethe_gradient(const ModelSpec& model, const PseudomarginalPoint& pt);

struct HessianReport {
  Mat matrix;
  Vec eigenvalues;  // ascending
  bool positive_definite = false;
  double determinant = 0;
  double asymmetry = 0;
  double min_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
};

HessianReport hessian(const ModelSpec& model, const PseudomarginalPoint& pt);

// u^alpha_{i->j} = Var_{b_j}[phi_j]^{-1} Cov_{b_alpha}[phi_j, phi_i] at a point of L
EdgeWeights point_edge_weights(const ModelSpec& model, const PseudomarginalPoint& pt);
// c^alpha_{i->j} = Var_j^{-1/2} Cov[phi_j, phi_i] Var_i^{-1/2}
EdgeWeights correlation_weights(const ModelSpec& model, const PseudomarginalPoint& pt);

struct BetheZetaReport {
  double lhs = 0;  // det(I - M(u))
  double rhs = 0;  // det Hessian * prod det Var_alpha * prod det Var_i^{1-d_i}
  double residual = 0;
  bool has_corollary = false;  // multinomial or fixed-mean closed form available
  double corollary_rhs = 0;
  double corollary_residual = 0;  // against rhs
};

BetheZetaReport bethe_zeta(const ModelSpec& model, const PseudomarginalPoint& pt);
double bethe_zeta_residual(const ModelSpec& model, const PseudomarginalPoint& pt);

struct PdRegionReport {
  double kappa = 0;
  double max_correlation = 0;
  bool member = false;
};
PdRegionReport pd_region_member(const ModelSpec& model, const PseudomarginalPoint& pt);

struct PdCertificate {
  CVec spectrum_u;
  CVec spectrum_c;
  double lemma_distance = 0;
  bool spectral_condition = false;  // spec M(u) avoids [1, inf)
  bool hessian_pd = false;
  bool implication_holds = false;   // spectral_condition => hessian_pd
};
PdCertificate positive_definiteness_certificate(const ModelSpec& model, const PseudomarginalPoint& pt);

double stationarity_residual(const ModelSpec& model, const PseudomarginalPoint& pt);

// Point of S(Psi) with the given vertex parameters: pure natural parameters pinned to theta_bar.
PseudomarginalPoint lift_to_restricted(const ModelSpec& model, const std::vector<Vec>& vertex_eta);
// Same lift with arbitrary pure natural parameters per factor.
PseudomarginalPoint lift_with_pure(const ModelSpec& model, const std::vector<Vec>& pure_theta,
                                   const std::vector<Vec>& vertex_eta);
double restricted_free_energy(const ModelSpec& model, const std::vector<Vec>& vertex_eta);
Vec restricted_gradient(const ModelSpec& model, const std::vector<Vec>& vertex_eta);
HessianReport restricted_hessian(const ModelSpec& model, const PseudomarginalPoint& pt);
// Same Hessians at the beliefs of a message set, covariances taken straight from natural parameters.
HessianReport hessian_at_messages(const ModelSpec& model, const MessageSet& msgs);
HessianReport restricted_hessian_at_messages(const ModelSpec& model, const MessageSet& msgs);

struct RefineResult {
  PseudomarginalPoint point;
  double gradient_norm = 0;
  int iterations = 0;
  bool converged = false;
};
// Newton on F-hat from the given vertex parameters.
RefineResult minimize_restricted(const ModelSpec& model, const std::vector<Vec>& vertex_eta, double tol = 1e-10,
                                 int max_iters = 100);

// m_{alpha->i} = theta_i + theta_bar^alpha_i - theta^alpha_i
MessageSet messages_from_point(const ModelSpec& model, const PseudomarginalPoint& pt);

enum class Convexity { convex, non_convex, unknown };

struct ConvexityReport {
  Convexity verdict = Convexity::unknown;
  int nullity = 0;
  double kappa = 0;
  double witness_t = 0;
  double witness_min_eigenvalue = 0;
  std::optional<PseudomarginalPoint> witness;
  std::string note;
};
ConvexityReport convexity_classify(const ModelSpec& model);
// Perfectly correlated interior point at level t (discrete or fixed-mean families).
PseudomarginalPoint correlated_point(const ModelSpec& model, double t);

// Random interior point of L.
PseudomarginalPoint random_point(const ModelSpec& model, std::mt19937_64& rng, double spread = 1.0);

// Exact marginals as expectation parameters: enumeration for discrete models,
// covariance inversion for Gaussian ones.
Beliefs exact_beliefs(const ModelSpec& model);
double log_partition_bruteforce(const ModelSpec& model);
// Joint table in mixed radix, vertex 0 slowest.
Vec exact_joint(const ModelSpec& model);
double gibbs_free_energy_bruteforce(const ModelSpec& model, const Vec& table);

struct TreeFactorization {
  Vec table;
  double total = 0;
};
TreeFactorization tree_factorization(const ModelSpec& model, const PseudomarginalPoint& pt);

}  // namespace bzeta
