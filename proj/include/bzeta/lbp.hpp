#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bzeta/model.hpp"
#include "bzeta/zeta.hpp"

namespace bzeta {

// mu_{alpha->i} stacked in directed-edge order (see ModelSpec::message_offset).
struct MessageSet {
  Vec mu;
  bool fallback_init = false;  // Gaussian zero init replaced by a precision split
};

enum class InitMode { zeros, random };
enum class Schedule { parallel, sequential };

MessageSet init_messages(const ModelSpec& model, InitMode mode, std::uint64_t seed = 0, double scale = 1.0);

// theta_i = sum of incoming messages lies in Theta_i for every vertex
bool messages_valid(const ModelSpec& model, const MessageSet& msgs);

// Natural parameters fed into factor a: (theta_bar_a, theta_bar^a_j + sum_{beta != a} mu_{beta->j}).
Vec factor_input(const ModelSpec& model, const Vec& mu, int a);
Vec vertex_natural(const ModelSpec& model, const Vec& mu, int i);

MessageSet update_parallel(const ModelSpec& model, const MessageSet& msgs);
MessageSet update_sequential(const ModelSpec& model, const MessageSet& msgs, std::span<const int> order = {});
MessageSet update_damped(const ModelSpec& model, const MessageSet& msgs, double eps);

struct RunOptions {
  Schedule schedule = Schedule::parallel;
  double damping = 0.0;
  double tol = 1e-3;
  int max_iters = 30;
};

struct RunResult {
  MessageSet messages;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;
};

RunResult run(const ModelSpec& model, MessageSet init, const RunOptions& opt);

struct PseudomarginalPoint {
  std::vector<Vec> pure;    // eta-dot per factor
  std::vector<Vec> vertex;  // eta_i per vertex
};

struct Beliefs {
  std::vector<Vec> factor;  // full eta_alpha of each factor belief
  std::vector<Vec> vertex;  // eta_i of each vertex belief
  double consistency = 0;   // max |vertex part of eta_alpha - eta_i|
  PseudomarginalPoint point(const ModelSpec& model) const;
};

Beliefs beliefs(const ModelSpec& model, const MessageSet& msgs);

// ||T(mu) - mu||_inf
double fixed_point_residual(const ModelSpec& model, const MessageSet& msgs);

struct Linearization {
  BlockEdgeMatrix matrix;
  double residual = 0;
  bool at_fixed_point = false;  // residual < 1e-6
};

// u^alpha_{j->i} = Var_{b_i}[phi_i]^{-1} Cov_{b_alpha}[phi_i, phi_j] from the current beliefs
EdgeWeights belief_edge_weights(const ModelSpec& model, const MessageSet& msgs);
Linearization linearization(const ModelSpec& model, const MessageSet& msgs);
// central differences of T, column by column
Mat finite_difference_jacobian(const ModelSpec& model, const MessageSet& msgs, double step = 1e-6);

}  // namespace bzeta
