#include "bzeta/lbp.hpp"

#include <cmath>
#include <random>

namespace bzeta {

Vec vertex_natural(const ModelSpec& model, const Vec& mu, int i) {
  const auto& g = model.graph();
  Vec t = Vec::Zero(model.family().vertex_dim(i));
  for (int f : g.edges_into(i)) t += mu.segment(model.message_offset(f), t.size());
  return t;
}

Vec factor_input(const ModelSpec& model, const Vec& mu, int a) {
  const auto& g = model.graph();
  const auto& fam = model.family().factor_family(a);
  Vec t = model.theta_bar(a);
  auto mem = g.members(a);
  for (int p = 0; p < static_cast<int>(mem.size()); ++p) {
    int r = fam.member_dim(p);
    for (int f : g.edges_into(mem[p])) {
      if (g.edge(f).factor == a) continue;
      t.segment(fam.member_offset(p), r) += mu.segment(model.message_offset(f), r);
    }
  }
  return t;
}

namespace {

Vec cavity_sum(const ModelSpec& model, const Vec& mu, int e) {
  const auto& g = model.graph();
  const auto& ed = g.edge(e);
  Vec s = Vec::Zero(model.message_dim(e));
  for (int f : g.edges_into(ed.vertex))
    if (g.edge(f).factor != ed.factor) s += mu.segment(model.message_offset(f), s.size());
  return s;
}

Vec factor_expectation(const ModelSpec& model, const Vec& mu, int a) {
  const auto& fam = model.family().factor_family(a);
  Vec in = factor_input(model, mu, a);
  if (!fam.in_natural_domain(in))
    throw DomainError("factor " + std::to_string(a) + " belief is not normalizable (edge " +
                      std::to_string(model.graph().first_edge(a)) + ")");
  return fam.to_expectation(in);
}

Vec message_from(const ModelSpec& model, const Vec& mu, const Vec& eta_a, int e) {
  const auto& ed = model.graph().edge(e);
  const auto& fam = model.family().factor_family(ed.factor);
  Vec eta_i = fam.member_part(eta_a, ed.position);
  Vec th;
  try {
    th = model.family().vertex_family(ed.vertex).to_natural(eta_i);
  } catch (const DomainError&) {
    throw DomainError("update on edge " + std::to_string(e) + " left the expectation domain");
  }
  return th - cavity_sum(model, mu, e);
}

}  // namespace

bool messages_valid(const ModelSpec& model, const MessageSet& msgs) {
  if (msgs.mu.size() != model.total_message_dim() || !msgs.mu.allFinite()) return false;
  for (int i = 0; i < model.graph().num_vertices(); ++i)
    if (!model.family().vertex_family(i).in_natural_domain(vertex_natural(model, msgs.mu, i))) return false;
  for (int a = 0; a < model.graph().num_factors(); ++a)
    if (!model.family().factor_family(a).in_natural_domain(factor_input(model, msgs.mu, a))) return false;
  return true;
}

MessageSet init_messages(const ModelSpec& model, InitMode mode, std::uint64_t seed, double scale) {
  MessageSet m;
  m.mu = Vec::Zero(model.total_message_dim());
  if (mode == InitMode::random) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (int k = 0; k < m.mu.size(); ++k) m.mu(k) = u(rng);
    return m;
  }
  if (model.family().all_discrete() || messages_valid(model, m)) return m;

  // copy 0.9/d_i of the model's own vertex parameters onto every incoming edge
  const auto& g = model.graph();
  for (int i = 0; i < g.num_vertices(); ++i) {
    Vec total = Vec::Zero(model.family().vertex_dim(i));
    for (int a : g.vertex_factors(i)) {
      const auto& fam = model.family().factor_family(a);
      int p = g.position_of(a, i);
      total += model.theta_bar(a).segment(fam.member_offset(p), total.size());
    }
    for (int f : g.edges_into(i)) m.mu.segment(model.message_offset(f), total.size()) = (0.9 / g.vertex_degree(i)) * total;
  }
  m.fallback_init = true;
  if (!messages_valid(model, m)) throw DomainError("no valid gaussian initialization found");
  return m;
}

MessageSet update_parallel(const ModelSpec& model, const MessageSet& msgs) {
  const auto& g = model.graph();
  MessageSet out{Vec(msgs.mu.size()), msgs.fallback_init};
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec eta = factor_expectation(model, msgs.mu, a);
    for (int p = 0; p < g.factor_degree(a); ++p) {
      int e = g.edge_id(a, p);
      out.mu.segment(model.message_offset(e), model.message_dim(e)) = message_from(model, msgs.mu, eta, e);
    }
  }
  return out;
}

namespace {

MessageSet sequential_pass(const ModelSpec& model, const MessageSet& msgs, std::span<const int> order, double eps) {
  const auto& g = model.graph();
  MessageSet out = msgs;
  auto one = [&](int e) {
    if (e < 0 || e >= g.num_edges()) throw InputError("sequential order names an unknown edge");
    Vec eta = factor_expectation(model, out.mu, g.edge(e).factor);
    auto seg = out.mu.segment(model.message_offset(e), model.message_dim(e));
    Vec nw = message_from(model, out.mu, eta, e);
    seg = (1.0 - eps) * nw + eps * Vec(seg);
  };
  if (order.empty()) {
    for (int e = 0; e < g.num_edges(); ++e) one(e);
  } else {
    for (int e : order) one(e);
  }
  return out;
}

}  // namespace

MessageSet update_sequential(const ModelSpec& model, const MessageSet& msgs, std::span<const int> order) {
  return sequential_pass(model, msgs, order, 0.0);
}

MessageSet update_damped(const ModelSpec& model, const MessageSet& msgs, double eps) {
  if (eps < 0.0 || eps >= 1.0) throw InputError("damping must lie in [0, 1)");
  MessageSet t = update_parallel(model, msgs);
  t.mu = (1.0 - eps) * t.mu + eps * msgs.mu;
  return t;
}

RunResult run(const ModelSpec& model, MessageSet init, const RunOptions& opt) {
  if (opt.tol <= 0) throw InputError("tolerance must be positive");
  if (opt.damping < 0.0 || opt.damping >= 1.0) throw InputError("damping must lie in [0, 1)");
  if (init.mu.size() != model.total_message_dim()) throw InputError("message set does not match the model");
  RunResult r;
  r.messages = std::move(init);
  for (int it = 1; it <= opt.max_iters; ++it) {
    MessageSet next = opt.schedule == Schedule::parallel ? update_damped(model, r.messages, opt.damping)
                                                         : sequential_pass(model, r.messages, {}, opt.damping);
    double res = next.mu.size() ? (next.mu - r.messages.mu).cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(res)) throw NumericalError("messages diverged to non-finite values");
    r.messages = std::move(next);
    r.residuals.push_back(res);
    r.iterations = it;
    if (res < opt.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

PseudomarginalPoint Beliefs::point(const ModelSpec& model) const {
  PseudomarginalPoint p;
  for (int a = 0; a < static_cast<int>(factor.size()); ++a)
    p.pure.push_back(factor[a].head(model.family().factor_family(a).pure_dim()));
  p.vertex = vertex;
  return p;
}

Beliefs beliefs(const ModelSpec& model, const MessageSet& msgs) {
  const auto& g = model.graph();
  Beliefs b;
  for (int i = 0; i < g.num_vertices(); ++i) {
    Vec th = vertex_natural(model, msgs.mu, i);
    const auto& fam = model.family().vertex_family(i);
    if (!fam.in_natural_domain(th)) throw DomainError("vertex " + g.vertex_label(i) + " belief is not normalizable");
    b.vertex.push_back(fam.to_expectation(th));
  }
  for (int a = 0; a < g.num_factors(); ++a) {
    b.factor.push_back(factor_expectation(model, msgs.mu, a));
    const auto& fam = model.family().factor_family(a);
    for (int p = 0; p < g.factor_degree(a); ++p)
      b.consistency = std::max(
          b.consistency, (fam.member_part(b.factor[a], p) - b.vertex[g.members(a)[p]]).cwiseAbs().maxCoeff());
  }
  return b;
}

double fixed_point_residual(const ModelSpec& model, const MessageSet& msgs) {
  if (msgs.mu.size() == 0) return 0.0;
  return (update_parallel(model, msgs).mu - msgs.mu).cwiseAbs().maxCoeff();
}

EdgeWeights belief_edge_weights(const ModelSpec& model, const MessageSet& msgs) {
  const auto& g = model.graph();
  std::vector<int> dims;
  for (int i = 0; i < g.num_vertices(); ++i) dims.push_back(model.family().vertex_dim(i));
  EdgeWeights w(g, dims);
  std::vector<Mat> vinv;
  for (int i = 0; i < g.num_vertices(); ++i) {
    const auto& fam = model.family().vertex_family(i);
    vinv.push_back(checked_inverse(fam.covariance(vertex_natural(model, msgs.mu, i)), "vertex variance"));
  }
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    Mat cov = fam.covariance(factor_input(model, msgs.mu, a));
    auto mem = g.members(a);
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = 0; q < g.factor_degree(a); ++q) {
        if (p == q) continue;
        // u^a_{mem[p] -> mem[q]} = Var_q^{-1} Cov[phi_q, phi_p]
        w.at(a, p, q) = vinv[mem[q]] * cov.block(fam.member_offset(q), fam.member_offset(p), fam.member_dim(q),
                                                 fam.member_dim(p));
      }
  }
  return w;
}

Linearization linearization(const ModelSpec& model, const MessageSet& msgs) {
  Linearization lin;
  lin.residual = fixed_point_residual(model, msgs);
  lin.at_fixed_point = lin.residual < 1e-6;
  lin.matrix = directed_edge_matrix(model.graph(), belief_edge_weights(model, msgs));
  return lin;
}

Mat finite_difference_jacobian(const ModelSpec& model, const MessageSet& msgs, double step) {
  int n = static_cast<int>(msgs.mu.size());
  Mat j(n, n);
  for (int k = 0; k < n; ++k) {
    MessageSet up = msgs, dn = msgs;
    up.mu(k) += step;
    dn.mu(k) -= step;
    j.col(k) = (update_parallel(model, up).mu - update_parallel(model, dn).mu) / (2.0 * step);
  }
  return j;
}

}  // namespace bzeta
