#include "bzeta/bethe.hpp"

#include <cmath>
#include <numbers>

namespace bzeta {

namespace {

std::vector<int> pure_offsets(const ModelSpec& model) {
  std::vector<int> off(1, 0);
  for (int a = 0; a < model.graph().num_factors(); ++a)
    off.push_back(off.back() + model.family().factor_family(a).pure_dim());
  return off;
}

std::vector<int> vertex_offsets(const ModelSpec& model, int start) {
  std::vector<int> off(1, start);
  for (int i = 0; i < model.graph().num_vertices(); ++i) off.push_back(off.back() + model.family().vertex_dim(i));
  return off;
}

Vec vertex_block(const ModelSpec& model, const std::vector<Vec>& vertex_eta, int a) {
  const auto& fam = model.family().factor_family(a);
  Vec v(fam.dim() - fam.pure_dim());
  auto mem = model.graph().members(a);
  for (std::size_t p = 0; p < mem.size(); ++p)
    v.segment(fam.member_offset(p) - fam.pure_dim(), fam.member_dim(p)) = vertex_eta[mem[p]];
  return v;
}

double relative_gap(double a, double b) {
  double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace

Vec assemble_factor(const ModelSpec& model, const PseudomarginalPoint& pt, int a) {
  const auto& fam = model.family().factor_family(a);
  Vec eta(fam.dim());
  eta.head(fam.pure_dim()) = pt.pure[a];
  eta.tail(fam.dim() - fam.pure_dim()) = vertex_block(model, pt.vertex, a);
  return eta;
}

bool in_local_polytope(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  if (static_cast<int>(pt.pure.size()) != g.num_factors() || static_cast<int>(pt.vertex.size()) != g.num_vertices())
    return false;
  for (int i = 0; i < g.num_vertices(); ++i)
    if (!model.family().vertex_family(i).in_expectation_domain(pt.vertex[i])) return false;
  for (int a = 0; a < g.num_factors(); ++a)
    if (!model.family().factor_family(a).in_expectation_domain(assemble_factor(model, pt, a))) return false;
  return true;
}

int coordinate_dim(const ModelSpec& model) {
  return pure_offsets(model).back() + vertex_offsets(model, 0).back();
}

Vec flatten(const ModelSpec& model, const PseudomarginalPoint& pt) {
  auto po = pure_offsets(model);
  auto vo = vertex_offsets(model, po.back());
  Vec x(vo.back());
  for (int a = 0; a < model.graph().num_factors(); ++a) x.segment(po[a], po[a + 1] - po[a]) = pt.pure[a];
  for (int i = 0; i < model.graph().num_vertices(); ++i) x.segment(vo[i], vo[i + 1] - vo[i]) = pt.vertex[i];
  return x;
}

PseudomarginalPoint unflatten(const ModelSpec& model, const Vec& x) {
  auto po = pure_offsets(model);
  auto vo = vertex_offsets(model, po.back());
  if (x.size() != vo.back()) throw InputError("flat point has wrong dimension");
  PseudomarginalPoint pt;
  for (int a = 0; a < model.graph().num_factors(); ++a) pt.pure.push_back(x.segment(po[a], po[a + 1] - po[a]));
  for (int i = 0; i < model.graph().num_vertices(); ++i) pt.vertex.push_back(x.segment(vo[i], vo[i + 1] - vo[i]));
  return pt;
}

double bethe_free_energy(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  double f = 0;
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec eta = assemble_factor(model, pt, a);
    f += -model.theta_bar(a).dot(eta) + model.family().factor_family(a).legendre(eta);
  }
  for (int i = 0; i < g.num_vertices(); ++i)
    f += double(1 - g.vertex_degree(i)) * model.family().vertex_family(i).legendre(pt.vertex[i]);
  return f;
}

Vec bethe_gradient(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  auto po = pure_offsets(model);
  auto vo = vertex_offsets(model, po.back());
  Vec grad = Vec::Zero(vo.back());
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    Vec diff = fam.to_natural(assemble_factor(model, pt, a)) - model.theta_bar(a);
    grad.segment(po[a], fam.pure_dim()) = diff.head(fam.pure_dim());
    auto mem = g.members(a);
    for (std::size_t p = 0; p < mem.size(); ++p)
      grad.segment(vo[mem[p]], fam.member_dim(p)) += fam.member_part(diff, p);
  }
  for (int i = 0; i < g.num_vertices(); ++i)
    grad.segment(vo[i], vo[i + 1] - vo[i]) +=
        double(1 - g.vertex_degree(i)) * model.family().vertex_family(i).to_natural(pt.vertex[i]);
  return grad;
}

namespace {

HessianReport finish_report(Mat h) {
  HessianReport r;
  r.asymmetry = h.size() ? (h - h.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (r.asymmetry > 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw NumericalError("Hessian assembly is not symmetric");
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hessian eigen decomposition failed");
  r.eigenvalues = es.eigenvalues();
  r.positive_definite = r.eigenvalues.size() == 0 || r.eigenvalues(0) > 0;
  r.determinant = h.size() ? h.partialPivLu().determinant() : 1.0;
  r.matrix = std::move(h);
  return r;
}

}  // namespace

namespace {

Mat assemble_hessian(const ModelSpec& model, const std::vector<Mat>& factor_inv, const std::vector<Mat>& vertex_inv) {
  const auto& g = model.graph();
  auto po = pure_offsets(model);
  auto vo = vertex_offsets(model, po.back());
  Mat h = Mat::Zero(vo.back(), vo.back());
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    const Mat& local = factor_inv[a];
    std::vector<int> map;
    for (int k = 0; k < fam.pure_dim(); ++k) map.push_back(po[a] + k);
    auto mem = g.members(a);
    for (std::size_t p = 0; p < mem.size(); ++p)
      for (int c = 0; c < fam.member_dim(p); ++c) map.push_back(vo[mem[p]] + c);
    for (int r = 0; r < fam.dim(); ++r)
      for (int c = 0; c < fam.dim(); ++c) h(map[r], map[c]) += local(r, c);
  }
  for (int i = 0; i < g.num_vertices(); ++i) {
    int r = vo[i + 1] - vo[i];
    h.block(vo[i], vo[i], r, r) += double(1 - g.vertex_degree(i)) * vertex_inv[i];
  }
  return h;
}

HessianReport schur_restrict(const ModelSpec& model, const Mat& full);

}  // namespace

HessianReport hessian(const ModelSpec& model, const PseudomarginalPoint& pt) {
  std::vector<Mat> fc, vc;
  for (int a = 0; a < model.graph().num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    fc.push_back(fam.inverse_covariance(fam.to_natural(assemble_factor(model, pt, a))));
  }
  for (int i = 0; i < model.graph().num_vertices(); ++i) {
    const auto& fam = model.family().vertex_family(i);
    vc.push_back(fam.inverse_covariance(fam.to_natural(pt.vertex[i])));
  }
  return finish_report(assemble_hessian(model, fc, vc));
}

HessianReport hessian_at_messages(const ModelSpec& model, const MessageSet& msgs) {
  std::vector<Mat> fc, vc;
  for (int a = 0; a < model.graph().num_factors(); ++a)
    fc.push_back(model.family().factor_family(a).inverse_covariance(factor_input(model, msgs.mu, a)));
  for (int i = 0; i < model.graph().num_vertices(); ++i)
    vc.push_back(model.family().vertex_family(i).inverse_covariance(vertex_natural(model, msgs.mu, i)));
  return finish_report(assemble_hessian(model, fc, vc));
}

HessianReport restricted_hessian_at_messages(const ModelSpec& model, const MessageSet& msgs) {
  return schur_restrict(model, hessian_at_messages(model, msgs).matrix);
}

EdgeWeights point_edge_weights(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  std::vector<int> dims;
  std::vector<Mat> vinv;
  for (int i = 0; i < g.num_vertices(); ++i) {
    dims.push_back(model.family().vertex_dim(i));
    vinv.push_back(checked_inverse(model.family().vertex_family(i).covariance_at(pt.vertex[i]), "vertex variance"));
  }
  EdgeWeights w(g, dims);
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    Mat cov = fam.covariance_at(assemble_factor(model, pt, a));
    auto mem = g.members(a);
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = 0; q < g.factor_degree(a); ++q)
        if (p != q)
          w.at(a, p, q) = vinv[mem[q]] * cov.block(fam.member_offset(q), fam.member_offset(p), fam.member_dim(q),
                                                   fam.member_dim(p));
  }
  return w;
}

EdgeWeights correlation_weights(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  std::vector<int> dims;
  for (int i = 0; i < g.num_vertices(); ++i) dims.push_back(model.family().vertex_dim(i));
  EdgeWeights w(g, dims);
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    Mat cov = fam.covariance_at(assemble_factor(model, pt, a));
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = 0; q < g.factor_degree(a); ++q)
        if (p != q) w.at(a, p, q) = correlation_from_covariance(fam, cov, p, q);
  }
  return w;
}

BetheZetaReport bethe_zeta(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  BetheZetaReport r;
  r.lhs = zeta_inverse(g, point_edge_weights(model, pt));
  HessianReport h = hessian(model, pt);
  double rhs = h.determinant;
  for (int a = 0; a < g.num_factors(); ++a)
    rhs *= model.family().factor_family(a).covariance_at(assemble_factor(model, pt, a)).determinant();
  for (int i = 0; i < g.num_vertices(); ++i)
    rhs *= std::pow(model.family().vertex_family(i).covariance_at(pt.vertex[i]).determinant(), 1 - g.vertex_degree(i));
  r.rhs = rhs;
  r.residual = relative_gap(r.lhs, r.rhs);

  if (model.family().all_discrete()) {
    double c = h.determinant;
    for (int a = 0; a < g.num_factors(); ++a) {
      const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a));
      c *= fam.determinant_constant() * fam.probabilities_from_expectation(assemble_factor(model, pt, a)).prod();
    }
    for (int i = 0; i < g.num_vertices(); ++i) {
      const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().vertex_family(i));
      c *= std::pow(fam.determinant_constant() * fam.probabilities_from_expectation(pt.vertex[i]).prod(),
                    1 - g.vertex_degree(i));
    }
    r.has_corollary = true;
    r.corollary_rhs = c;
  } else if (model.family().all_fixed_mean() && g.is_pairwise()) {
    double c = h.determinant * std::pow(2.0, g.num_vertices());
    for (int i = 0; i < g.num_vertices(); ++i) c *= std::pow(pt.vertex[i](0), 2.0 * (1 - g.vertex_degree(i)));
    for (int a = 0; a < g.num_factors(); ++a) {
      double eii = pt.vertex[g.members(a)[0]](0), ejj = pt.vertex[g.members(a)[1]](0), eij = pt.pure[a](0);
      c *= std::pow(eii * ejj - eij * eij, 3);
    }
    r.has_corollary = true;
    r.corollary_rhs = c;
  }
  if (r.has_corollary) r.corollary_residual = relative_gap(r.corollary_rhs, r.rhs);
  return r;
}

double bethe_zeta_residual(const ModelSpec& model, const PseudomarginalPoint& pt) { return bethe_zeta(model, pt).residual; }

PdRegionReport pd_region_member(const ModelSpec& model, const PseudomarginalPoint& pt) {
  PdRegionReport r;
  r.kappa = spectral_radius(unweighted_edge_matrix(model.graph()));
  EdgeWeights c = correlation_weights(model, pt);
  r.max_correlation = c.max_norm();
  r.member = r.kappa == 0.0 || r.max_correlation < 1.0 / r.kappa;
  return r;
}

PdCertificate positive_definiteness_certificate(const ModelSpec& model, const PseudomarginalPoint& pt) {
  PdCertificate r;
  r.spectrum_u = spectrum(directed_edge_matrix(model.graph(), point_edge_weights(model, pt)));
  r.spectrum_c = spectrum(directed_edge_matrix(model.graph(), correlation_weights(model, pt)));
  r.lemma_distance = spectrum_distance(r.spectrum_u, r.spectrum_c);
  r.spectral_condition = avoids_real_ray(r.spectrum_u);
  r.hessian_pd = hessian(model, pt).positive_definite;
  r.implication_holds = !r.spectral_condition || r.hessian_pd;
  return r;
}

double stationarity_residual(const ModelSpec& model, const PseudomarginalPoint& pt) {
  Vec gr = bethe_gradient(model, pt);
  return gr.size() ? gr.cwiseAbs().maxCoeff() : 0.0;
}

namespace {

// Solve for the vertex natural parameters of factor a so that its vertex marginals hit `target`.
Vec lift_factor(const ModelSpec& model, int a, const Vec& pure, const std::vector<Vec>& vertex_eta) {
  const auto& fam = model.family().factor_family(a);
  int np = fam.pure_dim(), nv = fam.dim() - np;
  Vec target = vertex_block(model, vertex_eta, a);
  Vec theta(fam.dim());
  theta.head(np) = pure;
  auto mem = model.graph().members(a);
  for (std::size_t p = 0; p < mem.size(); ++p)
    theta.segment(fam.member_offset(p), fam.member_dim(p)) =
        model.family().vertex_family(mem[p]).to_natural(vertex_eta[mem[p]]);
  // product start can be invalid for gaussians with strong pure coupling
  for (int k = 0; k < 30 && !fam.in_natural_domain(theta); ++k) theta.tail(nv) *= 2.0;
  if (!fam.in_natural_domain(theta)) throw NumericalError("no valid start for the lift on factor " + std::to_string(a));
  auto objective = [&](const Vec& th) { return fam.log_partition(th) - th.tail(nv).dot(target); };
  for (int it = 0; it < 100; ++it) {
    Vec eta = fam.to_expectation(theta);
    Vec grad = eta.tail(nv) - target;
    if (grad.cwiseAbs().maxCoeff() < 1e-10) return eta;
    Mat hv = fam.covariance(theta).bottomRightCorner(nv, nv);
    Vec d = -hv.ldlt().solve(grad);
    double g0 = objective(theta), slope = grad.dot(d);
    double s = 1.0;
    bool ok = false;
    while (s > 1e-12) {
      Vec cand = theta;
      cand.tail(nv) += s * d;
      if (fam.in_natural_domain(cand) && objective(cand) <= g0 + 1e-4 * s * slope + 1e-13 * (1 + std::abs(g0))) {
        theta = cand;
        ok = true;
        break;
      }
      s *= 0.5;
    }
    if (!ok) throw NumericalError("lift Newton stalled on factor " + std::to_string(a));
  }
  Vec eta = fam.to_expectation(theta);
  if ((eta.tail(nv) - target).cwiseAbs().maxCoeff() < 1e-8) return eta;
  throw NumericalError("lift Newton did not converge on factor " + std::to_string(a));
}

}  // namespace

PseudomarginalPoint lift_with_pure(const ModelSpec& model, const std::vector<Vec>& pure_theta,
                                   const std::vector<Vec>& vertex_eta) {
  const auto& g = model.graph();
  for (int i = 0; i < g.num_vertices(); ++i)
    if (!model.family().vertex_family(i).in_expectation_domain(vertex_eta[i]))
      throw DomainError("vertex " + g.vertex_label(i) + " parameter outside the expectation domain");
  PseudomarginalPoint pt;
  pt.vertex = vertex_eta;
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec eta = lift_factor(model, a, pure_theta[a], vertex_eta);
    pt.pure.push_back(eta.head(model.family().factor_family(a).pure_dim()));
  }
  return pt;
}

PseudomarginalPoint lift_to_restricted(const ModelSpec& model, const std::vector<Vec>& vertex_eta) {
  std::vector<Vec> pure;
  for (int a = 0; a < model.graph().num_factors(); ++a)
    pure.push_back(model.theta_bar(a).head(model.family().factor_family(a).pure_dim()));
  return lift_with_pure(model, pure, vertex_eta);
}

double restricted_free_energy(const ModelSpec& model, const std::vector<Vec>& vertex_eta) {
  return bethe_free_energy(model, lift_to_restricted(model, vertex_eta));
}

Vec restricted_gradient(const ModelSpec& model, const std::vector<Vec>& vertex_eta) {
  Vec gr = bethe_gradient(model, lift_to_restricted(model, vertex_eta));
  int np = pure_offsets(model).back();
  return gr.tail(gr.size() - np);
}

namespace {

HessianReport schur_restrict(const ModelSpec& model, const Mat& full) {
  int np = pure_offsets(model).back();
  int nv = static_cast<int>(full.rows()) - np;
  Mat xvv = full.bottomRightCorner(nv, nv);
  if (np == 0) return finish_report(xvv);
  Mat xff = full.topLeftCorner(np, np);
  Mat xfv = full.topRightCorner(np, nv);
  Eigen::FullPivLU<Mat> lu(xff);
  if (!lu.isInvertible()) throw NumericalError("X_FF block is singular");
  Mat s = xvv - xfv.transpose() * lu.solve(xfv);
  return finish_report(0.5 * (s + s.transpose()));
}

}  // namespace

HessianReport restricted_hessian(const ModelSpec& model, const PseudomarginalPoint& pt) {
  return schur_restrict(model, hessian(model, pt).matrix);
}

RefineResult minimize_restricted(const ModelSpec& model, const std::vector<Vec>& vertex_eta, double tol,
                                 int max_iters) {
  const auto& g = model.graph();
  auto vo = vertex_offsets(model, 0);
  auto split = [&](const Vec& x) {
    std::vector<Vec> v;
    for (int i = 0; i < g.num_vertices(); ++i) v.push_back(x.segment(vo[i], vo[i + 1] - vo[i]));
    return v;
  };
  Vec x(vo.back());
  for (int i = 0; i < g.num_vertices(); ++i) x.segment(vo[i], vo[i + 1] - vo[i]) = vertex_eta[i];
  auto value = [&](const Vec& y, double& out) {
    try {
      out = restricted_free_energy(model, split(y));
      return std::isfinite(out);
    } catch (const std::exception&) {
      return false;
    }
  };

  RefineResult r;
  for (r.iterations = 0; r.iterations <= max_iters; ++r.iterations) {
    r.point = lift_to_restricted(model, split(x));
    Vec gr = bethe_gradient(model, r.point).tail(vo.back());
    r.gradient_norm = gr.size() ? gr.cwiseAbs().maxCoeff() : 0.0;
    if (r.gradient_norm < tol) {
      r.converged = true;
      break;
    }
    if (r.iterations == max_iters) break;
    HessianReport h = restricted_hessian(model, r.point);
    Vec d = h.positive_definite ? Vec(-h.matrix.ldlt().solve(gr)) : Vec(-gr);
    if (gr.dot(d) >= 0) d = -gr;
    double f0 = 0;
    value(x, f0);
    double s = 1.0, f1 = 0;
    bool ok = false;
    while (s > 1e-12) {
      Vec cand = x + s * d;
      if (value(cand, f1) && (f1 <= f0 + 1e-4 * s * gr.dot(d) || (r.gradient_norm < 1e-6 && s == 1.0))) {
        x = cand;
        ok = true;
        break;
      }
      s *= 0.5;
    }
    if (!ok) break;
  }
  return r;
}

MessageSet messages_from_point(const ModelSpec& model, const PseudomarginalPoint& pt) {
  const auto& g = model.graph();
  MessageSet m;
  m.mu = Vec::Zero(model.total_message_dim());
  std::vector<Vec> th_v;
  for (int i = 0; i < g.num_vertices(); ++i) th_v.push_back(model.family().vertex_family(i).to_natural(pt.vertex[i]));
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& fam = model.family().factor_family(a);
    Vec th = fam.to_natural(assemble_factor(model, pt, a));
    for (int p = 0; p < g.factor_degree(a); ++p) {
      int e = g.edge_id(a, p), i = g.members(a)[p];
      m.mu.segment(model.message_offset(e), fam.member_dim(p)) =
          th_v[i] + fam.member_part(model.theta_bar(a), p) - fam.member_part(th, p);
    }
  }
  return m;
}

PseudomarginalPoint correlated_point(const ModelSpec& model, double t) {
  const auto& g = model.graph();
  PseudomarginalPoint pt;
  if (model.family().all_discrete()) {
    for (int i = 0; i < g.num_vertices(); ++i) {
      const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().vertex_family(i));
      int n = fam.num_states();
      Vec p = Vec::Constant(n, (1.0 - t) / n);
      p(0) += 0.5 * t;
      p(1) += 0.5 * t;
      pt.vertex.push_back(fam.design().transpose() * p);
    }
    for (int a = 0; a < g.num_factors(); ++a) {
      const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a));
      int n = fam.num_states();
      Vec p = Vec::Constant(n, (1.0 - t) / n);
      p(fam.row_of(std::vector<int>(fam.num_members(), 0))) += 0.5 * t;
      p(fam.row_of(std::vector<int>(fam.num_members(), 1))) += 0.5 * t;
      pt.pure.push_back((fam.design().transpose() * p).head(fam.pure_dim()));
    }
    return pt;
  }
  if (model.family().all_fixed_mean()) {
    for (int i = 0; i < g.num_vertices(); ++i) pt.vertex.push_back(Vec::Ones(1));
    for (int a = 0; a < g.num_factors(); ++a) pt.pure.push_back(Vec::Constant(model.family().factor_family(a).pure_dim(), t));
    return pt;
  }
  throw InputError("correlated witness points exist only for discrete and fixed-mean gaussian families");
}

ConvexityReport convexity_classify(const ModelSpec& model) {
  const auto& g = model.graph();
  if (connected_components(g).count != 1) throw InputError("convexity classification needs a connected graph");
  ConvexityReport r;
  r.nullity = nullity(g);
  r.kappa = spectral_radius(unweighted_edge_matrix(g));
  if (r.nullity <= 1) {
    r.verdict = Convexity::convex;
    r.note = "at most one cycle: kappa <= 1, the whole local polytope is in the positive definite region";
    return r;
  }
  if (!model.family().all_discrete() && !model.family().all_fixed_mean()) {
    r.note = "no witness construction for this family";
    return r;
  }
  for (int k = 1; k <= 6; ++k) {
    double t = 1.0 - std::pow(10.0, -k);
    PseudomarginalPoint pt = correlated_point(model, t);
    HessianReport h = hessian(model, pt);
    r.witness_t = t;
    r.witness_min_eigenvalue = h.min_eigenvalue();
    if (h.min_eigenvalue() < -1e-8) {
      r.verdict = Convexity::non_convex;
      r.witness = pt;
      r.note = "negative Hessian eigenvalue at the correlated point";
      return r;
    }
  }
  r.note = "witness scan reached t = 1 - 1e-6 without a negative eigenvalue";
  return r;
}

PseudomarginalPoint random_point(const ModelSpec& model, std::mt19937_64& rng, double spread) {
  const auto& g = model.graph();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  PseudomarginalPoint pt;
  if (model.family().all_discrete()) {
    std::vector<Vec> ve;
    for (int i = 0; i < g.num_vertices(); ++i) {
      const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().vertex_family(i));
      Vec p(fam.num_states());
      for (int k = 0; k < p.size(); ++k) p(k) = 0.2 + u01(rng);
      p /= p.sum();
      ve.push_back(fam.design().transpose() * p);
    }
    std::vector<Vec> pure;
    for (int a = 0; a < g.num_factors(); ++a) {
      Vec t(model.family().factor_family(a).pure_dim());
      for (int k = 0; k < t.size(); ++k) t(k) = spread * (2 * u01(rng) - 1);
      pure.push_back(t);
    }
    // strong pure parameters can push a factor belief numerically onto the simplex boundary
    for (int attempt = 0; attempt < 20; ++attempt) {
      PseudomarginalPoint lifted = lift_with_pure(model, pure, ve);
      bool inside = true;
      for (int a = 0; a < g.num_factors() && inside; ++a)
        inside = model.family().factor_family(a).in_expectation_domain(assemble_factor(model, lifted, a));
      if (inside) return lifted;
      for (auto& t : pure) t *= 0.5;
    }
    throw NumericalError("random point: no interior lift found");
  }
  bool fixed = model.family().all_fixed_mean();
  if (!fixed && !model.family().all_free_gaussian()) throw InputError("mixed families are not supported");
  Vec mean(g.num_vertices()), sd(g.num_vertices());
  for (int i = 0; i < g.num_vertices(); ++i) {
    double var = 0.5 + 1.5 * u01(rng);
    sd(i) = std::sqrt(var);
    mean(i) = fixed ? 0.0 : 2 * u01(rng) - 1;
    pt.vertex.push_back(fixed ? Vec::Constant(1, var) : Vec((Vec(2) << mean(i), var + mean(i) * mean(i)).finished()));
  }
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec p(model.family().factor_family(a).pure_dim());
    if (p.size()) {
      int i = g.members(a)[0], j = g.members(a)[1];
      double rho = 0.9 * (2 * u01(rng) - 1);
      p(0) = rho * sd(i) * sd(j) + mean(i) * mean(j);
    }
    pt.pure.push_back(p);
  }
  return pt;
}

namespace {

struct Enumerator {
  std::vector<int> radix;
  long total = 1;
  explicit Enumerator(const ModelSpec& model) {
    if (!model.family().all_discrete()) throw InputError("brute-force enumeration needs a discrete model");
    for (const auto& v : model.family().vertex_specs()) {
      radix.push_back(v.states);
      total *= v.states;
      if (total > 1000000) throw InputError("state space too large for enumeration");
    }
  }
  void decode(long idx, std::vector<int>& x) const {
    x.resize(radix.size());
    for (int i = static_cast<int>(radix.size()) - 1; i >= 0; --i) {
      x[i] = static_cast<int>(idx % radix[i]);
      idx /= radix[i];
    }
  }
};

int factor_row(const ModelSpec& model, int a, const std::vector<int>& x) {
  const auto& fam = dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a));
  std::vector<int> s;
  for (int i : model.graph().members(a)) s.push_back(x[i]);
  return fam.row_of(s);
}

Vec log_weights_table(const ModelSpec& model) {
  Enumerator en(model);
  Vec l(en.total);
  std::vector<int> x;
  std::vector<Vec> rows;
  for (int a = 0; a < model.graph().num_factors(); ++a)
    rows.push_back(dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a)).design() * model.theta_bar(a));
  for (long k = 0; k < en.total; ++k) {
    en.decode(k, x);
    double s = 0;
    for (int a = 0; a < model.graph().num_factors(); ++a) s += rows[a](factor_row(model, a, x));
    l(k) = s;
  }
  return l;
}

}  // namespace

Vec exact_joint(const ModelSpec& model) {
  Vec l = log_weights_table(model);
  double m = l.maxCoeff();
  Vec p = (l.array() - m).exp().matrix();
  return p / p.sum();
}

double log_partition_bruteforce(const ModelSpec& model) {
  if (!model.family().all_discrete()) {
    auto [p, h] = model.gaussian_global();
    Eigen::LLT<Mat> llt(p);
    int n = static_cast<int>(p.rows());
    return 0.5 * h.dot(llt.solve(h)) + 0.5 * n * std::log(2 * std::numbers::pi) -
           llt.matrixLLT().diagonal().array().log().sum();
  }
  Vec l = log_weights_table(model);
  double m = l.maxCoeff();
  return m + std::log((l.array() - m).exp().sum());
}

double gibbs_free_energy_bruteforce(const ModelSpec& model, const Vec& table) {
  Vec l = log_weights_table(model);
  if (table.size() != l.size()) throw InputError("joint table has wrong size");
  double f = 0;
  for (long k = 0; k < l.size(); ++k)
    if (table(k) > 0) f += table(k) * (std::log(table(k)) - l(k));
  return f;
}

TreeFactorization tree_factorization(const ModelSpec& model, const PseudomarginalPoint& pt) {
  Enumerator en(model);
  const auto& g = model.graph();
  std::vector<Vec> pa, pi;
  for (int a = 0; a < g.num_factors(); ++a)
    pa.push_back(dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a))
                     .probabilities_from_expectation(assemble_factor(model, pt, a)));
  for (int i = 0; i < g.num_vertices(); ++i)
    pi.push_back(dynamic_cast<const DiscreteFamily&>(model.family().vertex_family(i))
                     .probabilities_from_expectation(pt.vertex[i]));
  TreeFactorization out;
  out.table.resize(en.total);
  std::vector<int> x;
  for (long k = 0; k < en.total; ++k) {
    en.decode(k, x);
    double v = 1;
    for (int a = 0; a < g.num_factors(); ++a) v *= pa[a](factor_row(model, a, x));
    for (int i = 0; i < g.num_vertices(); ++i) v *= std::pow(pi[i](x[i]), 1 - g.vertex_degree(i));
    out.table(k) = v;
  }
  out.total = out.table.sum();
  return out;
}

Beliefs exact_beliefs(const ModelSpec& model) {
  const auto& g = model.graph();
  Beliefs b;
  if (!model.family().all_discrete()) {
    auto [p, h] = model.gaussian_global();
    Mat cov = p.inverse();
    Vec mean = cov * h;
    for (int i = 0; i < g.num_vertices(); ++i) {
      const auto& fam = dynamic_cast<const GaussianFamily&>(model.family().vertex_family(i));
      b.vertex.push_back(fam.expectation_from_moments(mean.segment(i, 1), cov.block(i, i, 1, 1)));
    }
    for (int a = 0; a < g.num_factors(); ++a) {
      const auto& fam = dynamic_cast<const GaussianFamily&>(model.family().factor_family(a));
      auto mem = g.members(a);
      int d = static_cast<int>(mem.size());
      Vec m(d);
      Mat c(d, d);
      for (int s = 0; s < d; ++s) {
        m(s) = mean(mem[s]);
        for (int t = 0; t < d; ++t) c(s, t) = cov(mem[s], mem[t]);
      }
      b.factor.push_back(fam.expectation_from_moments(m, c));
    }
    return b;
  }
  Enumerator en(model);
  Vec p = exact_joint(model);
  std::vector<Vec> pa, pv;
  for (int a = 0; a < g.num_factors(); ++a)
    pa.push_back(Vec::Zero(dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a)).num_states()));
  for (int i = 0; i < g.num_vertices(); ++i) pv.push_back(Vec::Zero(model.family().vertex_spec(i).states));
  std::vector<int> x;
  for (long k = 0; k < en.total; ++k) {
    en.decode(k, x);
    for (int a = 0; a < g.num_factors(); ++a) pa[a](factor_row(model, a, x)) += p(k);
    for (int i = 0; i < g.num_vertices(); ++i) pv[i](x[i]) += p(k);
  }
  for (int a = 0; a < g.num_factors(); ++a)
    b.factor.push_back(dynamic_cast<const DiscreteFamily&>(model.family().factor_family(a)).design().transpose() * pa[a]);
  for (int i = 0; i < g.num_vertices(); ++i)
    b.vertex.push_back(dynamic_cast<const DiscreteFamily&>(model.family().vertex_family(i)).design().transpose() * pv[i]);
  return b;
}

}  // namespace bzeta
