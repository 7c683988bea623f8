#include "bzeta/zeta.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <cmath>
#include <limits>

namespace bzeta {

EdgeWeights::EdgeWeights(const FactorGraph& g, std::vector<int> vertex_dims) : dims_(std::move(vertex_dims)) {
  if (static_cast<int>(dims_.size()) != g.num_vertices()) throw InputError("vertex dimension count mismatch");
  for (int a = 0; a < g.num_factors(); ++a) {
    int d = g.factor_degree(a);
    deg_.push_back(d);
    std::vector<Mat> blocks(d * d);
    auto mem = g.members(a);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        if (p != q) blocks[p * d + q] = Mat::Zero(dims_[mem[q]], dims_[mem[p]]);
    w_.push_back(std::move(blocks));
  }
}

EdgeWeights EdgeWeights::uniform(const FactorGraph& g, double u) {
  EdgeWeights w(g, std::vector<int>(g.num_vertices(), 1));
  for (int a = 0; a < g.num_factors(); ++a)
    for (int p = 0; p < g.factor_degree(a); ++p)
      for (int q = 0; q < g.factor_degree(a); ++q)
        if (p != q) w.at(a, p, q)(0, 0) = u;
  return w;
}

bool EdgeWeights::symmetric(double tol) const {
  for (std::size_t a = 0; a < w_.size(); ++a)
    for (int p = 0; p < deg_[a]; ++p)
      for (int q = p + 1; q < deg_[a]; ++q)
        if ((at(a, p, q) - at(a, q, p).transpose()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

namespace {

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.size() == 1) return std::abs(m(0, 0));
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace

double EdgeWeights::max_norm() const {
  double r = 0;
  for (std::size_t a = 0; a < w_.size(); ++a)
    for (int p = 0; p < deg_[a]; ++p)
      for (int q = 0; q < deg_[a]; ++q)
        if (p != q) r = std::max(r, op_norm(at(a, p, q)));
  return r;
}

EdgeWeights EdgeWeights::norms() const {
  EdgeWeights out;
  out.dims_.assign(dims_.size(), 1);
  out.deg_ = deg_;
  for (std::size_t a = 0; a < w_.size(); ++a) {
    std::vector<Mat> blocks(deg_[a] * deg_[a]);
    for (int p = 0; p < deg_[a]; ++p)
      for (int q = 0; q < deg_[a]; ++q)
        if (p != q) blocks[p * deg_[a] + q] = Mat::Constant(1, 1, op_norm(at(a, p, q)));
    out.w_.push_back(std::move(blocks));
  }
  return out;
}

BlockEdgeMatrix directed_edge_matrix(const FactorGraph& g, const EdgeWeights& w) {
  if (static_cast<int>(w.vertex_dims().size()) != g.num_vertices()) throw InputError("weights belong to another graph");
  BlockEdgeMatrix m;
  m.offsets.push_back(0);
  for (int e = 0; e < g.num_edges(); ++e) {
    m.dims.push_back(w.vertex_dim(g.edge(e).vertex));
    m.offsets.push_back(m.offsets.back() + m.dims.back());
  }
  m.matrix = Mat::Zero(m.offsets.back(), m.offsets.back());
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    for (int f : g.feeds_into(e)) {
      int p = g.position_of(ed.factor, g.edge(f).vertex);
      const Mat& u = w.at(ed.factor, p, ed.position);
      if (u.rows() != m.dims[e] || u.cols() != m.dims[f]) throw InputError("edge weight has wrong shape");
      m.block(e, f) = u;
    }
  }
  return m;
}

BlockEdgeMatrix unweighted_edge_matrix(const FactorGraph& g) { return directed_edge_matrix(g, EdgeWeights::uniform(g, 1.0)); }

double zeta_inverse(const FactorGraph& g, const EdgeWeights& w) {
  BlockEdgeMatrix m = directed_edge_matrix(g, w);
  if (m.size() == 0) return 1.0;
  return (Mat::Identity(m.size(), m.size()) - m.matrix).partialPivLu().determinant();
}

double zeta_determinant(const FactorGraph& g, const EdgeWeights& w) {
  double d = zeta_inverse(g, w);
  if (d == 0.0 || !std::isfinite(1.0 / d)) throw NumericalError("det(I - M(u)) vanishes: u is a pole of the zeta function");
  return 1.0 / d;
}

EulerProduct zeta_euler_truncated(const FactorGraph& g, const EdgeWeights& w, int max_len) {
  BlockEdgeMatrix m = directed_edge_matrix(g, w);
  EulerProduct out;
  for (const auto& cyc : prime_cycles(g, max_len)) {
    int k = static_cast<int>(cyc.size());
    Mat p = Mat::Identity(m.dims[cyc[0]], m.dims[cyc[0]]);
    for (int s = 0; s < k; ++s) p = m.block(cyc[(s + 1) % k], cyc[s]) * p;
    double d = (Mat::Identity(p.rows(), p.cols()) - p).determinant();
    out.value /= d;
    ++out.num_prime_cycles;
  }
  BlockEdgeMatrix mabs = directed_edge_matrix(g, w.norms());
  double rho = spectral_radius(mabs);
  if (rho >= 1.0) {
    out.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    int rmax = 0;
    for (int d : w.vertex_dims()) rmax = std::max(rmax, d);
    double t = rmax * static_cast<double>(mabs.size()) * std::pow(rho, max_len + 1) / ((max_len + 1) * (1.0 - rho));
    out.tail_bound = std::expm1(t);
  }
  return out;
}

IharaBass ihara_bass_factorization(const FactorGraph& g, const EdgeWeights& w) {
  int nv = g.num_vertices();
  std::vector<int> voff(nv + 1, 0);
  for (int i = 0; i < nv; ++i) voff[i + 1] = voff[i] + w.vertex_dim(i);
  int rv = voff[nv];
  Mat wop = Mat::Zero(rv, rv);
  IharaBass out;
  double prod = 1.0;
  for (int a = 0; a < g.num_factors(); ++a) {
    auto mem = g.members(a);
    int d = g.factor_degree(a);
    std::vector<int> off(d + 1, 0);
    for (int p = 0; p < d; ++p) off[p + 1] = off[p] + w.vertex_dim(mem[p]);
    Mat u = Mat::Identity(off[d], off[d]);
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        if (p != q) u.block(off[p], off[q], off[p + 1] - off[p], off[q + 1] - off[q]) = w.at(a, q, p);
    Eigen::FullPivLU<Mat> lu(u);
    if (!lu.isInvertible()) throw NumericalError("U_alpha is singular for factor " + std::to_string(a));
    double du = lu.determinant();
    out.factor_determinants.push_back(du);
    prod *= du;
    Mat winv = lu.inverse();
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q)
        wop.block(voff[mem[p]], voff[mem[q]], w.vertex_dim(mem[p]), w.vertex_dim(mem[q])) +=
            winv.block(off[p], off[q], off[p + 1] - off[p], off[q + 1] - off[q]);
  }
  Mat op = Mat::Identity(rv, rv) + wop;
  for (int i = 0; i < nv; ++i)
    op.block(voff[i], voff[i], w.vertex_dim(i), w.vertex_dim(i)) -=
        g.vertex_degree(i) * Mat::Identity(w.vertex_dim(i), w.vertex_dim(i));
  out.vertex_determinant = rv == 0 ? 1.0 : op.partialPivLu().determinant();
  out.product = out.vertex_determinant * prod;
  out.vertex_operator = std::move(op);
  return out;
}

double ihara_bass_graph(const FactorGraph& g, const EdgeWeights& w) {
  if (!g.is_pairwise()) throw InputError("graph form of the Ihara-Bass formula needs degree-2 factors");
  int nv = g.num_vertices();
  std::vector<int> voff(nv + 1, 0);
  for (int i = 0; i < nv; ++i) voff[i + 1] = voff[i] + w.vertex_dim(i);
  Mat op = Mat::Identity(voff[nv], voff[nv]);
  double prod = 1.0;
  for (int a = 0; a < g.num_factors(); ++a) {
    int i = g.members(a)[0], j = g.members(a)[1];
    int ri = w.vertex_dim(i), rj = w.vertex_dim(j);
    const Mat& ue = w.at(a, 1, 0);    // j -> i
    const Mat& ubar = w.at(a, 0, 1);  // i -> j
    Mat li = Mat::Identity(ri, ri) - ue * ubar;
    Mat lj = Mat::Identity(rj, rj) - ubar * ue;
    Eigen::FullPivLU<Mat> lui(li), luj(lj);
    if (!lui.isInvertible() || !luj.isInvertible())
      throw NumericalError("I - u_e u_ebar is singular on factor " + std::to_string(a));
    Mat xi = lui.inverse(), xj = luj.inverse();
    op.block(voff[i], voff[i], ri, ri) += xi * ue * ubar;
    op.block(voff[j], voff[j], rj, rj) += xj * ubar * ue;
    op.block(voff[i], voff[j], ri, rj) -= xi * ue;
    op.block(voff[j], voff[i], rj, ri) -= xj * ubar;
    prod *= lui.determinant();
  }
  double d = voff[nv] == 0 ? 1.0 : op.partialPivLu().determinant();
  return d * prod;
}

double classical_ihara_bass(const FactorGraph& g, double u) {
  if (!g.is_pairwise()) throw InputError("classical Ihara-Bass formula needs a graph");
  int n = g.num_vertices();
  Mat a = Mat::Zero(n, n);
  for (int f = 0; f < g.num_factors(); ++f) {
    int i = g.members(f)[0], j = g.members(f)[1];
    a(i, j) += 1;
    a(j, i) += 1;
  }
  Mat m = Mat::Identity(n, n) - u * a;
  for (int i = 0; i < n; ++i) m(i, i) += u * u * (g.vertex_degree(i) - 1);
  return std::pow(1.0 - u * u, g.num_factors() - n) * m.determinant();
}

CVec spectrum(const BlockEdgeMatrix& m) {
  int ne = static_cast<int>(m.dims.size());
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph dg(ne);
  std::vector<bool> self(ne, false);
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < ne; ++f)
      if (m.dims[e] && m.dims[f] && m.block(e, f).cwiseAbs().maxCoeff() > 0) {
        boost::add_edge(f, e, dg);
        if (e == f) self[e] = true;
      }
  std::vector<int> comp(ne);
  int nc = ne == 0 ? 0 : boost::strong_components(dg, comp.data());
  std::vector<std::vector<int>> groups(nc);
  for (int e = 0; e < ne; ++e) groups[comp[e]].push_back(e);

  CVec out(m.size());
  int k = 0;
  for (const auto& grp : groups) {
    std::vector<int> idx;
    for (int e : grp)
      for (int r = 0; r < m.dims[e]; ++r) idx.push_back(m.offsets[e] + r);
    if (grp.size() == 1 && !self[grp[0]]) {
      for (std::size_t r = 0; r < idx.size(); ++r) out(k++) = 0.0;
      continue;
    }
    int n = static_cast<int>(idx.size());
    Mat sub(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) sub(r, c) = m.matrix(idx[r], idx[c]);
    Eigen::EigenSolver<Mat> es(sub, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver did not converge");
    for (int r = 0; r < n; ++r) out(k++) = es.eigenvalues()(r);
  }
  return out;
}

double spectral_radius(const BlockEdgeMatrix& m) {
  if (m.size() == 0) return 0.0;
  return spectrum(m).cwiseAbs().maxCoeff();
}

bool avoids_real_ray(const CVec& eig) {
  for (int k = 0; k < eig.size(); ++k)
    if (std::abs(eig(k).imag()) < 1e-9 && eig(k).real() >= 1.0 - 1e-9) return false;
  return true;
}

PfBounds pf_bounds(const FactorGraph& g) {
  PfBounds b{std::numeric_limits<int>::max(), 0};
  for (int e = 0; e < g.num_edges(); ++e) {
    int k = static_cast<int>(g.feeds_into(e).size());
    b.k_min = std::min(b.k_min, k);
    b.k_max = std::max(b.k_max, k);
  }
  if (g.num_edges() == 0) b.k_min = 0;
  return b;
}

HashimotoReport hashimoto_limit(const FactorGraph& g, double u) {
  if (connected_components(g).count != 1) throw InputError("Hashimoto limit needs a connected graph");
  if (nullity(g) < 1) throw InputError("Hashimoto limit is vacuous on a tree");
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  BlockEdgeMatrix m = unweighted_edge_matrix(g);
  LMat a = LMat::Identity(m.size(), m.size()) - static_cast<long double>(u) * m.matrix.cast<long double>();
  long double det = a.partialPivLu().determinant();
  HashimotoReport r;
  r.u = u;
  int chi = euler_number(g);
  r.kappa_bipartite = spanning_tree_count_bipartite(g);
  r.numeric = static_cast<double>(det * std::pow(1.0L - u, static_cast<long double>(chi - 1)));
  r.predicted = static_cast<double>(chi) * static_cast<double>(r.kappa_bipartite);
  if (g.is_pairwise()) {
    int ex = g.num_factors() - g.num_vertices();
    r.graph_form = true;
    r.kappa_graph = spanning_tree_count_graph(g);
    r.graph_numeric = static_cast<double>(det * std::pow(1.0L - u, static_cast<long double>(-(ex + 1))));
    r.graph_predicted = -std::pow(2.0, ex + 1) * ex * static_cast<double>(r.kappa_graph);
  }
  return r;
}

double iota_decomposition_check(const FactorGraph& g, const EdgeWeights& w) {
  BlockEdgeMatrix m = directed_edge_matrix(g, w);
  int n = m.size();
  int nv = g.num_vertices();
  std::vector<int> voff(nv + 1, 0);
  for (int i = 0; i < nv; ++i) voff[i + 1] = voff[i] + w.vertex_dim(i);
  Mat iota = Mat::Zero(n, n);
  Mat t = Mat::Zero(n, voff[nv]);
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edge(e);
    t.block(m.offsets[e], voff[ed.vertex], m.dims[e], m.dims[e]).setIdentity();
    for (int p = 0; p < g.factor_degree(ed.factor); ++p) {
      if (p == ed.position) continue;
      int f = g.edge_id(ed.factor, p);
      iota.block(m.offsets[e], m.offsets[f], m.dims[e], m.dims[f]) = w.at(ed.factor, p, ed.position);
    }
  }
  Mat rhs = iota * t * t.transpose() - iota;
  return n == 0 ? 0.0 : (m.matrix - rhs).cwiseAbs().maxCoeff();
}

double spectrum_distance(const CVec& a, const CVec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0;
  for (int k = 0; k < a.size(); ++k) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int l = 0; l < b.size(); ++l)
      if (!used[l] && std::abs(a(k) - b(l)) < bd) {
        bd = std::abs(a(k) - b(l));
        best = l;
      }
    used[best] = true;
    worst = std::max(worst, bd);
  }
  return worst;
}

}  // namespace bzeta
