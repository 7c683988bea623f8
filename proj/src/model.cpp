#include "bzeta/model.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace bzeta {

FamilySpec::FamilySpec(const FactorGraph& g, std::vector<VertexSpec> vertices) : vertices_(std::move(vertices)) {
  if (static_cast<int>(vertices_.size()) != g.num_vertices())
    throw InputError("vertex spec count does not match the graph");
  for (int i = 0; i < g.num_vertices(); ++i) {
    const auto& v = vertices_[i];
    if (v.kind == VertexKind::multinomial && v.states < 2) throw InputError("alphabet size must be at least 2");
    vertex_fam_.push_back(make_family({v}, {g.vertex_label(i)}));
  }
  // identical member specs share a family instance
  std::map<std::string, std::shared_ptr<const ExpFamily>> cache;
  for (int a = 0; a < g.num_factors(); ++a) {
    std::vector<VertexSpec> mem;
    std::vector<std::string> labels;
    std::string key;
    for (int i : g.members(a)) {
      mem.push_back(vertices_[i]);
      labels.push_back(g.vertex_label(i));
      key += std::to_string(static_cast<int>(vertices_[i].kind)) + ":" + std::to_string(vertices_[i].states) + ":" +
             std::to_string(vertices_[i].mean) + ":" + g.vertex_label(i) + "|";
    }
    if (!mem[0].discrete() && mem.size() > 2)
      throw InputError("gaussian families are only supported on factors of degree at most 2");
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, make_family(mem, labels)).first;
    factor_fam_.push_back(it->second);
  }
}

int FamilySpec::max_vertex_dim() const {
  int r = 0;
  for (const auto& v : vertices_) r = std::max(r, v.stat_dim());
  return r;
}

bool FamilySpec::all_discrete() const {
  return std::all_of(vertices_.begin(), vertices_.end(), [](const VertexSpec& v) { return v.discrete(); });
}
bool FamilySpec::all_fixed_mean() const {
  return std::all_of(vertices_.begin(), vertices_.end(),
                     [](const VertexSpec& v) { return v.kind == VertexKind::gaussian_fixed_mean; });
}
bool FamilySpec::all_free_gaussian() const {
  return std::all_of(vertices_.begin(), vertices_.end(),
                     [](const VertexSpec& v) { return v.kind == VertexKind::gaussian; });
}
bool FamilySpec::all_binary() const {
  return std::all_of(vertices_.begin(), vertices_.end(),
                     [](const VertexSpec& v) { return v.kind == VertexKind::binary; });
}

ModelSpec::ModelSpec(FactorGraph g, std::vector<VertexSpec> vertices, std::vector<Vec> theta_bar)
    : graph_(std::move(g)), family_(graph_, std::move(vertices)), theta_bar_(std::move(theta_bar)) {
  if (static_cast<int>(theta_bar_.size()) != graph_.num_factors())
    throw InputError("one natural parameter vector per factor is required");
  for (int a = 0; a < graph_.num_factors(); ++a) {
    if (theta_bar_[a].size() != family_.factor_family(a).dim())
      throw InputError("factor " + std::to_string(a) + ": expected " + std::to_string(family_.factor_family(a).dim()) +
                       " natural parameters, got " + std::to_string(theta_bar_[a].size()));
    if (!theta_bar_[a].allFinite()) throw InputError("factor " + std::to_string(a) + ": non-finite parameter");
  }
  msg_offset_.push_back(0);
  for (int e = 0; e < graph_.num_edges(); ++e) msg_offset_.push_back(msg_offset_.back() + message_dim(e));

  bool gauss = false;
  for (const auto& v : family_.vertex_specs()) gauss = gauss || !v.discrete();
  if (gauss) {
    if (!family_.all_fixed_mean() && !family_.all_free_gaussian())
      throw InputError("gaussian models must use one gaussian kind throughout");
    auto [p, h] = gaussian_global();
    Eigen::SelfAdjointEigenSolver<Mat> es(p, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-12)
      throw DomainError("gaussian model is not normalizable: global precision is not positive definite");
  }
}

std::pair<Mat, Vec> ModelSpec::gaussian_global() const {
  int n = graph_.num_vertices();
  Mat p = Mat::Zero(n, n);
  Vec h = Vec::Zero(n);
  for (int a = 0; a < graph_.num_factors(); ++a) {
    const auto* fam = dynamic_cast<const GaussianFamily*>(&family_.factor_family(a));
    if (!fam) throw InputError("gaussian_global on a discrete model");
    auto q = fam->quadratic(theta_bar_[a]);
    auto mem = graph_.members(a);
    for (std::size_t s = 0; s < mem.size(); ++s) {
      h(mem[s]) += q.shift(s);
      for (std::size_t t = 0; t < mem.size(); ++t) p(mem[s], mem[t]) += q.precision(s, t);
    }
  }
  return {p, h};
}

ModelSpec binary_pairwise_model(const FactorGraph& g, const Vec& couplings, const Vec& fields) {
  if (!g.is_pairwise()) throw InputError("binary pairwise model needs degree-2 factors");
  if (couplings.size() != g.num_factors() || fields.size() != g.num_vertices())
    throw InputError("coupling or field vector has wrong length");
  std::vector<Vec> th;
  for (int a = 0; a < g.num_factors(); ++a) {
    int i = g.members(a)[0], j = g.members(a)[1];
    Vec t(3);
    t << couplings(a), fields(i) / g.vertex_degree(i), fields(j) / g.vertex_degree(j);
    th.push_back(t);
  }
  return ModelSpec(g, std::vector<VertexSpec>(g.num_vertices(), VertexSpec::binary()), th);
}

ModelSpec random_discrete_model(const FactorGraph& g, const std::vector<VertexSpec>& vertices, double scale,
                                std::uint64_t seed) {
  FamilySpec fam(g, vertices);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec> th;
  for (int a = 0; a < g.num_factors(); ++a) {
    Vec t(fam.factor_family(a).dim());
    for (int k = 0; k < t.size(); ++k) t(k) = u(rng);
    th.push_back(t);
  }
  return ModelSpec(g, vertices, th);
}

namespace {

ModelSpec gaussian_pairwise(const FactorGraph& g, const Vec& couplings, const Vec& shift, double diag, bool fixed) {
  if (!g.is_pairwise()) throw InputError("gaussian model needs degree-2 factors");
  if (couplings.size() != g.num_factors()) throw InputError("coupling vector has wrong length");
  std::vector<Vec> th;
  for (int a = 0; a < g.num_factors(); ++a) {
    int i = g.members(a)[0], j = g.members(a)[1];
    double qi = -0.5 * diag / g.vertex_degree(i), qj = -0.5 * diag / g.vertex_degree(j);
    Vec t;
    if (fixed) {
      t.resize(3);
      t << couplings(a), qi, qj;
    } else {
      t.resize(5);
      t << couplings(a), shift(i) / g.vertex_degree(i), qi, shift(j) / g.vertex_degree(j), qj;
    }
    th.push_back(t);
  }
  VertexSpec v = fixed ? VertexSpec::fixed_mean(0.0) : VertexSpec::gaussian();
  return ModelSpec(g, std::vector<VertexSpec>(g.num_vertices(), v), th);
}

}  // namespace

ModelSpec fixed_mean_gaussian_model(const FactorGraph& g, const Vec& couplings, double diag) {
  return gaussian_pairwise(g, couplings, Vec::Zero(g.num_vertices()), diag, true);
}

ModelSpec gaussian_model(const FactorGraph& g, const Vec& couplings, const Vec& shift, double diag) {
  if (shift.size() != g.num_vertices()) throw InputError("shift vector has wrong length");
  return gaussian_pairwise(g, couplings, shift, diag, false);
}

namespace {

// theta for exp(K * sum of degree-3 monomials + J * sum of degree-2 monomials) in a binary family
Vec cubic_pairwise_theta(const ExpFamily& fam, double K, double J) {
  Vec t = Vec::Zero(fam.dim());
  const auto& names = fam.statistic_names();
  for (int k = 0; k < fam.pure_dim(); ++k) {
    int order = 1 + static_cast<int>(std::count(names[k].begin(), names[k].end(), '*'));
    if (order == 2) t(k) = J;
    if (order == 3) t(k) = K;
  }
  return t;
}

}  // namespace

ModelSpec grid_model(int rows, int cols, double K, double J) {
  FactorGraph g = grid_model_graph(rows, cols);
  std::vector<VertexSpec> v(g.num_vertices(), VertexSpec::binary());
  FamilySpec fam(g, v);
  std::vector<Vec> th;
  for (int a = 0; a < g.num_factors(); ++a) th.push_back(cubic_pairwise_theta(fam.factor_family(a), K, J));
  return ModelSpec(g, v, th);
}

ModelSpec triple_factor_model(double K, double c) {
  FactorGraph g(3, {{0, 1, 2}});
  std::vector<VertexSpec> v(3, VertexSpec::binary());
  FamilySpec fam(g, v);
  return ModelSpec(g, v, {cubic_pairwise_theta(fam.factor_family(0), K, c)});
}

}  // namespace bzeta
