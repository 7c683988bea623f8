#include <random>

#include "bzeta/lbp.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bzeta;

namespace {

ModelSpec gaussian_tree(const FactorGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  Vec j(g.num_factors());
  for (int a = 0; a < j.size(); ++a) j(a) = u(rng);
  int dmax = 0;
  for (int i = 0; i < g.num_vertices(); ++i) dmax = std::max(dmax, g.vertex_degree(i));
  return fixed_mean_gaussian_model(g, j, 1.0 + 0.4 * dmax);
}

double max_diff(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, (a[k] - b[k]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_SUITE("lbp") {

TEST_CASE("trees: exact after at most |E| parallel updates") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 6; ++rep) {
    auto g = oracle::random_tree(3 + rep, rng);
    std::vector<VertexSpec> vs;
    for (int i = 0; i < g.num_vertices(); ++i) vs.push_back(i % 2 ? VertexSpec::multinomial(3) : VertexSpec::binary());
    auto model = random_discrete_model(g, vs, 1.0, 100 + rep);
    auto r = run(model, init_messages(model, InitMode::random, rep), {Schedule::parallel, 0.0, 1e-13, g.num_edges()});
    CHECK(r.converged);
    CHECK(r.iterations <= g.num_edges());
    auto b = beliefs(model, r.messages);
    auto ex = oracle::discrete_exact(model);
    CHECK(max_diff(b.factor, ex.factor_eta) < 1e-10);
    CHECK(max_diff(b.vertex, ex.vertex_eta) < 1e-10);
  }
}

TEST_CASE("gaussian trees") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 5; ++rep) {
    auto g = oracle::random_tree(4 + rep, rng);
    auto model = gaussian_tree(g, rng);
    auto init = init_messages(model, InitMode::zeros);
    CHECK(init.fallback_init);
    auto r = run(model, init, {Schedule::parallel, 0.0, 1e-13, g.num_edges()});
    CHECK(r.converged);
    auto b = beliefs(model, r.messages);
    auto ex = oracle::gaussian_exact(model);
    CHECK(max_diff(b.factor, ex.factor_eta) < 1e-8);
    CHECK(max_diff(b.vertex, ex.vertex_eta) < 1e-8);
  }
}

TEST_CASE("free-mean gaussian path") {
  auto g = path_graph(4);
  Vec j(3), h(4);
  j << 0.3, -0.2, 0.25;
  h << 0.5, -0.1, 0.0, 0.3;
  auto model = gaussian_model(g, j, h, 1.0);
  auto r = run(model, init_messages(model, InitMode::zeros), {Schedule::parallel, 0.0, 1e-13, 50});
  CHECK(r.converged);
  auto b = beliefs(model, r.messages);
  auto ex = oracle::gaussian_exact(model);
  CHECK(max_diff(b.factor, ex.factor_eta) < 1e-8);
  CHECK(max_diff(b.vertex, ex.vertex_eta) < 1e-8);
}

TEST_CASE("sequential and parallel schedules agree on a weak loop") {
  auto g = complete_graph(4);
  Vec j = Vec::Constant(6, 0.2), h = Vec::LinSpaced(4, -0.3, 0.3);
  auto model = binary_pairwise_model(g, j, h);
  auto p = run(model, init_messages(model, InitMode::zeros), {Schedule::parallel, 0.0, 1e-13, 500});
  auto s = run(model, init_messages(model, InitMode::zeros), {Schedule::sequential, 0.0, 1e-13, 500});
  CHECK(p.converged);
  CHECK(s.converged);
  CHECK(max_diff(beliefs(model, p.messages).vertex, beliefs(model, s.messages).vertex) < 1e-10);
  CHECK(fixed_point_residual(model, p.messages) < 1e-12);
  CHECK(beliefs(model, p.messages).consistency < 1e-12);
}

TEST_CASE("damped update is a convex combination") {
  auto model = binary_pairwise_model(cycle_graph(3), Vec::Constant(3, 0.7), Vec::Zero(3));
  auto m = init_messages(model, InitMode::random, 4);
  auto t = update_parallel(model, m);
  auto d = update_damped(model, m, 0.3);
  CHECK((d.mu - (0.7 * t.mu + 0.3 * m.mu)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(update_damped(model, m, 1.0), InputError);
  CHECK_THROWS_AS(run(model, m, {Schedule::parallel, 0.0, 0.0, 10}), InputError);
}

TEST_CASE("linearization matches finite differences") {
  std::vector<ModelSpec> models{
      binary_pairwise_model(complete_graph(4), Vec::Constant(6, 0.3), Vec::LinSpaced(4, -0.2, 0.4)),
      random_discrete_model(example_hypergraph(), std::vector<VertexSpec>(4, VertexSpec::binary()), 0.8, 3),
      random_discrete_model(cycle_graph(3), std::vector<VertexSpec>(3, VertexSpec::multinomial(3)), 0.8, 4),
      fixed_mean_gaussian_model(torus_graph(3, 3), Vec::Constant(18, 0.2), 1.0),
      gaussian_model(cycle_graph(4), Vec::Constant(4, 0.3), Vec::LinSpaced(4, -1, 1), 1.0),
  };
  for (const auto& model : models) {
    auto r = run(model, init_messages(model, InitMode::zeros), {Schedule::parallel, 0.3, 1e-13, 5000});
    REQUIRE(r.converged);
    auto lin = linearization(model, r.messages);
    CHECK(lin.at_fixed_point);
    auto t = [&](const Vec& mu) { return update_parallel(model, MessageSet{mu, false}).mu; };
    Mat fd = oracle::fd_jacobian(t, r.messages.mu, 1e-6);
    CHECK((lin.matrix.matrix - fd).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((finite_difference_jacobian(model, r.messages) - fd).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("random init is reproducible") {
  auto model = binary_pairwise_model(cycle_graph(5), Vec::Constant(5, 0.5), Vec::Zero(5));
  auto a = init_messages(model, InitMode::random, 9);
  auto b = init_messages(model, InitMode::random, 9);
  auto c = init_messages(model, InitMode::random, 10);
  CHECK(a.mu == b.mu);
  CHECK(a.mu != c.mu);
  CHECK(messages_valid(model, a));
}

}
