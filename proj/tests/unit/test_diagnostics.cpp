#include <atomic>
#include <cmath>
#include <cstdlib>

#include "bzeta/diagnostics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bzeta;

TEST_SUITE("diagnostics") {

TEST_CASE("binary pair: W and N are tanh|J|") {
  auto fam = make_family({VertexSpec::binary(), VertexSpec::binary()}, {"a", "b"});
  for (double j : {-2.0, -0.7, -0.1, 0.0, 0.3, 1.1, 2.0}) {
    Vec theta(3);
    theta << j, 0.4, -0.2;
    CHECK(mooij_weight(*fam, theta, 0, 1) == doctest::Approx(std::tanh(std::abs(j))).epsilon(1e-12));
    auto w = watanabe_weight(*fam, theta, 0, 1);
    CHECK(std::abs(w.value - std::tanh(std::abs(j))) < 1e-4);
    CHECK(w.value <= std::tanh(std::abs(j)) + 1e-12);
  }
}

TEST_CASE("correlation norm of a binary pair") {
  auto fam = make_family({VertexSpec::binary(), VertexSpec::binary()}, {"a", "b"});
  Vec theta(3);
  theta << 0.8, 0.0, 0.0;
  CHECK(correlation_norm(*fam, theta, 0, 1) == doctest::Approx(std::tanh(0.8)).epsilon(1e-12));
}

TEST_CASE("W never exceeds N on the triple factor") {
  for (double k : {-2.0, -0.5, 0.0, 0.2, 1.0, 2.0}) {
    auto m = triple_factor_model(k, 0.3);
    const auto& fam = m.family().factor_family(0);
    double n = mooij_weight(fam, m.theta_bar(0), 0, 1);
    auto w = watanabe_weight(fam, m.theta_bar(0), 0, 1);
    CHECK(w.value <= n + 1e-9);
    CHECK(w.value > 0.0);
    MESSAGE("K=" << k << " W=" << w.value << " N=" << n);
  }
}

TEST_CASE("W is a supremum: random positive fields stay below it") {
  auto m = triple_factor_model(0.7, 0.3);
  const auto& fam = m.family().factor_family(0);
  double w = watanabe_weight(fam, m.theta_bar(0), 0, 2).value;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 200; ++rep) {
    Vec th = m.theta_bar(0);
    for (int p = 0; p < 3; ++p) th(fam.member_offset(p)) += u(rng);
    CHECK(correlation_norm(fam, th, 0, 2) <= w + 1e-9);
  }
}

TEST_CASE("uniqueness certificates") {
  auto weak = grid_model(3, 3, 0.05, 0.1);
  auto n = uniqueness_certificate(weak, WeightKind::N);
  auto w = uniqueness_certificate(weak, WeightKind::W);
  CHECK(n.certified);
  CHECK(w.certified);
  CHECK(w.rho <= n.rho + 1e-9);
  CHECK(w.tested_rho == doctest::Approx(w.rho * kWatanabeSafety));
  auto strong = grid_model(3, 3, 0.0, 1.0);
  CHECK_FALSE(uniqueness_certificate(strong, WeightKind::N).certified);
  CHECK_FALSE(uniqueness_certificate(strong, WeightKind::W).certified);
}

TEST_CASE("stability flags") {
  CVec e(3);
  e << std::complex<double>(0.5, 0.2), std::complex<double>(-0.9, 0), std::complex<double>(0.1, 0);
  auto s = stability_from_spectrum(e);
  CHECK(s.locally_stable);
  CHECK(s.stable_with_damping);
  CHECK(s.local_min_certified);
  CHECK_FALSE(s.marginal);
  e(1) = std::complex<double>(-1.5, 0);
  s = stability_from_spectrum(e);
  CHECK_FALSE(s.locally_stable);
  CHECK(s.stable_with_damping);
  CHECK(s.local_min_certified);
  e(1) = std::complex<double>(1.2, 0);
  s = stability_from_spectrum(e);
  CHECK_FALSE(s.stable_with_damping);
  CHECK_FALSE(s.local_min_certified);
  e(1) = std::complex<double>(1.0, 0);
  CHECK(stability_from_spectrum(e).marginal);
}

TEST_CASE("stability at an LBP fixed point") {
  auto model = binary_pairwise_model(torus_graph(3, 3), Vec::Constant(18, 0.2), Vec::Zero(9));
  auto r = run(model, init_messages(model, InitMode::zeros), {Schedule::parallel, 0.0, 1e-12, 1000});
  REQUIRE(r.converged);
  auto s = stability_classify(model, r.messages);
  CHECK(s.locally_stable);
  CHECK(s.residual < 1e-10);
  // the attractive torus has a linear-stability threshold at tanh J = 1/3
  CHECK(s.rho == doctest::Approx(3 * std::tanh(0.2)).epsilon(1e-8));
}

TEST_CASE("trajectory on the Ising torus") {
  auto tmpl = binary_pairwise_model(torus_graph(3, 3), Vec::Ones(18), Vec::Zero(9));
  std::vector<double> ts;
  for (int k = 0; k <= 20; ++k) ts.push_back(0.30 + 0.005 * k);
  auto tr = trajectory([&](double t) { return scale_template(tmpl, t); }, ts);
  REQUIRE_FALSE(tr.truncated);
  REQUIRE(tr.onset_index > 0);
  CHECK(tr.same_interval());
  CHECK(ts[tr.onset_index - 1] < std::atanh(1.0 / 3));
  CHECK(ts[tr.onset_index] >= std::atanh(1.0 / 3));
}

TEST_CASE("trajectory truncates where the model stops existing") {
  auto tmpl = gaussian_torus_model(3, 3, 0.24);
  auto tr = trajectory([&](double t) { return scale_template(tmpl, t); }, {0.5, 1.0, 1.5});
  CHECK(tr.truncated);
  CHECK(tr.rows.size() == 2);
  CHECK_FALSE(tr.diagnostic.empty());
}

TEST_CASE("template scaling") {
  auto tmpl = binary_pairwise_model(cycle_graph(3), Vec::Constant(3, 0.8), Vec::Constant(3, 0.4));
  auto m = scale_template(tmpl, 0.5);
  CHECK((m.theta_bar(1) - 0.5 * tmpl.theta_bar(1)).norm() < 1e-15);
  auto g = gaussian_torus_model(3, 3, 0.2);
  auto gs = scale_template(g, 0.5);
  CHECK(gs.theta_bar(0)(0) == doctest::Approx(0.5 * g.theta_bar(0)(0)));
  CHECK(gs.theta_bar(0)(1) == doctest::Approx(g.theta_bar(0)(1)));
  CHECK_THROWS_AS(gaussian_torus_model(3, 3, 0.3), DomainError);
}

TEST_CASE("grid helpers and thread control") {
  auto g = linear_grid(-1, 1, 41);
  CHECK(g.size() == 41);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[20] == doctest::Approx(0.0));
  CHECK_THROWS_AS(linear_grid(0, 1, 0), InputError);

  setenv("BETHE_ZETA_THREADS", "3", 1);
  CHECK(sweep_threads() == 3);
  setenv("BETHE_ZETA_THREADS", "zero", 1);
  CHECK_THROWS_AS(sweep_threads(), InputError);
  setenv("BETHE_ZETA_THREADS", "2", 1);
  std::atomic<int> sum{0};
  parallel_for(100, [&](int k) { sum += k; });
  CHECK(sum == 4950);
  CHECK_THROWS_AS(parallel_for(10, [](int k) { if (k == 7) throw NumericalError("x"); }), NumericalError);
  unsetenv("BETHE_ZETA_THREADS");
}

TEST_CASE("grid point protocol") {
  auto p = grid_point(0.0, 0.1);
  CHECK(p.converged);
  CHECK(p.certified_N);
  CHECK(p.certified_W);
  CHECK(p.refined);
  CHECK(p.locally_stable);
  CHECK(p.min_eig > 0);
  auto q = grid_point(0.0, 1.0, {}, false);
  CHECK_FALSE(q.certified_N);
  CHECK_FALSE(q.refined);
}

TEST_CASE("W against N sweep") {
  auto rows = experiment_wn(-2, 2, 5);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.W <= r.N + 1e-9);
    CHECK(r.optimizer_ok);
  }
  // |K| large: the bound is attained
  CHECK(std::abs(rows[0].W - rows[0].N) < 1e-3);
  CHECK(std::abs(rows[4].W - rows[4].N) < 1e-3);
}

}
