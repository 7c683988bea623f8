#include <cmath>
#include <map>
#include <random>

#include "bzeta/expfamily.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bzeta;

namespace {

struct Table {
  std::vector<double> logw;
  std::vector<std::map<std::string, double>> values;
};

// every joint state of the members, the statistic vector evaluated by name
Table enumerate(const ExpFamily& fam, const std::vector<VertexSpec>& mem, const std::vector<std::string>& labels,
                const Vec& theta) {
  Table t;
  int total = 1;
  for (const auto& v : mem) total *= v.states;
  for (int k = 0; k < total; ++k) {
    int r = k;
    std::map<std::string, double> val;
    for (int p = static_cast<int>(mem.size()) - 1; p >= 0; --p) {
      int s = r % mem[p].states;
      r /= mem[p].states;
      val[labels[p]] = mem[p].kind == VertexKind::binary ? (s ? 1.0 : -1.0) : s;
    }
    double lw = 0;
    for (int s = 0; s < fam.dim(); ++s) lw += theta(s) * oracle::statistic(fam.statistic_names()[s], val);
    t.logw.push_back(lw);
    t.values.push_back(val);
  }
  return t;
}

Vec random_vec(int n, std::mt19937_64& rng, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  Vec v(n);
  for (int k = 0; k < n; ++k) v(k) = u(rng);
  return v;
}

const std::vector<std::vector<VertexSpec>> kDiscrete = {
    {VertexSpec::binary()},
    {VertexSpec::binary(), VertexSpec::binary()},
    {VertexSpec::binary(), VertexSpec::binary(), VertexSpec::binary()},
    {VertexSpec::multinomial(3)},
    {VertexSpec::multinomial(3), VertexSpec::binary()},
    {VertexSpec::multinomial(3), VertexSpec::multinomial(3)},
};

std::vector<std::string> labels_for(std::size_t n) {
  std::vector<std::string> l;
  for (std::size_t k = 0; k < n; ++k) l.push_back(std::string(1, char('a' + k)));
  return l;
}

}  // namespace

TEST_SUITE("expfamily") {

TEST_CASE("discrete statistic layout") {
  auto f = make_family({VertexSpec::binary(), VertexSpec::binary()}, {"a", "b"});
  CHECK(f->statistic_names() == std::vector<std::string>{"a*b", "a", "b"});
  CHECK(f->pure_dim() == 1);
  auto m = make_family({VertexSpec::multinomial(3), VertexSpec::binary()}, {"a", "b"});
  CHECK(m->dim() == 5);
  CHECK(m->statistic_index("a=1*b") >= 0);
  CHECK(m->member_dim(0) == 2);
  CHECK(m->member_dim(1) == 1);
}

TEST_CASE("discrete log partition and moments against enumeration") {
  std::mt19937_64 rng(11);
  for (const auto& mem : kDiscrete) {
    auto labels = labels_for(mem.size());
    auto fam = make_family(mem, labels);
    for (int rep = 0; rep < 5; ++rep) {
      Vec theta = random_vec(fam->dim(), rng, 1.5);
      auto t = enumerate(*fam, mem, labels, theta);
      double mx = *std::max_element(t.logw.begin(), t.logw.end());
      double z = 0;
      for (double l : t.logw) z += std::exp(l - mx);
      double logz = mx + std::log(z);
      CHECK(fam->log_partition(theta) == doctest::Approx(logz).epsilon(1e-13));
      Vec eta = Vec::Zero(fam->dim());
      double negent = 0;
      for (std::size_t k = 0; k < t.logw.size(); ++k) {
        double p = std::exp(t.logw[k] - logz);
        negent += p * std::log(p);
        for (int s = 0; s < fam->dim(); ++s) eta(s) += p * oracle::statistic(fam->statistic_names()[s], t.values[k]);
      }
      CHECK((fam->to_expectation(theta) - eta).cwiseAbs().maxCoeff() < 1e-13);
      CHECK((fam->to_natural(eta) - theta).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(fam->legendre(eta) == doctest::Approx(negent).epsilon(1e-11));
      CHECK(fam->legendre(eta) == doctest::Approx(theta.dot(eta) - logz).epsilon(1e-10));
    }
  }
}

TEST_CASE("covariance is the derivative of the expectation map") {
  std::mt19937_64 rng(5);
  std::vector<std::pair<std::vector<VertexSpec>, std::vector<std::string>>> cases;
  for (const auto& mem : kDiscrete) cases.push_back({mem, labels_for(mem.size())});
  cases.push_back({{VertexSpec::gaussian(), VertexSpec::gaussian()}, {"x", "y"}});
  cases.push_back({{VertexSpec::fixed_mean(0.5), VertexSpec::fixed_mean(-1)}, {"x", "y"}});
  cases.push_back({{VertexSpec::gaussian()}, {"x"}});
  for (const auto& [mem, labels] : cases) {
    auto fam = make_family(mem, labels);
    Vec theta;
    if (fam->discrete()) {
      theta = random_vec(fam->dim(), rng);
    } else {
      auto& g = dynamic_cast<const GaussianFamily&>(*fam);
      Mat p(mem.size(), mem.size());
      if (mem.size() == 2)
        p << 2.0, 0.6, 0.6, 1.5;
      else
        p << 1.3;
      theta = g.natural_from_quadratic(p, g.fixed_mean() ? Vec::Zero(mem.size()) : random_vec(mem.size(), rng));
    }
    auto lam = [&](const Vec& t) { return fam->to_expectation(t); };
    Mat fd = oracle::fd_jacobian(lam, theta, 1e-5);
    Mat cov = fam->covariance(theta);
    CHECK((fd - cov).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Mat inv = fam->inverse_covariance(theta);
    CHECK((inv * cov - Mat::Identity(cov.rows(), cov.cols())).cwiseAbs().maxCoeff() < 1e-9);
    auto psi = [&](const Vec& t) { return fam->log_partition(t); };
    CHECK((oracle::fd_gradient(psi, theta, 1e-5) - fam->to_expectation(theta)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("determinant of the covariance is a constant times the product of probabilities") {
  std::mt19937_64 rng(8);
  for (const auto& mem : kDiscrete) {
    auto fam = make_family(mem, labels_for(mem.size()));
    auto& d = dynamic_cast<const DiscreteFamily&>(*fam);
    for (int rep = 0; rep < 4; ++rep) {
      Vec theta = random_vec(fam->dim(), rng);
      double prod = d.probabilities(theta).prod();
      CHECK(fam->covariance(theta).determinant() == doctest::Approx(d.determinant_constant() * prod).epsilon(1e-9));
    }
  }
  // a single binary variable: Var[x] = 4 p(1-p)
  auto b = make_family({VertexSpec::binary()}, {"a"});
  CHECK(dynamic_cast<const DiscreteFamily&>(*b).determinant_constant() == doctest::Approx(4.0));
}

TEST_CASE("inverse covariance stays exact near the simplex boundary") {
  auto fam = make_family({VertexSpec::binary(), VertexSpec::binary()}, {"a", "b"});
  Vec theta(3);
  theta << 9.0, 0.5, -0.3;
  Mat cov = fam->covariance(theta);
  Mat inv = fam->inverse_covariance(theta);
  CHECK((inv * cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("gaussian log partition against quadrature") {
  auto one = make_family({VertexSpec::gaussian()}, {"x"});
  Vec t(2);
  t << 0.7, -0.4;
  CHECK(one->log_partition(t) == doctest::Approx(oracle::gaussian_log_integral(0.7, -0.4)).epsilon(1e-10));

  auto fixed = make_family({VertexSpec::fixed_mean(2.0)}, {"x"});
  Vec tf(1);
  tf << -0.8;
  CHECK(fixed->log_partition(tf) == doctest::Approx(oracle::gaussian_log_integral(0.0, -0.8)).epsilon(1e-10));

  auto two = make_family({VertexSpec::gaussian(), VertexSpec::gaussian()}, {"x", "y"});
  CHECK(two->statistic_names() == std::vector<std::string>{"x*y", "x", "x^2", "y", "y^2"});
  Vec t2(5);
  t2 << 0.3, 0.2, -0.6, -0.1, -0.5;
  CHECK(two->log_partition(t2) ==
        doctest::Approx(oracle::gaussian_log_integral_2d(0.3, 0.2, -0.6, -0.1, -0.5)).epsilon(1e-8));
}

TEST_CASE("gaussian domains") {
  auto two = make_family({VertexSpec::fixed_mean(0), VertexSpec::fixed_mean(0)}, {"x", "y"});
  Vec ok(3), bad(3);
  ok << 0.5, -1.0, -1.0;
  bad << 3.0, -1.0, -1.0;
  CHECK(two->in_natural_domain(ok));
  CHECK_FALSE(two->in_natural_domain(bad));
  CHECK_THROWS_AS(two->log_partition(bad), DomainError);
  Vec eta = two->to_expectation(ok);
  CHECK(two->in_expectation_domain(eta));
  Vec eta_bad(3);
  eta_bad << 2.0, 1.0, 1.0;
  CHECK_FALSE(two->in_expectation_domain(eta_bad));
  CHECK_THROWS_AS(make_family({VertexSpec::fixed_mean(0), VertexSpec::gaussian()}, {"x", "y"}), InputError);
}

TEST_CASE("binary pair correlation is tanh of the coupling") {
  auto fam = make_family({VertexSpec::binary(), VertexSpec::binary()}, {"a", "b"});
  for (double j : {-1.3, -0.2, 0.0, 0.4, 2.0}) {
    Vec theta(3);
    theta << j, 0.0, 0.0;
    CHECK(correlation_block(*fam, theta, 0, 1)(0, 0) == doctest::Approx(std::tanh(j)).epsilon(1e-12));
  }
}

TEST_CASE("marginalization agrees with enumeration") {
  std::vector<VertexSpec> mem{VertexSpec::multinomial(3), VertexSpec::binary()};
  std::vector<std::string> labels{"a", "b"};
  auto fam = make_family(mem, labels);
  std::mt19937_64 rng(2);
  Vec theta = random_vec(fam->dim(), rng);
  Vec eta = fam->to_expectation(theta);
  CHECK((marginalize_factor(*fam, theta, 0) - fam->member_part(eta, 0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((marginalize_factor(*fam, theta, 1) - fam->member_part(eta, 1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("binary encodings round trip") {
  for (double v : {-0.9, 0.0, 0.35}) {
    CHECK(indicator_to_pm1_natural(pm1_to_indicator_natural(v)) == doctest::Approx(v));
    CHECK(indicator_to_pm1_expectation(pm1_to_indicator_expectation(v)) == doctest::Approx(v));
  }
  // exp(theta x) with x = -1 at state 0 is exp(-2 theta 1{x=-1}) up to a constant
  auto one = make_family({VertexSpec::binary()}, {"a"});
  Vec t(1);
  t << 0.3;
  double p0 = pm1_to_indicator_expectation(one->to_expectation(t)(0));
  CHECK(std::log(p0 / (1 - p0)) == doctest::Approx(pm1_to_indicator_natural(0.3)));
}

}
