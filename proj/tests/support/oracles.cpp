#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace oracle {

using bzeta::VertexKind;

double statistic(const std::string& name, const std::map<std::string, double>& value) {
  double out = 1.0;
  std::stringstream ss(name);
  std::string piece;
  while (std::getline(ss, piece, '*')) {
    auto eq = piece.find('=');
    auto sq = piece.find('^');
    if (eq != std::string::npos) {
      out *= value.at(piece.substr(0, eq)) == std::stod(piece.substr(eq + 1)) ? 1.0 : 0.0;
    } else if (sq != std::string::npos) {
      double v = value.at(piece.substr(0, sq));
      out *= v * v;
    } else {
      out *= value.at(piece);
    }
  }
  return out;
}

namespace {

double coordinate(const bzeta::VertexSpec& s, int state) {
  return s.kind == VertexKind::binary ? (state == 0 ? -1.0 : 1.0) : static_cast<double>(state);
}

}  // namespace

Exact discrete_exact(const ModelSpec& model) {
  const auto& g = model.graph();
  int n = g.num_vertices();
  std::vector<int> radix(n);
  long total = 1;
  for (int i = 0; i < n; ++i) {
    radix[i] = model.family().vertex_spec(i).states;
    total *= radix[i];
  }
  std::vector<std::map<std::string, double>> configs;
  std::vector<double> logw;
  std::vector<int> x(n, 0);
  for (long k = 0; k < total; ++k) {
    long r = k;
    for (int i = n - 1; i >= 0; --i) {
      x[i] = static_cast<int>(r % radix[i]);
      r /= radix[i];
    }
    std::map<std::string, double> val;
    for (int i = 0; i < n; ++i) val[g.vertex_label(i)] = coordinate(model.family().vertex_spec(i), x[i]);
    double lw = 0;
    for (int a = 0; a < g.num_factors(); ++a) {
      const auto& names = model.family().factor_family(a).statistic_names();
      for (std::size_t s = 0; s < names.size(); ++s) lw += model.theta_bar(a)(s) * statistic(names[s], val);
    }
    configs.push_back(std::move(val));
    logw.push_back(lw);
  }
  double mx = *std::max_element(logw.begin(), logw.end());
  double z = 0;
  for (double l : logw) z += std::exp(l - mx);
  Exact ex;
  ex.log_z = mx + std::log(z);
  for (int a = 0; a < g.num_factors(); ++a) ex.factor_eta.push_back(Vec::Zero(model.family().factor_family(a).dim()));
  for (int i = 0; i < n; ++i) ex.vertex_eta.push_back(Vec::Zero(model.family().vertex_family(i).dim()));
  for (long k = 0; k < total; ++k) {
    double p = std::exp(logw[k] - ex.log_z);
    for (int a = 0; a < g.num_factors(); ++a) {
      const auto& names = model.family().factor_family(a).statistic_names();
      for (std::size_t s = 0; s < names.size(); ++s) ex.factor_eta[a](s) += p * statistic(names[s], configs[k]);
    }
    for (int i = 0; i < n; ++i) {
      const auto& names = model.family().vertex_family(i).statistic_names();
      for (std::size_t s = 0; s < names.size(); ++s) ex.vertex_eta[i](s) += p * statistic(names[s], configs[k]);
    }
  }
  return ex;
}

Exact gaussian_exact(const ModelSpec& model) {
  const auto& g = model.graph();
  int n = g.num_vertices();
  std::map<std::string, int> idx;
  for (int i = 0; i < n; ++i) idx[g.vertex_label(i)] = i;
  Mat p = Mat::Zero(n, n);
  Vec h = Vec::Zero(n);
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& names = model.family().factor_family(a).statistic_names();
    for (std::size_t s = 0; s < names.size(); ++s) {
      double t = model.theta_bar(a)(s);
      const std::string& nm = names[s];
      auto star = nm.find('*');
      auto sq = nm.find('^');
      if (star != std::string::npos) {
        int i = idx.at(nm.substr(0, star)), j = idx.at(nm.substr(star + 1));
        p(i, j) -= t;
        p(j, i) -= t;
      } else if (sq != std::string::npos) {
        int i = idx.at(nm.substr(0, sq));
        p(i, i) -= 2 * t;
      } else {
        h(idx.at(nm)) += t;
      }
    }
  }
  Mat cov = p.inverse();
  Vec mean = cov * h;
  Exact ex;
  ex.log_z = 0.5 * h.dot(mean) + 0.5 * n * std::log(2 * std::numbers::pi) - 0.5 * std::log(p.determinant());
  auto moment = [&](const std::string& nm) {
    auto star = nm.find('*');
    auto sq = nm.find('^');
    if (star != std::string::npos) {
      int i = idx.at(nm.substr(0, star)), j = idx.at(nm.substr(star + 1));
      return cov(i, j) + mean(i) * mean(j);
    }
    if (sq != std::string::npos) {
      int i = idx.at(nm.substr(0, sq));
      return cov(i, i) + mean(i) * mean(i);
    }
    return mean(idx.at(nm));
  };
  for (int a = 0; a < g.num_factors(); ++a) {
    const auto& names = model.family().factor_family(a).statistic_names();
    Vec e(names.size());
    for (std::size_t s = 0; s < names.size(); ++s) e(s) = moment(names[s]);
    ex.factor_eta.push_back(e);
  }
  for (int i = 0; i < n; ++i) {
    const auto& names = model.family().vertex_family(i).statistic_names();
    Vec e(names.size());
    for (std::size_t s = 0; s < names.size(); ++s) e(s) = moment(names[s]);
    ex.vertex_eta.push_back(e);
  }
  return ex;
}

namespace {

struct Edge {
  int factor, vertex;
};

std::vector<Edge> edges_of(const FactorGraph& g) {
  std::vector<Edge> e;
  for (int a = 0; a < g.num_factors(); ++a)
    for (int i : g.members(a)) e.push_back({a, i});
  return e;
}

bool contains(const FactorGraph& g, int a, int v) {
  auto m = g.members(a);
  return std::find(m.begin(), m.end(), v) != m.end();
}

int pos(const FactorGraph& g, int a, int v) {
  auto m = g.members(a);
  return static_cast<int>(std::find(m.begin(), m.end(), v) - m.begin());
}

}  // namespace

bool feeds(const FactorGraph& g, int from, int to) {
  auto e = edges_of(g);
  const Edge& f = e[from];
  const Edge& t = e[to];
  return contains(g, t.factor, f.vertex) && f.vertex != t.vertex && f.factor != t.factor;
}

Mat edge_matrix(const FactorGraph& g, const bzeta::EdgeWeights& w) {
  auto e = edges_of(g);
  std::vector<int> off(1, 0);
  for (const auto& ed : e) off.push_back(off.back() + w.vertex_dim(ed.vertex));
  Mat m = Mat::Zero(off.back(), off.back());
  for (std::size_t r = 0; r < e.size(); ++r)
    for (std::size_t c = 0; c < e.size(); ++c)
      if (feeds(g, static_cast<int>(c), static_cast<int>(r))) {
        int a = e[r].factor;
        m.block(off[r], off[c], w.vertex_dim(e[r].vertex), w.vertex_dim(e[c].vertex)) =
            w.at(a, pos(g, a, e[c].vertex), pos(g, a, e[r].vertex));
      }
  return m;
}

std::vector<long> prime_cycle_counts(const FactorGraph& g, int max_len) {
  Mat m = edge_matrix(g, bzeta::EdgeWeights::uniform(g, 1.0));
  std::vector<double> tr(max_len + 1, 0.0);
  Mat pw = Mat::Identity(m.rows(), m.cols());
  for (int k = 1; k <= max_len; ++k) {
    pw = pw * m;
    tr[k] = pw.trace();
  }
  auto mobius = [](int n) {
    int mu = 1;
    for (int p = 2; p * p <= n; ++p)
      if (n % p == 0) {
        n /= p;
        if (n % p == 0) return 0;
        mu = -mu;
      }
    return n > 1 ? -mu : mu;
  };
  std::vector<long> out(max_len + 1, 0);
  for (int n = 1; n <= max_len; ++n) {
    double s = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) s += mobius(n / d) * tr[d];
    out[n] = std::lround(s / n);
  }
  return out;
}

long spanning_trees(int n, const std::vector<std::pair<int, int>>& edges) {
  int m = static_cast<int>(edges.size());
  int k = n - 1;
  if (k == 0) return 1;
  if (m < k) return 0;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  long count = 0;
  while (true) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    bool ok = true;
    for (int idx : pick) {
      int a = find(edges[idx].first), b = find(edges[idx].second);
      if (a == b) {
        ok = false;
        break;
      }
      parent[a] = b;
    }
    count += ok;
    int t = k - 1;
    while (t >= 0 && pick[t] == m - k + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (int s = t + 1; s < k; ++s) pick[s] = pick[s - 1] + 1;
  }
  return count;
}

long spanning_trees_graph(const FactorGraph& g) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < g.num_factors(); ++a) e.push_back({g.members(a)[0], g.members(a)[1]});
  return spanning_trees(g.num_vertices(), e);
}

long spanning_trees_bipartite(const FactorGraph& g) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < g.num_factors(); ++a)
    for (int i : g.members(a)) e.push_back({i, g.num_vertices() + a});
  return spanning_trees(g.num_vertices() + g.num_factors(), e);
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int n) {
  double h = (hi - lo) / n;
  double s = 0.5 * (f(lo) + f(hi));
  for (int k = 1; k < n; ++k) s += f(lo + k * h);
  return s * h;
}

double gaussian_log_integral(double a, double b) {
  double x0 = -a / (2 * b), sd = 1.0 / std::sqrt(-2 * b);
  double top = a * x0 + b * x0 * x0;
  double v = trapezoid([&](double x) { return std::exp(a * x + b * x * x - top); }, x0 - 14 * sd, x0 + 14 * sd, 4000);
  return top + std::log(v);
}

double gaussian_log_integral_2d(double c, double a1, double b1, double a2, double b2) {
  // centre and scale from the quadratic form
  Mat p(2, 2);
  p << -2 * b1, -c, -c, -2 * b2;
  Vec h(2);
  h << a1, a2;
  Vec m = p.inverse() * h;
  Mat cov = p.inverse();
  auto f = [&](double x, double y) { return c * x * y + a1 * x + b1 * x * x + a2 * y + b2 * y * y; };
  double top = f(m(0), m(1));
  double sx = std::sqrt(cov(0, 0)), sy = std::sqrt(cov(1, 1));
  double v = trapezoid(
      [&](double x) {
        return trapezoid([&](double y) { return std::exp(f(x, y) - top); }, m(1) - 14 * sy, m(1) + 14 * sy, 600);
      },
      m(0) - 14 * sx, m(0) + 14 * sx, 600);
  return top + std::log(v);
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Vec up = x, dn = x;
    up(k) += h;
    dn(k) -= h;
    g(k) = (f(up) - f(dn)) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
  Vec f0 = f(x);
  Mat j(f0.size(), x.size());
  for (int k = 0; k < x.size(); ++k) {
    Vec up = x, dn = x;
    up(k) += h;
    dn(k) -= h;
    j.col(k) = (f(up) - f(dn)) / (2 * h);
  }
  return j;
}

FactorGraph random_tree(int n, std::mt19937_64& rng) {
  std::vector<std::vector<int>> f;
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> parent(0, k - 1);
    f.push_back({parent(rng), k});
  }
  return FactorGraph(n, f);
}

FactorGraph random_hypergraph(int n, int factors, int max_size, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, max_size), vert(0, n - 1);
  while (true) {
    std::vector<std::vector<int>> f;
    for (int a = 0; a < factors; ++a) {
      int s = std::min(size(rng), n);
      std::set<int> mem;
      while (static_cast<int>(mem.size()) < s) mem.insert(vert(rng));
      std::vector<int> row(mem.begin(), mem.end());
      std::shuffle(row.begin(), row.end(), rng);
      f.push_back(row);
    }
    std::vector<int> parent(n + factors);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    for (int a = 0; a < factors; ++a)
      for (int i : f[a]) parent[find(i)] = find(n + a);
    std::set<int> roots;
    for (int v = 0; v < n + factors; ++v) roots.insert(find(v));
    if (roots.size() == 1) return FactorGraph(n, f);
  }
}

}  // namespace oracle
