#include "bzeta/expfamily.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bzeta {

namespace {

constexpr double kSlack = 1e-12;
constexpr double kMaxCond = 1e12;

double logsumexp(const Vec& l) {
  double m = l.maxCoeff();
  return m + std::log((l.array() - m).exp().sum());
}

// subsets of {0..m-1} with size >= 2, by size then lexicographically
std::vector<std::vector<int>> interaction_subsets(int m) {
  std::vector<std::vector<int>> out;
  for (int k = 2; k <= m; ++k) {
    std::vector<int> idx(k);
    for (int t = 0; t < k; ++t) idx[t] = t;
    while (true) {
      out.push_back(idx);
      int t = k - 1;
      while (t >= 0 && idx[t] == m - k + t) --t;
      if (t < 0) break;
      ++idx[t];
      for (int u = t + 1; u < k; ++u) idx[u] = idx[u - 1] + 1;
    }
  }
  return out;
}

}  // namespace

int VertexSpec::stat_dim() const {
  switch (kind) {
    case VertexKind::binary:
      return 1;
    case VertexKind::multinomial:
      return states - 1;
    case VertexKind::gaussian:
      return 2;
    case VertexKind::gaussian_fixed_mean:
      return 1;
  }
  return 0;
}

void ExpFamily::set_layout(int pure_dim, std::vector<int> member_dims, std::vector<std::string> names) {
  pure_dim_ = pure_dim;
  member_dims_ = std::move(member_dims);
  offsets_.clear();
  int off = pure_dim;
  for (int d : member_dims_) {
    offsets_.push_back(off);
    off += d;
  }
  dim_ = off;
  names_ = std::move(names);
}

int ExpFamily::statistic_index(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

// ---------------------------------------------------------------- discrete

DiscreteFamily::DiscreteFamily(std::vector<VertexSpec> members, std::vector<std::string> labels)
    : members_(std::move(members)) {
  int m = static_cast<int>(members_.size());
  if (m == 0) throw InputError("family needs at least one member");
  if (static_cast<int>(labels.size()) != m) throw InputError("label count does not match member count");
  long total = 1;
  for (const auto& v : members_) {
    if (!v.discrete()) throw InputError("discrete family with a continuous member");
    if (v.states < 2) throw InputError("alphabet size must be at least 2");
    if (v.kind == VertexKind::binary && v.states != 2) throw InputError("binary variable with states != 2");
    total *= v.states;
    if (total > (1L << 20)) throw InputError("factor state space too large");
  }
  int rows = static_cast<int>(total);
  states_.resize(static_cast<std::size_t>(rows) * m);
  for (int r = 0; r < rows; ++r) {
    int rem = r;
    for (int p = m - 1; p >= 0; --p) {
      states_[r * m + p] = rem % members_[p].states;
      rem /= members_[p].states;
    }
  }

  auto coord = [&](int p, int k, int c) -> double {
    if (members_[p].kind == VertexKind::binary) return 2.0 * k - 1.0;
    return k == c ? 1.0 : 0.0;
  };
  auto coord_name = [&](int p, int c) {
    if (members_[p].kind == VertexKind::binary) return labels[p];
    return labels[p] + "=" + std::to_string(c);
  };

  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (const auto& sub : interaction_subsets(m)) {
    std::vector<int> choice(sub.size(), 0);
    while (true) {
      std::vector<double> col(rows, 1.0);
      std::string name;
      for (std::size_t t = 0; t < sub.size(); ++t) {
        int p = sub[t];
        for (int r = 0; r < rows; ++r) col[r] *= coord(p, states_[r * m + p], choice[t]);
        name += (t ? "*" : "") + coord_name(p, choice[t]);
      }
      cols.push_back(std::move(col));
      names.push_back(std::move(name));
      int t = static_cast<int>(sub.size()) - 1;
      while (t >= 0 && ++choice[t] == members_[sub[t]].stat_dim()) choice[t--] = 0;
      if (t < 0) break;
    }
  }
  int pure = static_cast<int>(cols.size());
  std::vector<int> mdims;
  for (int p = 0; p < m; ++p) {
    mdims.push_back(members_[p].stat_dim());
    for (int c = 0; c < members_[p].stat_dim(); ++c) {
      std::vector<double> col(rows);
      for (int r = 0; r < rows; ++r) col[r] = coord(p, states_[r * m + p], c);
      cols.push_back(std::move(col));
      names.push_back(coord_name(p, c));
    }
  }
  set_layout(pure, mdims, names);

  design_.resize(rows, static_cast<int>(cols.size()));
  for (int c = 0; c < design_.cols(); ++c)
    for (int r = 0; r < rows; ++r) design_(r, c) = cols[c][r];

  Mat a(rows, rows);
  a.col(0).setOnes();
  a.rightCols(rows - 1) = design_;
  lu_.compute(a);
  if (lu_.rank() != rows) throw InputError("factor statistics are linearly dependent");
  lu_t_.compute(a.transpose());
  dp_deta_ = lu_t_.inverse().rightCols(rows - 1);
  double d = lu_.determinant();
  det_constant_ = d * d;
}

int DiscreteFamily::row_of(const std::vector<int>& member_states) const {
  int r = 0;
  for (int p = 0; p < num_members(); ++p) r = r * members_[p].states + member_states[p];
  return r;
}

Vec DiscreteFamily::probabilities(const Vec& theta) const {
  Vec l = log_weights(theta);
  double z = logsumexp(l);
  return (l.array() - z).exp().matrix();
}

Vec DiscreteFamily::probabilities_from_expectation(const Vec& eta) const {
  if (eta.size() != dim()) throw InputError("expectation parameter has wrong dimension");
  Vec rhs(num_states());
  rhs(0) = 1.0;
  rhs.tail(dim()) = eta;
  return lu_t_.solve(rhs);
}

Vec DiscreteFamily::natural_from_probabilities(const Vec& p) const {
  if (p.minCoeff() <= kSlack) throw DomainError("probability table leaves the open simplex");
  Vec c = lu_.solve(p.array().log().matrix());
  return c.tail(dim());
}

bool DiscreteFamily::in_natural_domain(const Vec& theta) const {
  return theta.size() == dim() && theta.allFinite();
}

bool DiscreteFamily::in_expectation_domain(const Vec& eta) const {
  if (eta.size() != dim() || !eta.allFinite()) return false;
  return probabilities_from_expectation(eta).minCoeff() > kSlack;
}

double DiscreteFamily::log_partition(const Vec& theta) const {
  if (!in_natural_domain(theta)) throw DomainError("natural parameter is not finite");
  return logsumexp(log_weights(theta));
}

Vec DiscreteFamily::to_expectation(const Vec& theta) const {
  if (!in_natural_domain(theta)) throw DomainError("natural parameter is not finite");
  return design_.transpose() * probabilities(theta);
}

Vec DiscreteFamily::to_natural(const Vec& eta) const {
  Vec p = probabilities_from_expectation(eta);
  if (!p.allFinite() || p.minCoeff() <= kSlack) throw DomainError("expectation parameter outside the domain");
  return natural_from_probabilities(p);
}

Mat DiscreteFamily::covariance(const Vec& theta) const {
  Vec p = probabilities(theta);
  Vec mean = design_.transpose() * p;
  Mat centred = design_.rowwise() - mean.transpose();
  return centred.transpose() * p.asDiagonal() * centred;
}

Mat DiscreteFamily::inverse_covariance(const Vec& theta) const {
  Vec p = probabilities(theta);
  if (p.minCoeff() <= 0) throw NumericalError("probability underflow in inverse covariance");
  return dp_deta_.transpose() * p.cwiseInverse().asDiagonal() * dp_deta_;
}

double DiscreteFamily::legendre(const Vec& eta) const {
  Vec p = probabilities_from_expectation(eta);
  if (p.minCoeff() <= kSlack) throw DomainError("expectation parameter outside the domain");
  return (p.array() * p.array().log()).sum();
}

// ---------------------------------------------------------------- gaussian

GaussianFamily::GaussianFamily(std::vector<VertexSpec> members, std::vector<std::string> labels)
    : members_(std::move(members)) {
  int m = static_cast<int>(members_.size());
  if (m == 0) throw InputError("family needs at least one member");
  if (static_cast<int>(labels.size()) != m) throw InputError("label count does not match member count");
  fixed_ = members_[0].kind == VertexKind::gaussian_fixed_mean;
  for (const auto& v : members_) {
    if (v.kind != VertexKind::gaussian && v.kind != VertexKind::gaussian_fixed_mean)
      throw InputError("gaussian family with a discrete member");
    if ((v.kind == VertexKind::gaussian_fixed_mean) != fixed_)
      throw InputError("cannot mix fixed-mean and free-mean gaussian variables in one factor");
  }
  std::vector<std::string> names;
  for (int p = 0; p < m; ++p)
    for (int q = p + 1; q < m; ++q) {
      monos_.push_back({p, q});
      names.push_back(labels[p] + "*" + labels[q]);
    }
  int pure = static_cast<int>(monos_.size());
  std::vector<int> mdims;
  for (int p = 0; p < m; ++p) {
    if (!fixed_) {
      monos_.push_back({p, -1});
      names.push_back(labels[p]);
    }
    monos_.push_back({p, p});
    names.push_back(labels[p] + "^2");
    mdims.push_back(fixed_ ? 1 : 2);
  }
  set_layout(pure, mdims, names);
}

GaussianFamily::Quadratic GaussianFamily::quadratic(const Vec& theta) const {
  if (theta.size() != dim()) throw InputError("natural parameter has wrong dimension");
  int n = num_vars();
  Mat q = Mat::Zero(n, n);
  Vec h = Vec::Zero(n);
  for (int k = 0; k < dim(); ++k) {
    const auto& mo = monos_[k];
    if (mo.b < 0) {
      h(mo.a) += theta(k);
    } else if (mo.a == mo.b) {
      q(mo.a, mo.a) += theta(k);
    } else {
      q(mo.a, mo.b) += 0.5 * theta(k);
      q(mo.b, mo.a) += 0.5 * theta(k);
    }
  }
  return {-2.0 * q, h};
}

Vec GaussianFamily::natural_from_quadratic(const Mat& precision, const Vec& shift) const {
  Vec theta(dim());
  for (int k = 0; k < dim(); ++k) {
    const auto& mo = monos_[k];
    if (mo.b < 0)
      theta(k) = shift(mo.a);
    else if (mo.a == mo.b)
      theta(k) = -0.5 * precision(mo.a, mo.a);
    else
      theta(k) = -precision(mo.a, mo.b);
  }
  return theta;
}

namespace {

bool positive_definite(const Mat& s) {
  if (!s.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > kSlack;
}

}  // namespace

bool GaussianFamily::in_natural_domain(const Vec& theta) const {
  if (theta.size() != dim() || !theta.allFinite()) return false;
  return positive_definite(quadratic(theta).precision);
}

std::pair<Vec, Mat> GaussianFamily::moments(const Vec& eta) const {
  if (eta.size() != dim()) throw InputError("expectation parameter has wrong dimension");
  int n = num_vars();
  Vec mean = Vec::Zero(n);
  Mat second = Mat::Zero(n, n);
  for (int k = 0; k < dim(); ++k) {
    const auto& mo = monos_[k];
    if (mo.b < 0) mean(mo.a) = eta(k);
  }
  for (int k = 0; k < dim(); ++k) {
    const auto& mo = monos_[k];
    if (mo.b >= 0) second(mo.a, mo.b) = second(mo.b, mo.a) = eta(k);
  }
  return {mean, second - mean * mean.transpose()};
}

Vec GaussianFamily::expectation_from_moments(const Vec& mean, const Mat& cov) const {
  Vec eta(dim());
  for (int k = 0; k < dim(); ++k) {
    const auto& mo = monos_[k];
    eta(k) = mo.b < 0 ? mean(mo.a) : cov(mo.a, mo.b) + mean(mo.a) * mean(mo.b);
  }
  return eta;
}

bool GaussianFamily::in_expectation_domain(const Vec& eta) const {
  if (eta.size() != dim() || !eta.allFinite()) return false;
  return positive_definite(moments(eta).second);
}

double GaussianFamily::log_partition(const Vec& theta) const {
  if (!in_natural_domain(theta)) throw DomainError("gaussian precision is not positive definite");
  auto [p, h] = quadratic(theta);
  Eigen::LLT<Mat> llt(p);
  double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  int n = num_vars();
  return 0.5 * h.dot(llt.solve(h)) + 0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * logdet;
}

Vec GaussianFamily::to_expectation(const Vec& theta) const {
  if (!in_natural_domain(theta)) throw DomainError("gaussian precision is not positive definite");
  auto [p, h] = quadratic(theta);
  Mat cov = p.inverse();
  return expectation_from_moments(cov * h, cov);
}

Vec GaussianFamily::to_natural(const Vec& eta) const {
  if (!in_expectation_domain(eta)) throw DomainError("gaussian covariance is not positive definite");
  auto [mean, cov] = moments(eta);
  Mat p = cov.inverse();
  return natural_from_quadratic(p, p * mean);
}

Mat GaussianFamily::covariance(const Vec& theta) const {
  if (!in_natural_domain(theta)) throw DomainError("gaussian precision is not positive definite");
  auto [p, h] = quadratic(theta);
  Mat s = p.inverse();
  Vec m = s * h;
  Mat c(dim(), dim());
  for (int k = 0; k < dim(); ++k)
    for (int l = 0; l < dim(); ++l) {
      Mono x = monos_[k], y = monos_[l];
      if (x.b < 0 && y.b >= 0) std::swap(x, y);
      double v;
      if (x.b < 0 && y.b < 0) {
        v = s(x.a, y.a);
      } else if (y.b < 0) {
        v = m(x.a) * s(x.b, y.a) + m(x.b) * s(x.a, y.a);
      } else {
        int a = x.a, b = x.b, cc = y.a, d = y.b;
        v = s(a, cc) * s(b, d) + s(a, d) * s(b, cc) + m(a) * m(cc) * s(b, d) + m(a) * m(d) * s(b, cc) +
            m(b) * m(cc) * s(a, d) + m(b) * m(d) * s(a, cc);
      }
      c(k, l) = v;
    }
  return c;
}

double GaussianFamily::legendre(const Vec& eta) const {
  if (!in_expectation_domain(eta)) throw DomainError("gaussian covariance is not positive definite");
  const Mat cov = moments(eta).second;
  int n = num_vars();
  double logdet = 2.0 * Eigen::LLT<Mat>(cov).matrixLLT().diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * std::numbers::pi * std::numbers::e) + logdet);
}

// ---------------------------------------------------------------- helpers

std::shared_ptr<const ExpFamily> make_family(const std::vector<VertexSpec>& members,
                                             const std::vector<std::string>& labels) {
  if (members.empty()) throw InputError("family needs at least one member");
  bool disc = members[0].discrete();
  for (const auto& v : members)
    if (v.discrete() != disc) throw InputError("cannot mix discrete and gaussian variables in one factor");
  if (disc) return std::make_shared<DiscreteFamily>(members, labels);
  return std::make_shared<GaussianFamily>(members, labels);
}

Mat sym_inv_sqrt(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  Vec d = es.eigenvalues().array().max(1e-14).rsqrt().matrix();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Mat ExpFamily::inverse_covariance(const Vec& theta) const { return checked_inverse(covariance(theta), "covariance"); }

Mat checked_inverse(const Mat& s, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigen decomposition failed");
  double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (lo <= 0 || hi / lo > kMaxCond) throw NumericalError(std::string(what) + " is numerically singular");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Mat correlation_from_covariance(const ExpFamily& fam, const Mat& cov, int pos_i, int pos_j) {
  if (pos_i == pos_j) throw InputError("correlation block needs two distinct members");
  int oi = fam.member_offset(pos_i), ri = fam.member_dim(pos_i);
  int oj = fam.member_offset(pos_j), rj = fam.member_dim(pos_j);
  return sym_inv_sqrt(cov.block(oj, oj, rj, rj)) * cov.block(oj, oi, rj, ri) * sym_inv_sqrt(cov.block(oi, oi, ri, ri));
}

Mat correlation_block(const ExpFamily& fam, const Vec& theta, int pos_i, int pos_j) {
  return correlation_from_covariance(fam, fam.covariance(theta), pos_i, pos_j);
}

Vec marginalize_factor(const ExpFamily& fam, const Vec& theta, int pos) {
  return fam.member_part(fam.to_expectation(theta), pos);
}

double pm1_to_indicator_natural(double theta_pm1) { return -2.0 * theta_pm1; }
double indicator_to_pm1_natural(double theta_ind) { return -0.5 * theta_ind; }
double pm1_to_indicator_expectation(double eta_pm1) { return 0.5 * (1.0 - eta_pm1); }
double indicator_to_pm1_expectation(double eta_ind) { return 1.0 - 2.0 * eta_ind; }

}  // namespace bzeta
