#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bzeta/types.hpp"

namespace bzeta {

enum class VertexKind { binary, multinomial, gaussian, gaussian_fixed_mean };

struct VertexSpec {
  VertexKind kind = VertexKind::binary;
  int states = 2;     // alphabet size; 2 for binary
  double mean = 0.0;  // only for gaussian_fixed_mean

  static VertexSpec binary() { return {VertexKind::binary, 2, 0.0}; }
  static VertexSpec multinomial(int n) { return {VertexKind::multinomial, n, 0.0}; }
  static VertexSpec gaussian() { return {VertexKind::gaussian, 0, 0.0}; }
  static VertexSpec fixed_mean(double mu) { return {VertexKind::gaussian_fixed_mean, 0, mu}; }

  bool discrete() const { return kind == VertexKind::binary || kind == VertexKind::multinomial; }
  // r_i
  int stat_dim() const;
};

// Exponential family with statistics laid out as (pure-factor part, member blocks...).
// A vertex family is the one-member case with an empty pure part.
class ExpFamily {
 public:
  virtual ~ExpFamily() = default;

  int dim() const { return dim_; }
  int pure_dim() const { return pure_dim_; }
  int num_members() const { return static_cast<int>(offsets_.size()); }
  int member_offset(int pos) const { return offsets_[pos]; }
  int member_dim(int pos) const { return member_dims_[pos]; }
  const std::vector<std::string>& statistic_names() const { return names_; }
  int statistic_index(const std::string& name) const;

  virtual bool discrete() const = 0;
  virtual bool in_natural_domain(const Vec& theta) const = 0;
  virtual bool in_expectation_domain(const Vec& eta) const = 0;
  virtual double log_partition(const Vec& theta) const = 0;
  virtual Vec to_expectation(const Vec& theta) const = 0;
  virtual Vec to_natural(const Vec& eta) const = 0;
  // Var[phi] under p_theta
  virtual Mat covariance(const Vec& theta) const = 0;
  // Var[phi]^{-1}, NumericalError when ill-conditioned unless the family has a closed form
  virtual Mat inverse_covariance(const Vec& theta) const;
  // phi(eta) = <theta, eta> - psi(theta), the negative entropy
  virtual double legendre(const Vec& eta) const = 0;

  Mat covariance_at(const Vec& eta) const { return covariance(to_natural(eta)); }
  // slice of eta for member `pos`
  Vec member_part(const Vec& v, int pos) const { return v.segment(offsets_[pos], member_dims_[pos]); }

 protected:
  void set_layout(int pure_dim, std::vector<int> member_dims, std::vector<std::string> names);

 private:
  int dim_ = 0;
  int pure_dim_ = 0;
  std::vector<int> offsets_;
  std::vector<int> member_dims_;
  std::vector<std::string> names_;
};

// Binary (+-1 monomials) and multinomial (indicators 1{x=k}, k<N-1) factor families.
// Pure statistics are products of member coordinates over subsets of size >= 2,
// so the family is saturated: dim = |X| - 1.
class DiscreteFamily final : public ExpFamily {
 public:
  DiscreteFamily(std::vector<VertexSpec> members, std::vector<std::string> labels);

  int num_states() const { return static_cast<int>(design_.rows()); }
  const Mat& design() const { return design_; }
  // state index of member `pos` in joint row `row`
  int state_of(int row, int pos) const { return states_[row * num_members() + pos]; }
  int row_of(const std::vector<int>& member_states) const;
  int alphabet(int pos) const { return members_[pos].states; }

  Vec log_weights(const Vec& theta) const { return design_ * theta; }
  Vec probabilities(const Vec& theta) const;
  Vec probabilities_from_expectation(const Vec& eta) const;
  Vec natural_from_probabilities(const Vec& p) const;

  bool discrete() const override { return true; }
  bool in_natural_domain(const Vec& theta) const override;
  bool in_expectation_domain(const Vec& eta) const override;
  double log_partition(const Vec& theta) const override;
  Vec to_expectation(const Vec& theta) const override;
  Vec to_natural(const Vec& eta) const override;
  Mat covariance(const Vec& theta) const override;
  // B^T diag(1/p) B with B = d p / d eta, exact near the simplex boundary
  Mat inverse_covariance(const Vec& theta) const override;
  double legendre(const Vec& eta) const override;

  // c in det Var[phi] = c * prod_x p(x)
  double determinant_constant() const { return det_constant_; }

 private:
  std::vector<VertexSpec> members_;
  std::vector<int> states_;
  Mat design_;
  Eigen::FullPivLU<Mat> lu_;    // of A = [1 | design]
  Eigen::FullPivLU<Mat> lu_t_;  // of A^T
  Mat dp_deta_;  // columns 1.. of A^{-T}
  double det_constant_ = 1.0;
};

// Gaussian families on at most a pair of variables (any count is accepted).
// Free mean: pure x_p x_q, member blocks (x, x^2). Fixed mean: everything centred, member block (x-mu)^2.
class GaussianFamily final : public ExpFamily {
 public:
  GaussianFamily(std::vector<VertexSpec> members, std::vector<std::string> labels);

  bool fixed_mean() const { return fixed_; }
  int num_vars() const { return static_cast<int>(members_.size()); }

  // density ~ exp(-1/2 y^T P y + h^T y), y = x (free) or x - mu (fixed, h = 0)
  struct Quadratic {
    Mat precision;
    Vec shift;
  };
  Quadratic quadratic(const Vec& theta) const;
  Vec natural_from_quadratic(const Mat& precision, const Vec& shift) const;
  // mean of y and covariance
  std::pair<Vec, Mat> moments(const Vec& eta) const;
  Vec expectation_from_moments(const Vec& mean, const Mat& cov) const;

  bool discrete() const override { return false; }
  bool in_natural_domain(const Vec& theta) const override;
  bool in_expectation_domain(const Vec& eta) const override;
  double log_partition(const Vec& theta) const override;
  Vec to_expectation(const Vec& theta) const override;
  Vec to_natural(const Vec& eta) const override;
  Mat covariance(const Vec& theta) const override;
  double legendre(const Vec& eta) const override;

 private:
  struct Mono {
    int a;
    int b;  // -1 for a linear statistic
  };
  std::vector<VertexSpec> members_;
  std::vector<Mono> monos_;
  bool fixed_ = false;
};

std::shared_ptr<const ExpFamily> make_family(const std::vector<VertexSpec>& members,
                                             const std::vector<std::string>& labels);

// Var[phi_j]^{-1/2} Cov[phi_j, phi_i] Var[phi_i]^{-1/2} under the member density theta, shape r_j x r_i.
Mat correlation_block(const ExpFamily& fam, const Vec& theta, int pos_i, int pos_j);
// Same, from an already computed covariance.
Mat correlation_from_covariance(const ExpFamily& fam, const Mat& cov, int pos_i, int pos_j);
// eta_i under the factor density theta
Vec marginalize_factor(const ExpFamily& fam, const Vec& theta, int pos);

// Symmetric inverse square root with eigenvalue floor 1e-14.
Mat sym_inv_sqrt(const Mat& s);
// Inverse of a covariance, NumericalError when cond > 1e12.
Mat checked_inverse(const Mat& s, const char* what);

// +-1 <-> indicator encoding of a single binary variable (state 0 is x = -1).
double pm1_to_indicator_natural(double theta_pm1);
double indicator_to_pm1_natural(double theta_ind);
double pm1_to_indicator_expectation(double eta_pm1);
double indicator_to_pm1_expectation(double eta_ind);

}  // namespace bzeta
