#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bzeta {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

// Malformed input: bad hypergraph, unknown statistic name, wrong dimension.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A parameter left the natural or expectation domain.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Singular matrices, failed eigensolves, non-converged inner solvers.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bzeta
