#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cadens {

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Raised when an iterative solve fails to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Matrix-free conjugate gradient for symmetric positive-definite operators.
// Stops when ||Ax - b|| <= tol * ||b||; x holds the initial guess on entry.
CgResult conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int max_iter);

}  // namespace cadens
