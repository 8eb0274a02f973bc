#include "cadens/cg.hpp"

#include <cmath>

namespace cadens {

CgResult conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int max_iter) {
  CgResult res;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  Eigen::VectorXd r = b - apply(x);
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  res.rel_residual = std::sqrt(rs) / bnorm;
  if (res.rel_residual <= tol) {
    res.converged = true;
    return res;
  }
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) {
      // Operator lost positive definiteness numerically; stop with the
      // current iterate and report the residual.
      res.iterations = it;
      res.rel_residual = std::sqrt(rs) / bnorm;
      res.converged = false;
      return res;
    }
    const double alpha = rs / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    res.iterations = it + 1;
    res.rel_residual = std::sqrt(rs_new) / bnorm;
    if (res.rel_residual <= tol) {
      res.converged = true;
      return res;
    }
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  res.converged = false;
  return res;
}

}  // namespace cadens
