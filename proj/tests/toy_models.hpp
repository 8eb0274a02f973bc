#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "cadens/latent_model.hpp"

namespace cadens::test {

// Conjugate linear-Gaussian model: d = R xi + noise, noise ~ N(0, diag(var)).
// Everything about the posterior and the evidence is available in closed
// form, which makes this the oracle for the inference and evidence stacks.
class GaussianLinearModel final : public LatentModel {
 public:
  GaussianLinearModel(Eigen::MatrixXd response, Eigen::VectorXd noise_var,
                      Eigen::VectorXd data)
      : R_(std::move(response)), nvar_(std::move(noise_var)), d_(std::move(data)) {}

  Eigen::Index dim() const override { return R_.cols(); }

  double log_likelihood(const Eigen::VectorXd& xi) const override {
    const Eigen::VectorXd r = d_ - R_ * xi;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      ll += -0.5 * r[i] * r[i] / nvar_[i] - 0.5 * std::log(2.0 * M_PI * nvar_[i]);
    }
    return ll;
  }

  Linearization linearize(const Eigen::VectorXd& xi) const override {
    Linearization lin;
    lin.log_likelihood = log_likelihood(xi);
    const Eigen::VectorXd r = d_ - R_ * xi;
    lin.gradient = R_.transpose() * (r.array() / nvar_.array()).matrix();
    const Eigen::MatrixXd R = R_;
    const Eigen::VectorXd nv = nvar_;
    lin.metric = [R, nv](const Eigen::VectorXd& v) {
      const Eigen::VectorXd rv = R * v;
      return Eigen::VectorXd(R.transpose() * (rv.array() / nv.array()).matrix());
    };
    lin.metric_sample = [R, nv](Rng& rng) {
      Eigen::VectorXd eta(R.rows());
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta[i] = rng.normal() / std::sqrt(nv[i]);
      }
      return Eigen::VectorXd(R.transpose() * eta);
    };
    return lin;
  }

  Eigen::MatrixXd posterior_precision() const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(dim(), dim());
    M += R_.transpose() * nvar_.cwiseInverse().asDiagonal() * R_;
    return M;
  }

  Eigen::VectorXd posterior_mean() const {
    const Eigen::VectorXd b = R_.transpose() * (d_.array() / nvar_.array()).matrix();
    return posterior_precision().ldlt().solve(b);
  }

  double log_evidence() const {
    const Eigen::MatrixXd C =
        Eigen::MatrixXd(nvar_.asDiagonal()) + R_ * R_.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    const Eigen::VectorXd sol = llt.solve(d_);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
      logdet += 2.0 * std::log(llt.matrixL()(i, i));
    }
    return -0.5 * d_.dot(sol) - 0.5 * logdet -
           0.5 * d_.size() * std::log(2.0 * M_PI);
  }

 private:
  Eigen::MatrixXd R_;
  Eigen::VectorXd nvar_;
  Eigen::VectorXd d_;
};

// Likelihood that carries no information: the posterior is the prior and
// the metric is the identity.
class FlatModel final : public LatentModel {
 public:
  explicit FlatModel(Eigen::Index dim) : dim_(dim) {}
  Eigen::Index dim() const override { return dim_; }
  double log_likelihood(const Eigen::VectorXd&) const override { return 0.0; }
  Linearization linearize(const Eigen::VectorXd& xi) const override {
    Linearization lin;
    lin.log_likelihood = 0.0;
    lin.gradient = Eigen::VectorXd::Zero(dim_);
    const Eigen::Index d = dim_;
    lin.metric = [d](const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(d).eval(); };
    lin.metric_sample = [d](Rng&) { return Eigen::VectorXd::Zero(d).eval(); };
    (void)xi;
    return lin;
  }

 private:
  Eigen::Index dim_;
};

inline GaussianLinearModel make_toy_gaussian(Eigen::Index dim, Eigen::Index n_data,
                                             std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd R(n_data, dim);
  for (Eigen::Index i = 0; i < n_data; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) R(i, j) = rng.normal() * 0.8;
  }
  Eigen::VectorXd nvar(n_data);
  for (Eigen::Index i = 0; i < n_data; ++i) nvar[i] = 0.3 + rng.uniform();
  const Eigen::VectorXd truth = rng.normal_vector(dim);
  Eigen::VectorXd d = R * truth;
  for (Eigen::Index i = 0; i < n_data; ++i) d[i] += rng.normal() * std::sqrt(nvar[i]);
  return GaussianLinearModel(R, nvar, d);
}

}  // namespace cadens::test
