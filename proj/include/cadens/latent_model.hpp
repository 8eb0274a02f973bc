#pragma once

#include <functional>

#include <Eigen/Core>

#include "cadens/rng.hpp"

namespace cadens {

// A likelihood over standardized latent coordinates: every latent entry
// carries an independent standard-normal prior, the likelihood supplies the
// data coupling. Inference and evidence estimation only touch models through
// this interface, so toy conjugate models and the Poisson density models
// share one code path.
class LatentModel {
 public:
  virtual ~LatentModel() = default;

  virtual Eigen::Index dim() const = 0;

  // log P(d | xi), including data-dependent constants.
  virtual double log_likelihood(const Eigen::VectorXd& xi) const = 0;

  struct Linearization {
    double log_likelihood = 0.0;
    Eigen::VectorXd gradient;  // d log_likelihood / d xi
    // Gauss-Newton/Fisher likelihood metric J^T N^-1 J applied to a vector
    // (prior identity not included).
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> metric;
    // Draw w with Cov[w] equal to the likelihood metric.
    std::function<Eigen::VectorXd(Rng&)> metric_sample;
  };

  virtual Linearization linearize(const Eigen::VectorXd& xi) const = 0;
};

}  // namespace cadens
