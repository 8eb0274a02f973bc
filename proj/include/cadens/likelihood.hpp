#pragma once

#include <memory>
#include <vector>

#include "cadens/dataio.hpp"
#include "cadens/generative.hpp"
#include "cadens/grid.hpp"
#include "cadens/latent_model.hpp"

namespace cadens {

struct CountGrid {
  std::vector<Grid1D> axes;
  Eigen::ArrayXi counts;          // flattened row-major, last axis fastest
  std::int64_t discarded = 0;     // points outside the grid extent

  std::int64_t total() const { return counts.cast<std::int64_t>().sum(); }
};

// Half-open pixels: pixel i covers [start + i*step, start + (i+1)*step).
// Out-of-range points are dropped and tallied in `discarded`.
CountGrid bin_data(const Dataset& data, const Grid2D& grid);

struct ExpectedCounts {
  std::vector<Grid1D> axes;
  Eigen::ArrayXd lambda;
};

// lambda_ij = pixel volume times the density at the pixel center.
ExpectedCounts expected_counts(const Field& joint);

// Poisson log-likelihood: sum of n*ln(lambda) - lambda - ln(n!).
double poisson_log_likelihood(const Eigen::ArrayXd& lambda, const Eigen::ArrayXi& counts);
double log_likelihood(const ExpectedCounts& lambda, const CountGrid& counts);

// Causal density model with a Poisson count likelihood, over standardized
// latent coordinates. Counts must live on the model's working grid.
class PoissonDensityModel final : public LatentModel {
 public:
  PoissonDensityModel(ModelConfig cfg, CountGrid counts);

  const DensityModel& density() const { return model_; }
  const CountGrid& counts() const { return counts_; }

  Eigen::Index dim() const override { return model_.dim(); }
  double log_likelihood(const Eigen::VectorXd& xi) const override;
  Linearization linearize(const Eigen::VectorXd& xi) const override;

 private:
  DensityModel model_;
  CountGrid counts_;
  double log_factorial_sum_ = 0.0;
};

// Fisher metric in latent coordinates plus the prior identity:
// (J^T diag(1/lambda) J + 1) v, evaluated matrix-free.
Eigen::VectorXd apply_fisher_metric(const PoissonDensityModel& model,
                                    const Eigen::VectorXd& xi_bar,
                                    const Eigen::VectorXd& v);

}  // namespace cadens
