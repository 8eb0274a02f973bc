#pragma once

#include <string>
#include <vector>

#include "cadens/grid.hpp"
#include "cadens/inference.hpp"
#include "cadens/latent_model.hpp"
#include "cadens/likelihood.hpp"
#include "cadens/matern.hpp"

namespace cadens {

// Direction-agnostic n-dimensional density estimator: log-normal density
// rho = exp(s) with per-axis factorized Matern spectra and one shared zero
// mode, fitted to Poisson pixel counts.
struct MkdeModel {
  std::vector<Grid1D> axes;               // n >= 1
  std::vector<MaternHyperPrior> priors;   // one per axis
  UniformPrior zero_mode{1e-15, 5.0};
};

MaternHyperPrior default_mkde_prior();  // a=(0.3+-0.2), k0=(4.0+-3.0), gamma=(-6.0+-3.0)
MkdeModel make_mkde_model(std::vector<Grid1D> axes);

class MkdeDensityModel final : public LatentModel {
 public:
  MkdeDensityModel(MkdeModel model, CountGrid counts);

  Eigen::Index dim() const override { return dim_; }
  Eigen::Index n_modes() const { return n_modes_; }
  const MkdeModel& model() const { return model_; }

  double log_likelihood(const Eigen::VectorXd& xi) const override;
  Linearization linearize(const Eigen::VectorXd& xi) const override;

  // Density field exp(s) on the unpadded grid for one latent vector.
  Field density(const Eigen::VectorXd& xi) const;

 private:
  struct Eval;
  Eval evaluate(const Eigen::VectorXd& xi) const;

  MkdeModel model_;
  CountGrid counts_;
  std::vector<Eigen::ArrayXd> freqs_;  // synthesis frequencies per axis
  Eigen::Index n_modes_ = 0;
  Eigen::Index dim_ = 0;
  double pixvol_ = 1.0;
  double log_factorial_sum_ = 0.0;
};

PosteriorApprox mkde_fit(const CountGrid& counts, const MkdeModel& model,
                         const InferenceConfig& cfg);

struct MkdeMarginal {
  Field mean;
  Field sigma;
};

// Marginalize the posterior density over the listed axes (sum times their
// pixel volume, per posterior sample); moments over samples. Marginalizing
// over every axis leaves a zero-dimensional field holding the total mass.
MkdeMarginal mkde_marginal(const PosteriorApprox& posterior, const MkdeModel& model,
                           const CountGrid& counts, const std::vector<int>& axes_to_sum);

// Marginalize a single density field (used by oracles and plotting).
Field marginalize(const Field& density, const std::vector<int>& axes_to_sum);

// n-D counts as CSV rows `i0,i1,...,in-1,count`; '#' lines are comments.
CountGrid load_counts_csv(const std::string& path, const std::vector<Grid1D>& axes);

// Poisson pixel counts drawn from a density field.
CountGrid poisson_counts_from_density(const Field& density, Rng rng);

}  // namespace cadens
