#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cadens/latent_model.hpp"
#include "cadens/rng.hpp"

namespace cadens {

struct InferenceConfig {
  int n_samples = 6;             // drawn as antithetic pairs
  int n_global_iterations = 15;  // sample / KL-minimization alternations
  double cg_tolerance = 1e-6;    // relative residual
  int cg_max_iter = 500;
  int optimizer_steps = 25;  // Newton-type steps per global iteration
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all available cores
  // Optional sink for machine-parseable `key=value` progress lines.
  std::function<void(const std::string&)> log;
};

// Gaussian posterior approximation: mean plus residual samples whose
// covariance follows the inverse metric at the mean (implicitly).
struct PosteriorApprox {
  Eigen::VectorXd xi_bar;
  std::vector<Eigen::VectorXd> residuals;  // antithetic pairs
  std::vector<double> kl_history;          // sampled KL per global iteration

  std::vector<Eigen::VectorXd> samples() const {
    std::vector<Eigen::VectorXd> out;
    out.reserve(residuals.size());
    for (const auto& r : residuals) out.push_back(xi_bar + r);
    return out;
  }
};

// Residual samples r ~ N(0, M^-1) with M the Fisher-plus-prior metric at
// xi_bar, realized by drawing w ~ N(0, M) in closed form and solving
// M r = w by conjugate gradient. Samples come in antithetic +/- pairs.
// CG non-convergence raises NumericalError carrying the final residual.
std::vector<Eigen::VectorXd> draw_metric_samples(const LatentModel& model,
                                                 const Eigen::VectorXd& xi_bar,
                                                 int n, Rng rng,
                                                 const InferenceConfig& cfg);

// Minimize the sampled KL objective over the mean with residuals held
// fixed: curvature-preconditioned Newton descent with backtracking.
Eigen::VectorXd minimize_kl(const LatentModel& model, Eigen::VectorXd xi_bar,
                            const std::vector<Eigen::VectorXd>& residuals,
                            int steps, const InferenceConfig& cfg);

// Full alternation loop; the returned residuals are re-drawn at the final
// mean. Deterministic given (model, config, seed).
PosteriorApprox run_mgvi(const LatentModel& model, const InferenceConfig& cfg);

// Sample mean and unbiased standard deviation of q over posterior samples.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> posterior_moments(
    const PosteriorApprox& posterior,
    const std::function<Eigen::ArrayXd(const Eigen::VectorXd&)>& q);

// Sampled KL objective (mean of -log P(d, xi_bar + r_s) over residuals,
// dropping latent-prior normalization constants).
double sampled_kl(const LatentModel& model, const Eigen::VectorXd& xi_bar,
                  const std::vector<Eigen::VectorXd>& residuals, int threads = 0);

}  // namespace cadens
