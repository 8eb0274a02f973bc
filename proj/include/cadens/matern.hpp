#pragma once

#include <Eigen/Core>

namespace cadens {

// Matern-family power spectrum P(k) = a^2 [1 + (k/k0)^2]^(gamma/2).
// Negative gamma gives a decaying spectrum (smooth fields).
struct MaternParams {
  double a = 1.0;      // fluctuation amplitude
  double k0 = 1.0;     // inverse correlation length
  double gamma = -4.0  /* spectral index */;
};

// sqrt(P(k)) = a [1 + (k/k0)^2]^(gamma/4); strictly positive for k >= 0.
double matern_amplitude(double k, const MaternParams& p);
double matern_power(double k, const MaternParams& p);

// Partial derivatives of matern_amplitude with respect to (a, k0, gamma).
struct AmplitudeGrad {
  double d_a = 0.0;
  double d_k0 = 0.0;
  double d_gamma = 0.0;
};
AmplitudeGrad matern_amplitude_grad(double k, const MaternParams& p);

// Prior marginals. Log-normal parameters are the distribution's linear-space
// mean and standard deviation, moment-matched internally.
struct LogNormalPrior {
  double mean = 1.0;
  double stddev = 1.0;
};
struct NormalPrior {
  double mean = 0.0;
  double stddev = 1.0;
};
struct UniformPrior {
  double lo = 0.0;
  double hi = 1.0;
};

// Standard-normal latent -> prior-distributed value.
double sample_hyper(double latent, const LogNormalPrior& prior);
double sample_hyper(double latent, const NormalPrior& prior);
double sample_hyper(double latent, const UniformPrior& prior);

// d(sample_hyper)/d(latent), used by the model linearization.
double sample_hyper_derivative(double latent, const LogNormalPrior& prior);
double sample_hyper_derivative(double latent, const NormalPrior& prior);
double sample_hyper_derivative(double latent, const UniformPrior& prior);

struct MaternHyperPrior {
  LogNormalPrior a;
  LogNormalPrior k0;
  NormalPrior gamma;
};

// Separable two-axis amplitude with a shared zero mode: each axis's DC
// amplitude is replaced by 1 before the product and the joint DC entry is
// zero_mode alone, which removes the per-axis DC degeneracy.
double outer_amplitude(double kx, double ky, const MaternParams& px,
                       const MaternParams& py, double zero_mode);

}  // namespace cadens
