#include "cadens/matern.hpp"

#include <cmath>
#include <stdexcept>

#include "cadens/mathutil.hpp"

namespace cadens {

double matern_amplitude(double k, const MaternParams& p) {
  const double r = k / p.k0;
  return p.a * std::pow(1.0 + r * r, 0.25 * p.gamma);
}

double matern_power(double k, const MaternParams& p) {
  const double amp = matern_amplitude(k, p);
  return amp * amp;
}

AmplitudeGrad matern_amplitude_grad(double k, const MaternParams& p) {
  const double r = k / p.k0;
  const double b = 1.0 + r * r;
  const double amp = p.a * std::pow(b, 0.25 * p.gamma);
  AmplitudeGrad g;
  g.d_a = amp / p.a;
  g.d_k0 = p.a * 0.25 * p.gamma * std::pow(b, 0.25 * p.gamma - 1.0) *
           (-2.0 * k * k / (p.k0 * p.k0 * p.k0));
  g.d_gamma = amp * 0.25 * std::log(b);
  return g;
}

namespace {

// Linear-space (mean, std) -> log-space (mu, sigma).
void lognormal_log_moments(const LogNormalPrior& prior, double& mu_log,
                           double& sigma_log) {
  if (!(prior.mean > 0.0) || !(prior.stddev > 0.0)) {
    throw std::invalid_argument("log-normal prior needs positive mean and stddev");
  }
  const double cv = prior.stddev / prior.mean;
  const double sigma2 = std::log1p(cv * cv);
  sigma_log = std::sqrt(sigma2);
  mu_log = std::log(prior.mean) - 0.5 * sigma2;
}

}  // namespace

double sample_hyper(double latent, const LogNormalPrior& prior) {
  double mu, sigma;
  lognormal_log_moments(prior, mu, sigma);
  return std::exp(mu + sigma * latent);
}

double sample_hyper(double latent, const NormalPrior& prior) {
  return prior.mean + prior.stddev * latent;
}

double sample_hyper(double latent, const UniformPrior& prior) {
  if (!(prior.lo < prior.hi)) {
    throw std::invalid_argument("uniform prior needs lo < hi");
  }
  return prior.lo + (prior.hi - prior.lo) * norm_cdf(latent);
}

double sample_hyper_derivative(double latent, const LogNormalPrior& prior) {
  double mu, sigma;
  lognormal_log_moments(prior, mu, sigma);
  return sigma * std::exp(mu + sigma * latent);
}

double sample_hyper_derivative(double /*latent*/, const NormalPrior& prior) {
  return prior.stddev;
}

double sample_hyper_derivative(double latent, const UniformPrior& prior) {
  return (prior.hi - prior.lo) * norm_pdf(latent);
}

double outer_amplitude(double kx, double ky, const MaternParams& px,
                       const MaternParams& py, double zero_mode) {
  if (kx == 0.0 && ky == 0.0) return zero_mode;
  const double ax = (kx == 0.0) ? 1.0 : matern_amplitude(kx, px);
  const double ay = (ky == 0.0) ? 1.0 : matern_amplitude(ky, py);
  return ax * ay;
}

}  // namespace cadens
