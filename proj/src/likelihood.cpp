#include "cadens/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace cadens {

namespace {

// Floor keeps n*ln(lambda) finite if a pixel mean underflows.
constexpr double kLambdaFloor = 1e-290;

int pixel_index(double v, const Grid1D& g) {
  const double rel = (v - g.start) / g.step;
  if (rel < 0.0) return -1;
  const int i = static_cast<int>(rel);
  if (i >= g.n_pixels) return -1;
  return i;
}

}  // namespace

CountGrid bin_data(const Dataset& data, const Grid2D& grid) {
  CountGrid out;
  out.axes = grid.axes();
  out.counts = Eigen::ArrayXi::Zero(grid.size());
  const int ny = grid.gy.n_pixels;
  for (const auto& r : data.records) {
    const int ix = pixel_index(r.x, grid.gx);
    const int iy = pixel_index(r.y, grid.gy);
    if (ix < 0 || iy < 0) {
      ++out.discarded;
      continue;
    }
    out.counts[static_cast<Eigen::Index>(ix) * ny + iy] += 1;
  }
  return out;
}

ExpectedCounts expected_counts(const Field& joint) {
  ExpectedCounts out;
  out.axes = joint.axes;
  out.lambda = joint.values * joint.pixel_volume();
  return out;
}

double poisson_log_likelihood(const Eigen::ArrayXd& lambda, const Eigen::ArrayXi& counts) {
  if (lambda.size() != counts.size()) {
    throw std::invalid_argument("poisson_log_likelihood: shape mismatch");
  }
  double ll = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double lam = lambda[i];
    if (!(lam > 0.0)) {
      throw std::domain_error("poisson_log_likelihood: lambda must be positive");
    }
    const int n = counts[i];
    ll -= lam;
    if (n > 0) {
      ll += n * std::log(std::max(lam, kLambdaFloor)) - std::lgamma(n + 1.0);
    }
  }
  return ll;
}

double log_likelihood(const ExpectedCounts& lambda, const CountGrid& counts) {
  return poisson_log_likelihood(lambda.lambda, counts.counts);
}

PoissonDensityModel::PoissonDensityModel(ModelConfig cfg, CountGrid counts)
    : model_(std::move(cfg)), counts_(std::move(counts)) {
  const Grid2D& wg = model_.working_grid();
  if (counts_.axes.size() != 2 || counts_.axes[0].n_pixels != wg.gx.n_pixels ||
      counts_.axes[1].n_pixels != wg.gy.n_pixels) {
    throw std::invalid_argument("PoissonDensityModel: counts do not match the working grid");
  }
  for (Eigen::Index i = 0; i < counts_.counts.size(); ++i) {
    log_factorial_sum_ += std::lgamma(counts_.counts[i] + 1.0);
  }
}

double PoissonDensityModel::log_likelihood(const Eigen::VectorXd& xi) const {
  const auto eval = model_.evaluate(xi);
  double ll = -log_factorial_sum_;
  for (Eigen::Index i = 0; i < eval.lambda.size(); ++i) {
    const double lam = std::max(eval.lambda[i], kLambdaFloor);
    ll -= eval.lambda[i];
    if (counts_.counts[i] > 0) ll += counts_.counts[i] * std::log(lam);
  }
  return ll;
}

LatentModel::Linearization PoissonDensityModel::linearize(const Eigen::VectorXd& xi) const {
  auto eval = std::make_shared<DensityModel::Eval>(model_.evaluate(xi));

  Linearization lin;
  lin.log_likelihood = -log_factorial_sum_;
  Eigen::ArrayXd resid(eval->lambda.size());
  for (Eigen::Index i = 0; i < eval->lambda.size(); ++i) {
    const double lam = std::max(eval->lambda[i], kLambdaFloor);
    lin.log_likelihood -= eval->lambda[i];
    if (counts_.counts[i] > 0) lin.log_likelihood += counts_.counts[i] * std::log(lam);
    resid[i] = counts_.counts[i] / lam - 1.0;
  }
  lin.gradient = model_.lambda_vjp(*eval, resid);

  const DensityModel* model = &model_;
  Eigen::ArrayXd inv_lambda = eval->lambda.max(kLambdaFloor).inverse();
  lin.metric = [model, eval, inv_lambda](const Eigen::VectorXd& v) {
    const Eigen::ArrayXd jv = model->lambda_jvp(*eval, v);
    return model->lambda_vjp(*eval, jv * inv_lambda);
  };
  Eigen::ArrayXd inv_sqrt_lambda = inv_lambda.sqrt();
  lin.metric_sample = [model, eval, inv_sqrt_lambda](Rng& rng) {
    Eigen::ArrayXd eta(inv_sqrt_lambda.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = rng.normal();
    return model->lambda_vjp(*eval, eta * inv_sqrt_lambda);
  };
  return lin;
}

Eigen::VectorXd apply_fisher_metric(const PoissonDensityModel& model,
                                    const Eigen::VectorXd& xi_bar,
                                    const Eigen::VectorXd& v) {
  if (v.size() != xi_bar.size()) {
    throw std::invalid_argument("apply_fisher_metric: dimension mismatch");
  }
  const auto lin = model.linearize(xi_bar);
  return lin.metric(v) + v;
}

}  // namespace cadens
