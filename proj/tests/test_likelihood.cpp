#include <doctest.h>

#include <cmath>

#include "cadens/likelihood.hpp"
#include "cadens/rng.hpp"

using namespace cadens;

namespace {

Grid2D default_grids() {
  return Grid2D{make_grid(90, 0.0, 1.0, 2.0), make_grid(128, 3.8, 0.04, 2.0)};
}

}  // namespace

TEST_CASE("bin_data: pixel assignment, thresholds, conservation") {
  const Grid2D grid = default_grids();

  Dataset d;
  d.records = {{0.5, 3.82}, {0.5, 3.82}};
  const CountGrid c = bin_data(d, grid);
  CHECK(c.counts[0] == 2);
  CHECK(c.discarded == 0);

  Dataset below;
  below.records = {{10.0, 3.79}};
  const CountGrid cb = bin_data(below, grid);
  CHECK(cb.total() == 0);
  CHECK(cb.discarded == 1);

  // conservation oracle over random points, some outside the grid
  Dataset rand_data;
  Rng rng(8);
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    rand_data.records.push_back(
        Record{rng.uniform() * 120.0 - 10.0, 3.0 + rng.uniform() * 7.0});
  }
  const CountGrid cr = bin_data(rand_data, grid);
  CHECK(cr.total() + cr.discarded == n);
}

TEST_CASE("bin_data: permutation invariance of the input order") {
  const Grid2D grid{make_grid(8, 0.0, 1.0, 1.0), make_grid(8, 0.0, 1.0, 1.0)};
  Dataset d;
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    d.records.push_back(Record{8.0 * rng.uniform(), 8.0 * rng.uniform()});
  }
  Dataset reversed = d;
  std::reverse(reversed.records.begin(), reversed.records.end());
  const CountGrid a = bin_data(d, grid);
  const CountGrid b = bin_data(reversed, grid);
  CHECK((a.counts == b.counts).all());
}

TEST_CASE("expected_counts: pixel volume scaling and quadrature consistency") {
  const Grid2D grid{make_grid(4, 0.0, 1.0, 1.0), make_grid(5, 0.0, 0.04, 1.0)};
  Field joint = make_field(grid);
  joint.values.setConstant(1.0);
  const ExpectedCounts lam = expected_counts(joint);
  for (Eigen::Index i = 0; i < lam.lambda.size(); ++i) {
    CHECK(lam.lambda[i] == doctest::Approx(0.04));
  }

  Field doubled = joint;
  doubled.values *= 2.0;
  const ExpectedCounts lam2 = expected_counts(doubled);
  CHECK((lam2.lambda - 2.0 * lam.lambda).abs().maxCoeff() < 1e-15);

  Rng rng(12);
  Field random_joint = make_field(grid);
  for (Eigen::Index i = 0; i < random_joint.values.size(); ++i) {
    random_joint.values[i] = rng.uniform() + 0.1;
  }
  const ExpectedCounts lamr = expected_counts(random_joint);
  CHECK(integrate(random_joint) == doctest::Approx(lamr.lambda.sum()).epsilon(1e-12));
}

TEST_CASE("log_likelihood: closed forms and the pmf-product oracle") {
  // 4 pixels, n = 0, lambda = 1 -> -4
  {
    Eigen::ArrayXd lam = Eigen::ArrayXd::Constant(4, 1.0);
    Eigen::ArrayXi n = Eigen::ArrayXi::Zero(4);
    CHECK(poisson_log_likelihood(lam, n) == doctest::Approx(-4.0));
  }
  // single pixel, n = 3, lambda = 2
  {
    Eigen::ArrayXd lam(1);
    lam[0] = 2.0;
    Eigen::ArrayXi n(1);
    n[0] = 3;
    CHECK(poisson_log_likelihood(lam, n) ==
          doctest::Approx(3.0 * std::log(2.0) - 2.0 - std::log(6.0)));
    CHECK(poisson_log_likelihood(lam, n) == doctest::Approx(-1.7124).epsilon(1e-4));
  }
  // brute-force oracle: independent sum of per-pixel log pmfs with the
  // factorial accumulated by explicit multiplication
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int npix = 25;
    Eigen::ArrayXd lam(npix);
    Eigen::ArrayXi n(npix);
    double oracle = 0.0;
    for (int i = 0; i < npix; ++i) {
      lam[i] = 0.05 + 3.0 * rng.uniform();
      n[i] = rng.uniform_int(7);
      double log_fact = 0.0;
      for (int m = 2; m <= n[i]; ++m) log_fact += std::log(static_cast<double>(m));
      oracle += n[i] * std::log(lam[i]) - lam[i] - log_fact;
    }
    const double ll = poisson_log_likelihood(lam, n);
    CHECK(std::abs(ll - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
  }
  // invalid lambda
  Eigen::ArrayXd bad(1);
  bad[0] = 0.0;
  Eigen::ArrayXi n1(1);
  n1[0] = 1;
  CHECK_THROWS_AS(poisson_log_likelihood(bad, n1), std::domain_error);
}

namespace {

PoissonDensityModel toy_poisson_model(Direction dir, std::uint64_t seed, int nx = 4,
                                      int ny = 4) {
  ModelConfig cfg;
  cfg.direction = dir;
  cfg.grid = Grid2D{make_grid(nx, 0.0, 1.0, 1.0), make_grid(ny, 0.0, 1.0, 1.0)};
  cfg.rho0 = 5.0;

  Dataset d;
  Rng rng(seed);
  for (int i = 0; i < 80; ++i) {
    d.records.push_back(Record{nx * rng.uniform(), ny * rng.uniform()});
  }
  CountGrid counts = bin_data(d, DensityModel(cfg).working_grid());
  return PoissonDensityModel(cfg, counts);
}

}  // namespace

TEST_CASE("gradient of the log-likelihood matches finite differences") {
  const PoissonDensityModel model = toy_poisson_model(Direction::XtoY, 5);
  Rng rng(6);
  const Eigen::VectorXd xi = rng.normal_vector(model.dim()) * 0.5;
  const auto lin = model.linearize(xi);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd v = rng.normal_vector(model.dim());
    const double eps = 1e-5;
    const double fd =
        (model.log_likelihood(xi + eps * v) - model.log_likelihood(xi - eps * v)) /
        (2.0 * eps);
    const double an = lin.gradient.dot(v);
    CHECK(an == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("fisher metric: linearity, SPD probes, dense symmetry") {
  const PoissonDensityModel model = toy_poisson_model(Direction::XtoY, 15);
  Rng rng(16);
  const Eigen::VectorXd xi = rng.normal_vector(model.dim()) * 0.3;

  // v = 0 -> 0
  const Eigen::VectorXd zero =
      apply_fisher_metric(model, xi, Eigen::VectorXd::Zero(model.dim()));
  CHECK(zero.norm() == 0.0);

  const auto lin = model.linearize(xi);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd v = rng.normal_vector(model.dim());
    const double quad = v.dot(lin.metric(v) + v);
    CHECK(quad > 0.0);
  }

  // dense assembly on the toy model is symmetric
  const Eigen::Index dim = model.dim();
  Eigen::MatrixXd M(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[c] = 1.0;
    M.col(c) = lin.metric(e) + e;
  }
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-8);

  CHECK_THROWS_AS(apply_fisher_metric(model, xi, Eigen::VectorXd::Zero(dim + 1)),
                  std::invalid_argument);
}

TEST_CASE("metric sample covariance matches the metric on a dense toy") {
  const PoissonDensityModel model = toy_poisson_model(Direction::Independent, 25, 3, 3);
  const Eigen::Index dim = model.dim();
  Rng rng(77);
  const Eigen::VectorXd xi = rng.normal_vector(dim) * 0.2;
  const auto lin = model.linearize(xi);

  Eigen::MatrixXd target(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e[c] = 1.0;
    target.col(c) = lin.metric(e);
  }

  const int n = 20000;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  Rng srng(78);
  for (int s = 0; s < n; ++s) {
    const Eigen::VectorXd w = lin.metric_sample(srng);
    cov += w * w.transpose();
  }
  cov /= n;
  const double rel = (cov - target).norm() / target.norm();
  CHECK(rel < 0.1);
}
