#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "cadens/harmonic.hpp"
#include "cadens/mkde.hpp"

using namespace cadens;

namespace {

CountGrid zero_counts(const std::vector<Grid1D>& axes) {
  CountGrid c;
  c.axes = axes;
  std::int64_t n = 1;
  for (const auto& ax : axes) n *= ax.n_pixels;
  c.counts = Eigen::ArrayXi::Zero(n);
  return c;
}

}  // namespace

TEST_CASE("mkde: S1 default priors round-trip") {
  const MkdeModel m = make_mkde_model({make_grid(16, 0.0, 1.0 / 16, 2.0)});
  REQUIRE(m.priors.size() == 1);
  CHECK(m.priors[0].a.mean == doctest::Approx(0.3));
  CHECK(m.priors[0].a.stddev == doctest::Approx(0.2));
  CHECK(m.priors[0].k0.mean == doctest::Approx(4.0));
  CHECK(m.priors[0].k0.stddev == doctest::Approx(3.0));
  CHECK(m.priors[0].gamma.mean == doctest::Approx(-6.0));
  CHECK(m.priors[0].gamma.stddev == doctest::Approx(3.0));
  CHECK(m.zero_mode.lo == doctest::Approx(1e-15));
  CHECK(m.zero_mode.hi == doctest::Approx(5.0));
}

TEST_CASE("mkde: factorized prior amplitudes on an 8x8 grid") {
  const Grid1D ax = make_grid(8, 0.0, 0.125, 1.0);
  const Grid1D ay = make_grid(8, 0.0, 0.25, 1.0);
  MkdeModel model = make_mkde_model({ax, ay});
  const CountGrid counts = zero_counts(model.axes);
  const MkdeDensityModel latent(model, counts);

  // latent 0: hyper parameters at their prior centers
  const Eigen::VectorXd xi = Eigen::VectorXd::Zero(latent.dim());
  const MaternParams thx{sample_hyper(0.0, model.priors[0].a),
                         sample_hyper(0.0, model.priors[0].k0),
                         sample_hyper(0.0, model.priors[0].gamma)};
  const MaternParams thy = thx;
  const double alpha = sample_hyper(0.0, model.zero_mode);

  (void)xi;
  // direct check against the documented rule via the density map itself:
  // a single-mode latent synthesizes that mode scaled by its amplitude
  const Eigen::ArrayXd kx = synthesis_freqs(ax);
  const Eigen::ArrayXd ky = synthesis_freqs(ay);
  for (Eigen::Index jx = 0; jx < ax.padded_n; ++jx) {
    for (Eigen::Index jy = 0; jy < ay.padded_n; ++jy) {
      const Eigen::Index mode = jx * ay.padded_n + jy;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(latent.dim());
      e[mode] = 1.0;
      const Field dens = latent.density(e);
      // log-density s for a single excited mode
      const Eigen::ArrayXd s = dens.values.log();
      Eigen::ArrayXd coeffs = Eigen::ArrayXd::Zero(
          static_cast<Eigen::Index>(ax.padded_n) * ay.padded_n);
      coeffs[mode] = 1.0;
      const Field basis = harmonic_synthesize(coeffs, std::vector<Grid1D>{ax, ay});
      const double expected_amp =
          (jx == 0 && jy == 0) ? alpha
                               : outer_amplitude(kx[jx], ky[jy], thx, thy, alpha);
      CHECK((s - expected_amp * basis.values).abs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("mkde: linearization consistency (gradient FD, metric adjoint)") {
  for (int dims = 1; dims <= 3; ++dims) {
    std::vector<Grid1D> axes;
    for (int d = 0; d < dims; ++d) axes.push_back(make_grid(4 + d, 0.0, 0.3, 1.0));
    MkdeModel model = make_mkde_model(axes);
    CountGrid counts = zero_counts(axes);
    Rng crng(40 + dims);
    for (Eigen::Index i = 0; i < counts.counts.size(); ++i) {
      counts.counts[i] = crng.uniform_int(4);
    }
    const MkdeDensityModel latent(model, counts);

    Rng rng(50 + dims);
    const Eigen::VectorXd xi = 0.5 * rng.normal_vector(latent.dim());
    const auto lin = latent.linearize(xi);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd v = rng.normal_vector(latent.dim());
      const double eps = 1e-5;
      const double fd = (latent.log_likelihood(xi + eps * v) -
                         latent.log_likelihood(xi - eps * v)) /
                        (2.0 * eps);
      CHECK(lin.gradient.dot(v) == doctest::Approx(fd).epsilon(1e-4));

      const Eigen::VectorXd u = rng.normal_vector(latent.dim());
      CHECK(u.dot(lin.metric(v)) == doctest::Approx(v.dot(lin.metric(u))).epsilon(1e-9));
      CHECK(v.dot(lin.metric(v)) >= 0.0);
    }
  }
}

TEST_CASE("mkde: all-zero counts keep the posterior within the prior band") {
  // zero counts only push the density down through the -lambda term; the
  // posterior mean must stay within one prior standard deviation of the
  // prior origin and the total mass must shrink below the prior-center mass
  const Grid1D g = make_grid(4, 0.0, 0.25, 1.0);
  MkdeModel model = make_mkde_model({g});
  const CountGrid counts = zero_counts(model.axes);
  InferenceConfig cfg;
  cfg.n_samples = 4;
  cfg.n_global_iterations = 3;
  cfg.optimizer_steps = 8;
  cfg.seed = 3;
  const PosteriorApprox post = mkde_fit(counts, model, cfg);
  const MkdeDensityModel latent(model, counts);
  const Field dens = latent.density(post.xi_bar);
  CHECK(dens.values.minCoeff() > 0.0);

  // prior pixel standard deviation of s at the hyper-prior centers
  const MaternParams th{sample_hyper(0.0, model.priors[0].a),
                        sample_hyper(0.0, model.priors[0].k0),
                        sample_hyper(0.0, model.priors[0].gamma)};
  const double alpha = sample_hyper(0.0, model.zero_mode);
  const Eigen::ArrayXd freqs = synthesis_freqs(g);
  double var = alpha * alpha / g.padded_length();
  for (Eigen::Index j = 1; j < freqs.size(); ++j) {
    var += matern_power(freqs[j], th) / g.padded_length();
  }
  const double prior_std = std::sqrt(var);

  const Eigen::ArrayXd s = dens.values.log();
  CHECK(std::abs(s.mean()) < prior_std);
  CHECK(s.mean() <= 0.0);                        // shrinkage points downward
  CHECK(integrate(dens) <= g.length() + 1e-12);  // below the prior-center mass
}

TEST_CASE("mkde: 1-D Gaussian-bump peak recovery") {
  const Grid1D g = make_grid(32, 0.0, 1.0 / 32, 2.0);
  Field truth = make_field(g);
  const double n_data = 5000.0;
  for (int i = 0; i < g.n_pixels; ++i) {
    const double x = g.center(i);
    truth.values[i] =
        n_data * std::exp(-0.5 * std::pow((x - 0.52) / 0.12, 2.0)) /
        (0.12 * std::sqrt(2.0 * M_PI));
  }
  const CountGrid counts = poisson_counts_from_density(truth, Rng(9));

  MkdeModel model = make_mkde_model({g});
  InferenceConfig cfg;
  cfg.n_samples = 4;
  cfg.n_global_iterations = 6;
  cfg.optimizer_steps = 15;
  cfg.seed = 4;
  const PosteriorApprox post = mkde_fit(counts, model, cfg);

  const MkdeDensityModel latent(model, counts);
  const Field mean_density = latent.density(post.xi_bar);
  Eigen::Index peak_fit, peak_truth;
  mean_density.values.maxCoeff(&peak_fit);
  truth.values.maxCoeff(&peak_truth);
  CHECK(std::abs(static_cast<int>(peak_fit) - static_cast<int>(peak_truth)) <= 1);
  CHECK(mean_density.values.minCoeff() > 0.0);
}

TEST_CASE("mkde_marginal: totals, separability bookkeeping, axis order") {
  const Grid1D ax = make_grid(6, 0.0, 0.5, 1.0);
  const Grid1D ay = make_grid(8, 1.0, 0.25, 1.0);
  MkdeModel model = make_mkde_model({ax, ay});
  CountGrid counts = zero_counts(model.axes);
  Rng crng(12);
  for (Eigen::Index i = 0; i < counts.counts.size(); ++i) {
    counts.counts[i] = crng.uniform_int(3);
  }
  const MkdeDensityModel latent(model, counts);

  Rng rng(13);
  const Eigen::VectorXd xi = 0.4 * rng.normal_vector(latent.dim());
  const Field dens = latent.density(xi);

  // marginal over all axes equals the total mass
  const Field total = marginalize(dens, {0, 1});
  CHECK(total.dim() == 0);
  CHECK(total.values.size() == 1);
  CHECK(total.values[0] == doctest::Approx(integrate(dens)).epsilon(1e-12));

  // summing over y then x equals summing over x then y
  const Field mx = marginalize(marginalize(dens, {1}), {0});
  const Field my = marginalize(marginalize(dens, {0}), {0});
  CHECK(mx.values[0] == doctest::Approx(my.values[0]).epsilon(1e-12));

  // marginal moments via posterior samples
  PosteriorApprox post;
  post.xi_bar = xi;
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd r = 0.05 * rng.normal_vector(latent.dim());
    post.residuals.push_back(r);
    post.residuals.push_back(-r);
  }
  const MkdeMarginal marg = mkde_marginal(post, model, counts, {1});
  CHECK(marg.mean.dim() == 1);
  CHECK(marg.mean.values.size() == ax.n_pixels);
  CHECK(marg.mean.values.minCoeff() > 0.0);

  CHECK_THROWS_AS(mkde_marginal(post, model, counts, {}), std::invalid_argument);
  CHECK_THROWS_AS(mkde_marginal(post, model, counts, {2}), std::invalid_argument);
}

TEST_CASE("mkde: counts CSV loader") {
  const std::string path = "/tmp/cadens_test_counts.csv";
  {
    std::ofstream out(path);
    out << "# i,j,count\n0,0,3\n1,2,5\n0,0,1\n";
  }
  const std::vector<Grid1D> axes{make_grid(2, 0.0, 1.0, 1.0), make_grid(3, 0.0, 1.0, 1.0)};
  const CountGrid c = load_counts_csv(path, axes);
  std::remove(path.c_str());
  CHECK(c.counts[0] == 4);
  CHECK(c.counts[1 * 3 + 2] == 5);
  CHECK(c.total() == 9);

  {
    std::ofstream out(path);
    out << "5,0,1\n";
  }
  CHECK_THROWS_AS(load_counts_csv(path, axes), std::runtime_error);
  std::remove(path.c_str());
}
