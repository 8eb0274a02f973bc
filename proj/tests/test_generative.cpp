#include <doctest.h>

#include <cmath>

#include "cadens/generative.hpp"
#include "cadens/harmonic.hpp"
#include "cadens/likelihood.hpp"
#include "cadens/rng.hpp"

using namespace cadens;

namespace {

ModelConfig small_model(Direction dir, int nx = 6, int ny = 8) {
  ModelConfig cfg;
  cfg.direction = dir;
  cfg.grid = Grid2D{make_grid(nx, 0.0, 1.0, 1.0), make_grid(ny, 0.0, 0.5, 1.0)};
  cfg.rho0 = 3.0;
  return cfg;
}

Eigen::VectorXd random_latent(const DensityModel& m, std::uint64_t seed) {
  Rng rng(seed);
  return rng.normal_vector(m.dim());
}

double column_integral(const DensityModel::Eval& e, int nx, int ny, double dy, int i) {
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) acc += e.p[static_cast<Eigen::Index>(i) * ny + j];
  (void)nx;
  return acc * dy;
}

}  // namespace

TEST_CASE("conditional pdf: uniform when fields vanish") {
  const ModelConfig cfg = small_model(Direction::XtoY);
  const DensityModel m(cfg);
  const Eigen::VectorXd xi = Eigen::VectorXd::Zero(m.dim());
  const auto e = m.evaluate(xi);

  const double Ly = cfg.grid.gy.n_pixels * cfg.grid.gy.step;
  for (Eigen::Index i = 0; i < e.p.size(); ++i) {
    CHECK(e.p[i] == doctest::Approx(1.0 / Ly).epsilon(1e-12));
  }
  // with f = 0 the joint is rho0 / Ly everywhere
  for (Eigen::Index i = 0; i < e.rho.size(); ++i) {
    CHECK(e.rho[i] == doctest::Approx(cfg.rho0 / Ly).epsilon(1e-12));
  }
}

TEST_CASE("conditional pdf: columns normalize for random latents") {
  const ModelConfig cfg = small_model(Direction::XtoY);
  const DensityModel m(cfg);
  for (int trial = 0; trial < 25; ++trial) {
    const auto e = m.evaluate(random_latent(m, 100 + trial));
    for (int i = 0; i < cfg.grid.gx.n_pixels; ++i) {
      CHECK(std::abs(column_integral(e, cfg.grid.gx.n_pixels, cfg.grid.gy.n_pixels,
                                     cfg.grid.gy.step, i) -
                     1.0) < 1e-10);
    }
    CHECK(e.p.minCoeff() > 0.0);
    CHECK(e.rho.minCoeff() > 0.0);
  }
}

TEST_CASE("gauge invariance: adding any pure-y structure to h is a no-op") {
  const Grid2D grid{make_grid(7, 0.0, 1.0, 1.0), make_grid(9, 2.0, 0.25, 1.0)};
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    Field g = make_field(grid.gy);
    Field h = make_field(grid);
    Field gprime = make_field(grid.gy);
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = rng.normal();
    for (Eigen::Index i = 0; i < h.values.size(); ++i) h.values[i] = rng.normal();
    for (Eigen::Index i = 0; i < gprime.values.size(); ++i) gprime.values[i] = rng.normal();

    Field h_shifted = h;
    for (int i = 0; i < grid.gx.n_pixels; ++i) {
      for (int j = 0; j < grid.gy.n_pixels; ++j) {
        h_shifted.values[static_cast<Eigen::Index>(i) * grid.gy.n_pixels + j] +=
            gprime.values[j];
      }
    }
    const Field p0 = conditional_pdf(g, h, grid);
    const Field p1 = conditional_pdf(g, h_shifted, grid);
    CHECK((p0.values - p1.values).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("conditional pdf: h = 0 makes every column identical") {
  const Grid2D grid{make_grid(5, 0.0, 1.0, 1.0), make_grid(6, 0.0, 1.0, 1.0)};
  Rng rng(17);
  Field g = make_field(grid.gy);
  for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values[i] = rng.normal();
  const Field h = make_field(grid);  // zeros
  const Field p = conditional_pdf(g, h, grid);
  const int ny = grid.gy.n_pixels;
  for (int i = 1; i < grid.gx.n_pixels; ++i) {
    for (int j = 0; j < ny; ++j) {
      CHECK(p.values[static_cast<Eigen::Index>(i) * ny + j] == p.values[j]);
    }
  }
}

TEST_CASE("joint density: marginalizing over y returns rho0 exp(f)") {
  const ModelConfig cfg = small_model(Direction::XtoY);
  const DensityModel m(cfg);
  const auto e = m.evaluate(random_latent(m, 7));
  const int ny = cfg.grid.gy.n_pixels;
  for (int i = 0; i < cfg.grid.gx.n_pixels; ++i) {
    double acc = 0.0;
    for (int j = 0; j < ny; ++j) acc += e.rho[static_cast<Eigen::Index>(i) * ny + j];
    acc *= cfg.grid.gy.step;
    CHECK(acc == doctest::Approx(cfg.rho0 * std::exp(e.f[i])).epsilon(1e-10));
  }
}

TEST_CASE("joint density bookkeeping: flat latent integrates to rho0 * Lx") {
  const ModelConfig cfg = small_model(Direction::XtoY);
  const DensityModel m(cfg);
  const auto r = m.realize(Eigen::VectorXd::Zero(m.dim()));
  const double Lx = cfg.grid.gx.n_pixels * cfg.grid.gx.step;
  CHECK(integrate(r.joint) == doctest::Approx(cfg.rho0 * Lx).epsilon(1e-10));
}

TEST_CASE("realize_field: zero latent, amplitude linearity, prior variance") {
  const Grid1D g = make_grid(24, 0.0, 1.0, 2.0);
  const MaternHyperPrior prior{{0.3, 0.1}, {0.25, 0.1}, {-4.0, 1.0}};

  const Field zero = realize_field(Eigen::VectorXd::Zero(g.padded_n),
                                   Eigen::Vector3d::Zero(), g, prior);
  CHECK(zero.values.abs().maxCoeff() == 0.0);

  // doubling the amplitude parameter doubles the field for the same modes
  Rng rng(5);
  const Eigen::VectorXd xi = rng.normal_vector(g.padded_n);
  MaternHyperPrior doubled = prior;
  doubled.a = LogNormalPrior{2.0 * prior.a.mean, 2.0 * prior.a.stddev};
  const Field f1 = realize_field(xi, Eigen::Vector3d::Zero(), g, prior);
  const Field f2 = realize_field(xi, Eigen::Vector3d::Zero(), g, doubled);
  // scaling mean and std together scales exp(mu_log) by the same factor
  CHECK((f2.values - 2.0 * f1.values).abs().maxCoeff() < 1e-12);

  // prior-variance oracle: pooled sample variance over realizations matches
  // sum_k P(k) * mode volume
  MaternParams th{sample_hyper(0.0, prior.a), sample_hyper(0.0, prior.k0),
                  sample_hyper(0.0, prior.gamma)};
  const Eigen::ArrayXd freqs = synthesis_freqs(g);
  double expected = 0.0;
  for (Eigen::Index j = 0; j < freqs.size(); ++j) {
    expected += matern_power(freqs[j], th) / g.padded_length();
  }
  double acc = 0.0;
  long count = 0;
  Rng prng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const Field f = realize_field(prng.normal_vector(g.padded_n),
                                  Eigen::Vector3d::Zero(), g, prior);
    acc += f.values.square().sum();
    count += f.values.size();
  }
  const double sample_var = acc / count;
  CHECK(sample_var == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("build_density: independent model has equal columns; no h block") {
  const ModelConfig cfg = small_model(Direction::Independent);
  const DensityModel m(cfg);
  CHECK_FALSE(m.layout().has_h);
  const auto e = m.evaluate(random_latent(m, 12));
  const int ny = cfg.grid.gy.n_pixels;
  for (int i = 1; i < cfg.grid.gx.n_pixels; ++i) {
    for (int j = 0; j < ny; ++j) {
      CHECK(e.p[static_cast<Eigen::Index>(i) * ny + j] == e.p[j]);
    }
  }
  CHECK(e.h.abs().maxCoeff() == 0.0);
}

TEST_CASE("build_density: latent dimension mismatch throws") {
  const ModelConfig cfg = small_model(Direction::XtoY);
  const DensityModel m(cfg);
  CHECK_THROWS_AS(m.evaluate(Eigen::VectorXd::Zero(m.dim() + 1)), std::invalid_argument);
}

TEST_CASE("swap equivalence: YtoX on D equals XtoY on swapped D") {
  // identical log-likelihood for corresponding latents on an 8x8 grid
  ModelConfig base;
  base.grid = Grid2D{make_grid(8, 0.0, 1.0, 1.0), make_grid(8, 1.0, 0.5, 1.0)};
  base.rho0 = 2.0;

  Dataset d;
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    d.records.push_back(Record{8.0 * rng.uniform(), 1.0 + 4.0 * rng.uniform()});
  }
  d.label = "swap";

  ModelConfig ytox = base;
  ytox.direction = Direction::YtoX;
  const DensityModel m_ytox(ytox);
  const CountGrid c_ytox = bin_data(swap_xy(d), m_ytox.working_grid());
  const PoissonDensityModel pm_ytox(ytox, c_ytox);

  ModelConfig xtoy;
  xtoy.direction = Direction::XtoY;
  xtoy.grid = Grid2D{base.grid.gy, base.grid.gx};
  xtoy.rho0 = base.rho0;
  const DensityModel m_xtoy(xtoy);
  const CountGrid c_xtoy = bin_data(swap_xy(d), m_xtoy.working_grid());
  const PoissonDensityModel pm_xtoy(xtoy, c_xtoy);

  REQUIRE(pm_ytox.dim() == pm_xtoy.dim());
  for (int trial = 0; trial < 5; ++trial) {
    Rng lr(900 + trial);
    const Eigen::VectorXd xi = lr.normal_vector(pm_ytox.dim());
    CHECK(pm_ytox.log_likelihood(xi) == pm_xtoy.log_likelihood(xi));
  }
}

TEST_CASE("linearization: jvp matches finite differences, vjp is its adjoint") {
  for (Direction dir : {Direction::XtoY, Direction::Independent}) {
    const ModelConfig cfg = small_model(dir);
    const DensityModel m(cfg);
    const Eigen::VectorXd xi = random_latent(m, 55);
    const auto e = m.evaluate(xi);

    Rng rng(66);
    for (int trial = 0; trial < 8; ++trial) {
      const Eigen::VectorXd v = rng.normal_vector(m.dim());
      const double eps = 1e-6;
      const auto ep = m.evaluate(xi + eps * v);
      const auto em = m.evaluate(xi - eps * v);
      const Eigen::ArrayXd fd = (ep.lambda - em.lambda) / (2.0 * eps);
      const Eigen::ArrayXd jv = m.lambda_jvp(e, v);
      const double scale = fd.abs().maxCoeff() + 1e-12;
      CHECK((jv - fd).abs().maxCoeff() / scale < 1e-5);

      // adjoint consistency: <u, J v> == <J^T u, v>
      Eigen::ArrayXd u(e.lambda.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
      const double lhs = (u * jv).sum();
      const double rhs = m.lambda_vjp(e, u).dot(v);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("suppressed-coupling independent variant matches the removed variant") {
  ModelConfig removed = small_model(Direction::Independent);
  ModelConfig suppressed = removed;
  suppressed.suppressed_coupling = true;

  const DensityModel m_removed(removed);
  const DensityModel m_suppressed(suppressed);
  CHECK(m_suppressed.layout().has_h);
  CHECK(m_suppressed.dim() > m_removed.dim());

  // same f/g/hyper latents, zero h block: conditionals agree to the
  // suppression scale
  Rng rng(3);
  Eigen::VectorXd xi_r = rng.normal_vector(m_removed.dim());
  Eigen::VectorXd xi_s = Eigen::VectorXd::Zero(m_suppressed.dim());
  const auto& lr = m_removed.layout();
  const auto& ls = m_suppressed.layout();
  xi_s.segment(ls.xi_f, ls.nx_pad) = xi_r.segment(lr.xi_f, lr.nx_pad);
  xi_s.segment(ls.xi_g, ls.ny_pad) = xi_r.segment(lr.xi_g, lr.ny_pad);
  xi_s.segment(ls.hyper_f, 3) = xi_r.segment(lr.hyper_f, 3);
  xi_s.segment(ls.hyper_g, 3) = xi_r.segment(lr.hyper_g, 3);
  Rng hrng(4);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(ls.nx_pad) * ls.ny_pad; ++i) {
    xi_s[ls.xi_h + i] = hrng.normal();
  }
  const auto er = m_removed.evaluate(xi_r);
  const auto es = m_suppressed.evaluate(xi_s);
  CHECK((er.p - es.p).abs().maxCoeff() < 1e-4);
}
