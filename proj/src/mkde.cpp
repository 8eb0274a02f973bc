#include "cadens/mkde.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "cadens/harmonic.hpp"

namespace cadens {

namespace {

constexpr double kLambdaFloor = 1e-290;

struct AxisAmp {
  Eigen::ArrayXd B, d_a, d_k, d_g;
};

AxisAmp axis_amplitude_dc1(const Eigen::ArrayXd& freqs, const MaternParams& p) {
  const Eigen::Index n = freqs.size();
  AxisAmp out{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n),
              Eigen::ArrayXd(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    if (freqs[j] == 0.0) {
      out.B[j] = 1.0;
      out.d_a[j] = out.d_k[j] = out.d_g[j] = 0.0;
      continue;
    }
    out.B[j] = matern_amplitude(freqs[j], p);
    const AmplitudeGrad g = matern_amplitude_grad(freqs[j], p);
    out.d_a[j] = g.d_a;
    out.d_k[j] = g.d_k0;
    out.d_g[j] = g.d_gamma;
  }
  return out;
}

}  // namespace

MaternHyperPrior default_mkde_prior() {
  return MaternHyperPrior{{0.3, 0.2}, {4.0, 3.0}, {-6.0, 3.0}};
}

MkdeModel make_mkde_model(std::vector<Grid1D> axes) {
  MkdeModel m;
  m.priors.assign(axes.size(), default_mkde_prior());
  m.axes = std::move(axes);
  return m;
}

struct MkdeDensityModel::Eval {
  Eigen::VectorXd xi;
  std::vector<AxisAmp> amps;
  std::vector<MaternParams> theta;
  std::vector<Eigen::Vector3d> dtheta;
  double alpha = 0.0, dalpha = 0.0;
  Eigen::ArrayXd A;       // n_modes, includes the shared zero mode
  Eigen::ArrayXd s;       // cropped log-density
  Eigen::ArrayXd lambda;  // pixvol * exp(s)
};

MkdeDensityModel::MkdeDensityModel(MkdeModel model, CountGrid counts)
    : model_(std::move(model)), counts_(std::move(counts)) {
  const std::size_t n_axes = model_.axes.size();
  if (n_axes < 1) throw std::invalid_argument("MkdeDensityModel: need at least one axis");
  if (model_.priors.size() != n_axes) {
    throw std::invalid_argument("MkdeDensityModel: one prior per axis required");
  }
  if (counts_.axes.size() != n_axes) {
    throw std::invalid_argument("MkdeDensityModel: counts dimensionality mismatch");
  }
  n_modes_ = 1;
  std::int64_t n_pix = 1;
  for (std::size_t a = 0; a < n_axes; ++a) {
    if (counts_.axes[a].n_pixels != model_.axes[a].n_pixels) {
      throw std::invalid_argument("MkdeDensityModel: counts grid mismatch");
    }
    freqs_.push_back(synthesis_freqs(model_.axes[a]));
    n_modes_ *= model_.axes[a].padded_n;
    n_pix *= model_.axes[a].n_pixels;
    pixvol_ *= model_.axes[a].step;
  }
  if (counts_.counts.size() != n_pix) {
    throw std::invalid_argument("MkdeDensityModel: counts size mismatch");
  }
  dim_ = n_modes_ + 3 * static_cast<Eigen::Index>(n_axes) + 1;
  for (Eigen::Index i = 0; i < counts_.counts.size(); ++i) {
    log_factorial_sum_ += std::lgamma(counts_.counts[i] + 1.0);
  }
}

MkdeDensityModel::Eval MkdeDensityModel::evaluate(const Eigen::VectorXd& xi) const {
  if (xi.size() != dim_) {
    throw std::invalid_argument("MkdeDensityModel: latent dimension mismatch");
  }
  const std::size_t n_axes = model_.axes.size();
  Eval e;
  e.xi = xi;
  e.amps.resize(n_axes);
  e.theta.resize(n_axes);
  e.dtheta.resize(n_axes);
  for (std::size_t a = 0; a < n_axes; ++a) {
    const Eigen::Index off = n_modes_ + 3 * static_cast<Eigen::Index>(a);
    const MaternHyperPrior& hp = model_.priors[a];
    e.theta[a] = MaternParams{sample_hyper(xi[off + 0], hp.a),
                              sample_hyper(xi[off + 1], hp.k0),
                              sample_hyper(xi[off + 2], hp.gamma)};
    e.dtheta[a] = Eigen::Vector3d(sample_hyper_derivative(xi[off + 0], hp.a),
                                  sample_hyper_derivative(xi[off + 1], hp.k0),
                                  sample_hyper_derivative(xi[off + 2], hp.gamma));
    e.amps[a] = axis_amplitude_dc1(freqs_[a], e.theta[a]);
  }
  e.alpha = sample_hyper(xi[dim_ - 1], model_.zero_mode);
  e.dalpha = sample_hyper_derivative(xi[dim_ - 1], model_.zero_mode);

  e.A = Eigen::ArrayXd::Ones(n_modes_);
  std::vector<Eigen::Index> idx(n_axes, 0);
  for (Eigen::Index flat = 0; flat < n_modes_; ++flat) {
    for (std::size_t a = 0; a < n_axes; ++a) e.A[flat] *= e.amps[a].B[idx[a]];
    for (int a = static_cast<int>(n_axes) - 1; a >= 0; --a) {
      if (++idx[a] < model_.axes[a].padded_n) break;
      idx[a] = 0;
    }
  }
  e.A[0] = e.alpha;  // shared zero mode

  const Eigen::ArrayXd coeffs = e.A * xi.head(n_modes_).array();
  e.s = crop_padded(synthesize_padded(coeffs, model_.axes), model_.axes);
  e.lambda = pixvol_ * e.s.exp();
  return e;
}

double MkdeDensityModel::log_likelihood(const Eigen::VectorXd& xi) const {
  const Eval e = evaluate(xi);
  double ll = -log_factorial_sum_;
  for (Eigen::Index i = 0; i < e.lambda.size(); ++i) {
    ll -= e.lambda[i];
    if (counts_.counts[i] > 0) {
      ll += counts_.counts[i] * std::log(std::max(e.lambda[i], kLambdaFloor));
    }
  }
  return ll;
}

LatentModel::Linearization MkdeDensityModel::linearize(const Eigen::VectorXd& xi) const {
  auto e = std::make_shared<Eval>(evaluate(xi));
  const std::size_t n_axes = model_.axes.size();

  // jvp: dlambda = lambda * crop(synth(A dxi_modes + dA xi_modes))
  auto jvp = [this, e, n_axes](const Eigen::VectorXd& dxi) {
    Eigen::ArrayXd dA = Eigen::ArrayXd::Zero(n_modes_);
    std::vector<Eigen::ArrayXd> dB(n_axes);
    for (std::size_t a = 0; a < n_axes; ++a) {
      const Eigen::Index off = n_modes_ + 3 * static_cast<Eigen::Index>(a);
      const Eigen::Vector3d& dt = e->dtheta[a];
      dB[a] = e->amps[a].d_a * (dt[0] * dxi[off + 0]) +
              e->amps[a].d_k * (dt[1] * dxi[off + 1]) +
              e->amps[a].d_g * (dt[2] * dxi[off + 2]);
    }
    std::vector<Eigen::Index> idx(n_axes, 0);
    for (Eigen::Index flat = 0; flat < n_modes_; ++flat) {
      double acc = 0.0;
      for (std::size_t a = 0; a < n_axes; ++a) {
        acc += e->A[flat] / e->amps[a].B[idx[a]] * dB[a][idx[a]];
      }
      dA[flat] = acc;
      for (int a = static_cast<int>(n_axes) - 1; a >= 0; --a) {
        if (++idx[a] < model_.axes[a].padded_n) break;
        idx[a] = 0;
      }
    }
    dA[0] = e->dalpha * dxi[dim_ - 1];
    const Eigen::ArrayXd dc =
        e->A * dxi.head(n_modes_).array() + dA * e->xi.head(n_modes_).array();
    const Eigen::ArrayXd ds = crop_padded(synthesize_padded(dc, model_.axes), model_.axes);
    return Eigen::ArrayXd(e->lambda * ds);
  };

  // vjp: sbar = lambda * lbar; modes and hypers via the adjoint synthesis
  auto vjp = [this, e, n_axes](const Eigen::ArrayXd& lbar) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    const Eigen::ArrayXd sbar = e->lambda * lbar;
    const Eigen::ArrayXd cbar = synthesize_adjoint(sbar, model_.axes);
    out.head(n_modes_).array() += e->A * cbar;
    const Eigen::ArrayXd E = cbar * e->xi.head(n_modes_).array();

    std::vector<Eigen::Vector3d> acc(n_axes, Eigen::Vector3d::Zero());
    std::vector<Eigen::Index> idx(n_axes, 0);
    for (Eigen::Index flat = 0; flat < n_modes_; ++flat) {
      for (std::size_t a = 0; a < n_axes; ++a) {
        const double common = E[flat] * e->A[flat] / e->amps[a].B[idx[a]];
        acc[a][0] += common * e->amps[a].d_a[idx[a]];
        acc[a][1] += common * e->amps[a].d_k[idx[a]];
        acc[a][2] += common * e->amps[a].d_g[idx[a]];
      }
      for (int a = static_cast<int>(n_axes) - 1; a >= 0; --a) {
        if (++idx[a] < model_.axes[a].padded_n) break;
        idx[a] = 0;
      }
    }
    // the all-DC mode belongs to the zero-mode parameter alone
    for (std::size_t a = 0; a < n_axes; ++a) {
      const Eigen::Index off = n_modes_ + 3 * static_cast<Eigen::Index>(a);
      out[off + 0] += e->dtheta[a][0] * acc[a][0];
      out[off + 1] += e->dtheta[a][1] * acc[a][1];
      out[off + 2] += e->dtheta[a][2] * acc[a][2];
    }
    out[dim_ - 1] += e->dalpha * E[0];
    return out;
  };

  Linearization lin;
  lin.log_likelihood = -log_factorial_sum_;
  Eigen::ArrayXd resid(e->lambda.size());
  for (Eigen::Index i = 0; i < e->lambda.size(); ++i) {
    const double lam = std::max(e->lambda[i], kLambdaFloor);
    lin.log_likelihood -= e->lambda[i];
    if (counts_.counts[i] > 0) lin.log_likelihood += counts_.counts[i] * std::log(lam);
    resid[i] = counts_.counts[i] / lam - 1.0;
  }
  lin.gradient = vjp(resid);

  Eigen::ArrayXd inv_lambda = e->lambda.max(kLambdaFloor).inverse();
  lin.metric = [jvp, vjp, inv_lambda](const Eigen::VectorXd& v) {
    return vjp(jvp(v) * inv_lambda);
  };
  Eigen::ArrayXd inv_sqrt = inv_lambda.sqrt();
  lin.metric_sample = [vjp, inv_sqrt](Rng& rng) {
    Eigen::ArrayXd eta(inv_sqrt.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = rng.normal();
    return vjp(eta * inv_sqrt);
  };
  return lin;
}

Field MkdeDensityModel::density(const Eigen::VectorXd& xi) const {
  const Eval e = evaluate(xi);
  Field out = make_field(model_.axes);
  out.values = e.s.exp();
  return out;
}

PosteriorApprox mkde_fit(const CountGrid& counts, const MkdeModel& model,
                         const InferenceConfig& cfg) {
  MkdeDensityModel latent(model, counts);
  return run_mgvi(latent, cfg);
}

Field marginalize(const Field& density, const std::vector<int>& axes_to_sum) {
  if (axes_to_sum.empty()) {
    throw std::invalid_argument("marginalize: axes_to_sum must be nonempty");
  }
  const int n_axes = density.dim();
  std::vector<bool> drop(n_axes, false);
  double sum_vol = 1.0;
  for (int a : axes_to_sum) {
    if (a < 0 || a >= n_axes || drop[a]) {
      throw std::invalid_argument("marginalize: invalid axis list");
    }
    drop[a] = true;
    sum_vol *= density.axes[a].step;
  }
  std::vector<Grid1D> kept;
  for (int a = 0; a < n_axes; ++a) {
    if (!drop[a]) kept.push_back(density.axes[a]);
  }
  Field out = make_field(kept);

  std::vector<Eigen::Index> idx(n_axes, 0);
  for (Eigen::Index flat = 0; flat < density.values.size(); ++flat) {
    Eigen::Index kflat = 0;
    for (int a = 0; a < n_axes; ++a) {
      if (!drop[a]) kflat = kflat * density.axes[a].n_pixels + idx[a];
    }
    out.values[kflat] += density.values[flat] * sum_vol;
    for (int a = n_axes - 1; a >= 0; --a) {
      if (++idx[a] < density.axes[a].n_pixels) break;
      idx[a] = 0;
    }
  }
  return out;
}

MkdeMarginal mkde_marginal(const PosteriorApprox& posterior, const MkdeModel& model,
                           const CountGrid& counts, const std::vector<int>& axes_to_sum) {
  MkdeDensityModel latent(model, counts);
  Field proto = marginalize(latent.density(posterior.xi_bar), axes_to_sum);
  const auto [mean, sigma] = posterior_moments(posterior, [&](const Eigen::VectorXd& xi) {
    return Eigen::ArrayXd(marginalize(latent.density(xi), axes_to_sum).values);
  });
  MkdeMarginal out;
  out.mean = proto;
  out.mean.values = mean;
  out.sigma = proto;
  out.sigma.values = sigma;
  return out;
}

CountGrid load_counts_csv(const std::string& path, const std::vector<Grid1D>& axes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_counts_csv: cannot open " + path);
  CountGrid out;
  out.axes = axes;
  std::int64_t n_pix = 1;
  for (const auto& ax : axes) n_pix *= ax.n_pixels;
  out.counts = Eigen::ArrayXi::Zero(n_pix);

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<long> nums;
    while (std::getline(ss, tok, ',')) nums.push_back(std::stol(tok));
    if (nums.size() != axes.size() + 1) {
      throw std::runtime_error("load_counts_csv: bad column count at line " +
                               std::to_string(lineno));
    }
    Eigen::Index flat = 0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (nums[a] < 0 || nums[a] >= axes[a].n_pixels) {
        throw std::runtime_error("load_counts_csv: index out of range at line " +
                                 std::to_string(lineno));
      }
      flat = flat * axes[a].n_pixels + nums[a];
    }
    if (nums.back() < 0) {
      throw std::runtime_error("load_counts_csv: negative count at line " +
                               std::to_string(lineno));
    }
    out.counts[flat] += static_cast<int>(nums.back());
  }
  return out;
}

CountGrid poisson_counts_from_density(const Field& density, Rng rng) {
  CountGrid out;
  out.axes = density.axes;
  out.counts = Eigen::ArrayXi(density.values.size());
  const double pixvol = density.pixel_volume();
  for (Eigen::Index i = 0; i < density.values.size(); ++i) {
    out.counts[i] = static_cast<int>(poisson_draw(density.values[i] * pixvol, rng));
  }
  return out;
}

}  // namespace cadens
