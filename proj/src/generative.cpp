#include "cadens/generative.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cadens/harmonic.hpp"

namespace cadens {

using RowArr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowArr>;
using CMapRow = Eigen::Map<const RowArr>;

const char* to_string(Direction d) {
  switch (d) {
    case Direction::XtoY: return "xtoy";
    case Direction::YtoX: return "ytox";
    case Direction::Independent: return "independent";
  }
  return "unknown";
}

Direction direction_from_string(const std::string& s) {
  if (s == "xtoy" || s == "x->y") return Direction::XtoY;
  if (s == "ytox" || s == "y->x") return Direction::YtoX;
  if (s == "independent" || s == "indep") return Direction::Independent;
  throw std::invalid_argument("unknown direction: " + s);
}

FieldPriors default_field_priors() {
  FieldPriors p;
  p.f = MaternHyperPrior{{0.3, 0.1}, {5.0, 3.0}, {-3.0, 2.12}};
  p.g = p.f;
  p.h_x = p.f;
  p.h_y = p.f;
  p.zero_mode = UniformPrior{1e-15, 5.0};
  return p;
}

namespace {

constexpr double kSuppressedCouplingScale = 1e-6;

struct AxisAmp {
  Eigen::ArrayXd A, d_a, d_k, d_g;
};

AxisAmp axis_amplitude(const Eigen::ArrayXd& freqs, const MaternParams& p,
                       bool dc_to_one) {
  const Eigen::Index n = freqs.size();
  AxisAmp out{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n),
              Eigen::ArrayXd(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    if (dc_to_one && freqs[j] == 0.0) {
      out.A[j] = 1.0;
      out.d_a[j] = out.d_k[j] = out.d_g[j] = 0.0;
      continue;
    }
    out.A[j] = matern_amplitude(freqs[j], p);
    const AmplitudeGrad grad = matern_amplitude_grad(freqs[j], p);
    out.d_a[j] = grad.d_a;
    out.d_k[j] = grad.d_k0;
    out.d_g[j] = grad.d_gamma;
  }
  return out;
}

LatentLayout build_layout(const Grid2D& wgrid, bool has_h) {
  LatentLayout l;
  l.nx = wgrid.gx.n_pixels;
  l.ny = wgrid.gy.n_pixels;
  l.nx_pad = wgrid.gx.padded_n;
  l.ny_pad = wgrid.gy.padded_n;
  l.has_h = has_h;
  l.xi_f = 0;
  l.xi_g = l.xi_f + l.nx_pad;
  l.xi_h = l.xi_g + l.ny_pad;
  Eigen::Index next = l.xi_h;
  if (has_h) next += static_cast<Eigen::Index>(l.nx_pad) * l.ny_pad;
  l.hyper_f = next;
  l.hyper_g = l.hyper_f + 3;
  next = l.hyper_g + 3;
  if (has_h) {
    l.hyper_h = next;
    l.zero_mode = l.hyper_h + 6;
    next = l.zero_mode + 1;
  }
  l.dim = next;
  return l;
}

// Column-stable conditional: sigma is the softmax of h over the cause axis
// (one column per effect pixel), p the row-normalized conditional.
void conditional_core(const Eigen::ArrayXd& gvals, const Eigen::ArrayXd& hvals,
                      int nx, int ny, double dx, double dy,
                      Eigen::ArrayXd& sigma, Eigen::ArrayXd& p) {
  sigma.resize(static_cast<Eigen::Index>(nx) * ny);
  p.resize(static_cast<Eigen::Index>(nx) * ny);
  CMapRow H(hvals.data(), nx, ny);
  MapRow S(sigma.data(), nx, ny);
  MapRow P(p.data(), nx, ny);

  Eigen::ArrayXd log_denom(ny);
  for (int j = 0; j < ny; ++j) {
    const double m = H.col(j).maxCoeff();
    const Eigen::ArrayXd e = (H.col(j) - m).exp();
    const double se = e.sum();
    S.col(j) = e / se;
    log_denom[j] = m + std::log(se) + std::log(dx);
  }
  for (int i = 0; i < nx; ++i) {
    const Eigen::ArrayXd w = gvals + H.row(i).transpose() - log_denom;
    const double m = w.maxCoeff();
    const Eigen::ArrayXd e = (w - m).exp();
    const double z = e.sum() * dy;
    P.row(i) = (e / z).transpose();
  }
}

}  // namespace

DensityModel::DensityModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.rho0 > 0.0)) throw std::invalid_argument("DensityModel: rho0 must be positive");
  wgrid_ = (cfg_.direction == Direction::YtoX)
               ? Grid2D{cfg_.grid.gy, cfg_.grid.gx}
               : cfg_.grid;
  const bool has_h =
      (cfg_.direction != Direction::Independent) || cfg_.suppressed_coupling;
  layout_ = build_layout(wgrid_, has_h);
  kx_ = synthesis_freqs(wgrid_.gx);
  ky_ = synthesis_freqs(wgrid_.gy);
  h_scale_ = (cfg_.direction == Direction::Independent && cfg_.suppressed_coupling)
                 ? kSuppressedCouplingScale
                 : 1.0;
}

DensityModel::Eval DensityModel::evaluate(const Eigen::VectorXd& xi) const {
  const LatentLayout& L = layout_;
  if (xi.size() != L.dim) {
    throw std::invalid_argument("DensityModel::evaluate: latent dimension mismatch");
  }
  Eval e;
  e.xi = xi;

  const FieldPriors& pr = cfg_.priors;
  auto hyper3 = [&](Eigen::Index off, const MaternHyperPrior& hp, MaternParams& th,
                    Eigen::Vector3d& dth) {
    th.a = sample_hyper(xi[off + 0], hp.a);
    th.k0 = sample_hyper(xi[off + 1], hp.k0);
    th.gamma = sample_hyper(xi[off + 2], hp.gamma);
    dth[0] = sample_hyper_derivative(xi[off + 0], hp.a);
    dth[1] = sample_hyper_derivative(xi[off + 1], hp.k0);
    dth[2] = sample_hyper_derivative(xi[off + 2], hp.gamma);
  };
  hyper3(L.hyper_f, pr.f, e.th_f, e.dth_f);
  hyper3(L.hyper_g, pr.g, e.th_g, e.dth_g);

  const auto af = axis_amplitude(kx_, e.th_f, false);
  e.Af = af.A; e.dAf_a = af.d_a; e.dAf_k = af.d_k; e.dAf_g = af.d_g;
  const auto ag = axis_amplitude(ky_, e.th_g, false);
  e.Ag = ag.A; e.dAg_a = ag.d_a; e.dAg_k = ag.d_k; e.dAg_g = ag.d_g;

  const std::vector<Grid1D> ax_x{wgrid_.gx};
  const std::vector<Grid1D> ax_y{wgrid_.gy};
  const std::vector<Grid1D> ax_xy = wgrid_.axes();

  const Eigen::ArrayXd cf = e.Af * xi.segment(L.xi_f, L.nx_pad).array();
  e.f = crop_padded(synthesize_padded(cf, ax_x), ax_x);
  e.expf = e.f.exp();

  const Eigen::ArrayXd cg = e.Ag * xi.segment(L.xi_g, L.ny_pad).array();
  e.g = crop_padded(synthesize_padded(cg, ax_y), ax_y);

  if (L.has_h) {
    Eigen::Vector3d dx3, dy3;
    hyper3(L.hyper_h + 0, pr.h_x, e.th_hx, dx3);
    hyper3(L.hyper_h + 3, pr.h_y, e.th_hy, dy3);
    e.dth_h << dx3, dy3;
    e.alpha = sample_hyper(xi[L.zero_mode], pr.zero_mode);
    e.dalpha = sample_hyper_derivative(xi[L.zero_mode], pr.zero_mode);

    const auto bx = axis_amplitude(kx_, e.th_hx, true);
    e.Bx = bx.A; e.dBx_a = bx.d_a; e.dBx_k = bx.d_k; e.dBx_g = bx.d_g;
    const auto by = axis_amplitude(ky_, e.th_hy, true);
    e.By = by.A; e.dBy_a = by.d_a; e.dBy_k = by.d_k; e.dBy_g = by.d_g;

    e.Ah.resize(static_cast<Eigen::Index>(L.nx_pad) * L.ny_pad);
    MapRow AH(e.Ah.data(), L.nx_pad, L.ny_pad);
    AH = (e.Bx.matrix() * e.By.matrix().transpose()).array();
    e.Ah *= h_scale_;
    e.Ah[0] = h_scale_ * e.alpha;

    const Eigen::Index nh = static_cast<Eigen::Index>(L.nx_pad) * L.ny_pad;
    const Eigen::ArrayXd ch = e.Ah * xi.segment(L.xi_h, nh).array();
    e.h = crop_padded(synthesize_padded(ch, ax_xy), ax_xy);
  } else {
    e.h = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(L.nx) * L.ny);
  }

  conditional_core(e.g, e.h, L.nx, L.ny, wgrid_.gx.step, wgrid_.gy.step, e.sigma, e.p);

  e.rho.resize(e.p.size());
  MapRow Rho(e.rho.data(), L.nx, L.ny);
  CMapRow P(e.p.data(), L.nx, L.ny);
  Rho = P.colwise() * (cfg_.rho0 * e.expf);
  e.lambda = e.rho * (wgrid_.gx.step * wgrid_.gy.step);
  return e;
}

Eigen::ArrayXd DensityModel::lambda_jvp(const Eval& at, const Eigen::VectorXd& dxi) const {
  const LatentLayout& L = layout_;
  if (dxi.size() != L.dim) {
    throw std::invalid_argument("lambda_jvp: latent dimension mismatch");
  }
  const std::vector<Grid1D> ax_x{wgrid_.gx};
  const std::vector<Grid1D> ax_y{wgrid_.gy};
  const std::vector<Grid1D> ax_xy = wgrid_.axes();
  const double dxstep = wgrid_.gx.step;
  const double dystep = wgrid_.gy.step;

  // f block
  const double da_f = at.dth_f[0] * dxi[L.hyper_f + 0];
  const double dk_f = at.dth_f[1] * dxi[L.hyper_f + 1];
  const double dg_f = at.dth_f[2] * dxi[L.hyper_f + 2];
  const Eigen::ArrayXd dAf = at.dAf_a * da_f + at.dAf_k * dk_f + at.dAf_g * dg_f;
  const Eigen::ArrayXd dcf = at.Af * dxi.segment(L.xi_f, L.nx_pad).array() +
                             dAf * at.xi.segment(L.xi_f, L.nx_pad).array();
  const Eigen::ArrayXd df = crop_padded(synthesize_padded(dcf, ax_x), ax_x);

  // g block
  const double da_g = at.dth_g[0] * dxi[L.hyper_g + 0];
  const double dk_g = at.dth_g[1] * dxi[L.hyper_g + 1];
  const double dg_g = at.dth_g[2] * dxi[L.hyper_g + 2];
  const Eigen::ArrayXd dAg = at.dAg_a * da_g + at.dAg_k * dk_g + at.dAg_g * dg_g;
  const Eigen::ArrayXd dcg = at.Ag * dxi.segment(L.xi_g, L.ny_pad).array() +
                             dAg * at.xi.segment(L.xi_g, L.ny_pad).array();
  const Eigen::ArrayXd dg = crop_padded(synthesize_padded(dcg, ax_y), ax_y);

  // h block
  Eigen::ArrayXd dh;
  if (L.has_h) {
    const double da_hx = at.dth_h[0] * dxi[L.hyper_h + 0];
    const double dk_hx = at.dth_h[1] * dxi[L.hyper_h + 1];
    const double dg_hx = at.dth_h[2] * dxi[L.hyper_h + 2];
    const double da_hy = at.dth_h[3] * dxi[L.hyper_h + 3];
    const double dk_hy = at.dth_h[4] * dxi[L.hyper_h + 4];
    const double dg_hy = at.dth_h[5] * dxi[L.hyper_h + 5];
    const Eigen::ArrayXd dBx = at.dBx_a * da_hx + at.dBx_k * dk_hx + at.dBx_g * dg_hx;
    const Eigen::ArrayXd dBy = at.dBy_a * da_hy + at.dBy_k * dk_hy + at.dBy_g * dg_hy;

    const Eigen::Index nh = static_cast<Eigen::Index>(L.nx_pad) * L.ny_pad;
    Eigen::ArrayXd dAh(nh);
    MapRow DAH(dAh.data(), L.nx_pad, L.ny_pad);
    DAH = (dBx.matrix() * at.By.matrix().transpose() +
           at.Bx.matrix() * dBy.matrix().transpose())
              .array();
    dAh *= h_scale_;
    dAh[0] = h_scale_ * at.dalpha * dxi[L.zero_mode];

    const Eigen::ArrayXd dch = at.Ah * dxi.segment(L.xi_h, nh).array() +
                               dAh * at.xi.segment(L.xi_h, nh).array();
    dh = crop_padded(synthesize_padded(dch, ax_xy), ax_xy);
  } else {
    dh = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(L.nx) * L.ny);
  }

  // conditional and joint
  CMapRow Sigma(at.sigma.data(), L.nx, L.ny);
  CMapRow P(at.p.data(), L.nx, L.ny);
  CMapRow Rho(at.rho.data(), L.nx, L.ny);
  CMapRow Dh(dh.data(), L.nx, L.ny);

  const Eigen::ArrayXd dlogD = (Sigma * Dh).colwise().sum().transpose();
  RowArr DW = Dh;
  DW.rowwise() += (dg - dlogD).transpose();

  const Eigen::ArrayXd t = dystep * (P * DW).rowwise().sum();
  const RowArr DP = P * (DW.colwise() - t);
  const RowArr DRho = Rho.colwise() * df + DP.colwise() * (cfg_.rho0 * at.expf);

  Eigen::ArrayXd dlam(at.lambda.size());
  MapRow(dlam.data(), L.nx, L.ny) = DRho * (dxstep * dystep);
  return dlam;
}

Eigen::VectorXd DensityModel::lambda_vjp(const Eval& at, const Eigen::ArrayXd& dlambda) const {
  const LatentLayout& L = layout_;
  if (dlambda.size() != at.lambda.size()) {
    throw std::invalid_argument("lambda_vjp: pixel dimension mismatch");
  }
  const std::vector<Grid1D> ax_x{wgrid_.gx};
  const std::vector<Grid1D> ax_y{wgrid_.gy};
  const std::vector<Grid1D> ax_xy = wgrid_.axes();
  const double dxstep = wgrid_.gx.step;
  const double dystep = wgrid_.gy.step;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(L.dim);

  CMapRow Sigma(at.sigma.data(), L.nx, L.ny);
  CMapRow P(at.p.data(), L.nx, L.ny);
  CMapRow Rho(at.rho.data(), L.nx, L.ny);
  CMapRow LBar(dlambda.data(), L.nx, L.ny);

  const RowArr RhoBar = LBar * (dxstep * dystep);
  const Eigen::ArrayXd fbar = (RhoBar * Rho).rowwise().sum();
  const RowArr PBar = RhoBar.colwise() * (cfg_.rho0 * at.expf);

  const RowArr Q = P * PBar;
  const Eigen::ArrayXd s = Q.rowwise().sum();
  const RowArr WBar = Q - dystep * (P.colwise() * s);

  const Eigen::ArrayXd gbar = WBar.colwise().sum().transpose();

  // f block
  const Eigen::ArrayXd cfbar = synthesize_adjoint(fbar, ax_x);
  out.segment(L.xi_f, L.nx_pad).array() += at.Af * cfbar;
  const Eigen::ArrayXd ef = cfbar * at.xi.segment(L.xi_f, L.nx_pad).array();
  out[L.hyper_f + 0] += at.dth_f[0] * (at.dAf_a * ef).sum();
  out[L.hyper_f + 1] += at.dth_f[1] * (at.dAf_k * ef).sum();
  out[L.hyper_f + 2] += at.dth_f[2] * (at.dAf_g * ef).sum();

  // g block
  const Eigen::ArrayXd cgbar = synthesize_adjoint(gbar, ax_y);
  out.segment(L.xi_g, L.ny_pad).array() += at.Ag * cgbar;
  const Eigen::ArrayXd eg = cgbar * at.xi.segment(L.xi_g, L.ny_pad).array();
  out[L.hyper_g + 0] += at.dth_g[0] * (at.dAg_a * eg).sum();
  out[L.hyper_g + 1] += at.dth_g[1] * (at.dAg_k * eg).sum();
  out[L.hyper_g + 2] += at.dth_g[2] * (at.dAg_g * eg).sum();

  // h block
  if (L.has_h) {
    Eigen::ArrayXd hbar(at.h.size());
    MapRow HBar(hbar.data(), L.nx, L.ny);
    HBar = WBar + Sigma.rowwise() * (-gbar).transpose();

    const Eigen::Index nh = static_cast<Eigen::Index>(L.nx_pad) * L.ny_pad;
    const Eigen::ArrayXd chbar = synthesize_adjoint(hbar, ax_xy);
    out.segment(L.xi_h, nh).array() += at.Ah * chbar;

    const Eigen::ArrayXd E = chbar * at.xi.segment(L.xi_h, nh).array();
    CMapRow Em(E.data(), L.nx_pad, L.ny_pad);
    const Eigen::VectorXd v = Em.matrix() * at.By.matrix();
    const Eigen::VectorXd u = Em.matrix().transpose() * at.Bx.matrix();
    out[L.hyper_h + 0] += at.dth_h[0] * h_scale_ * at.dBx_a.matrix().dot(v);
    out[L.hyper_h + 1] += at.dth_h[1] * h_scale_ * at.dBx_k.matrix().dot(v);
    out[L.hyper_h + 2] += at.dth_h[2] * h_scale_ * at.dBx_g.matrix().dot(v);
    out[L.hyper_h + 3] += at.dth_h[3] * h_scale_ * at.dBy_a.matrix().dot(u);
    out[L.hyper_h + 4] += at.dth_h[4] * h_scale_ * at.dBy_k.matrix().dot(u);
    out[L.hyper_h + 5] += at.dth_h[5] * h_scale_ * at.dBy_g.matrix().dot(u);
    out[L.zero_mode] += at.dalpha * h_scale_ * E[0];
  }
  return out;
}

DensityRealization DensityModel::realize(const Eigen::VectorXd& xi) const {
  const Eval e = evaluate(xi);
  DensityRealization r;
  r.f = make_field(wgrid_.gx);
  r.f.values = e.f;
  r.g = make_field(wgrid_.gy);
  r.g.values = e.g;
  r.h = make_field(wgrid_);
  r.h.values = e.h;
  r.cond = make_field(wgrid_);
  r.cond.values = e.p;
  r.joint = make_field(wgrid_);
  r.joint.values = e.rho;
  return r;
}

Field realize_field(const Eigen::VectorXd& xi_modes,
                    const Eigen::Vector3d& hyper_latents, const Grid1D& grid,
                    const MaternHyperPrior& prior) {
  if (xi_modes.size() != grid.padded_n) {
    throw std::invalid_argument("realize_field: latent dimension mismatch");
  }
  MaternParams th;
  th.a = sample_hyper(hyper_latents[0], prior.a);
  th.k0 = sample_hyper(hyper_latents[1], prior.k0);
  th.gamma = sample_hyper(hyper_latents[2], prior.gamma);
  const Eigen::ArrayXd k = synthesis_freqs(grid);
  Eigen::ArrayXd coeffs(k.size());
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    coeffs[j] = matern_amplitude(k[j], th) * xi_modes[j];
  }
  return harmonic_synthesize(coeffs, grid);
}

Field realize_field(const Eigen::VectorXd& xi_modes,
                    const Eigen::Matrix<double, 6, 1>& hyper_latents,
                    double zero_latent, const Grid2D& grid,
                    const MaternHyperPrior& prior_x,
                    const MaternHyperPrior& prior_y, const UniformPrior& zero) {
  const Eigen::Index nh =
      static_cast<Eigen::Index>(grid.gx.padded_n) * grid.gy.padded_n;
  if (xi_modes.size() != nh) {
    throw std::invalid_argument("realize_field: latent dimension mismatch");
  }
  MaternParams thx{sample_hyper(hyper_latents[0], prior_x.a),
                   sample_hyper(hyper_latents[1], prior_x.k0),
                   sample_hyper(hyper_latents[2], prior_x.gamma)};
  MaternParams thy{sample_hyper(hyper_latents[3], prior_y.a),
                   sample_hyper(hyper_latents[4], prior_y.k0),
                   sample_hyper(hyper_latents[5], prior_y.gamma)};
  const double alpha = sample_hyper(zero_latent, zero);
  const Eigen::ArrayXd kx = synthesis_freqs(grid.gx);
  const Eigen::ArrayXd ky = synthesis_freqs(grid.gy);
  Eigen::ArrayXd coeffs(nh);
  Eigen::Index idx = 0;
  for (Eigen::Index jx = 0; jx < kx.size(); ++jx) {
    for (Eigen::Index jy = 0; jy < ky.size(); ++jy, ++idx) {
      coeffs[idx] = outer_amplitude(kx[jx], ky[jy], thx, thy, alpha) * xi_modes[idx];
    }
  }
  return harmonic_synthesize(coeffs, grid);
}

Field conditional_pdf(const Field& g, const Field& h, const Grid2D& grid) {
  const int nx = grid.gx.n_pixels;
  const int ny = grid.gy.n_pixels;
  if (g.values.size() != ny) {
    throw std::invalid_argument("conditional_pdf: g must live on the effect axis");
  }
  if (h.values.size() != static_cast<Eigen::Index>(nx) * ny) {
    throw std::invalid_argument("conditional_pdf: h must live on the 2-D grid");
  }
  Eigen::ArrayXd sigma, p;
  conditional_core(g.values, h.values, nx, ny, grid.gx.step, grid.gy.step, sigma, p);
  Field out = make_field(grid);
  out.values = p;
  return out;
}

Field joint_density(const Field& f, const Field& cond, double rho0) {
  if (cond.dim() != 2) throw std::invalid_argument("joint_density: cond must be 2-D");
  const int nx = cond.axes[0].n_pixels;
  const int ny = cond.axes[1].n_pixels;
  if (f.values.size() != nx) {
    throw std::invalid_argument("joint_density: f must live on the cause axis");
  }
  Field out = make_field(cond.axes);
  MapRow Rho(out.values.data(), nx, ny);
  CMapRow P(cond.values.data(), nx, ny);
  Rho = P.colwise() * (rho0 * f.values.exp());
  return out;
}

DensityRealization build_density(const ModelConfig& cfg, const Eigen::VectorXd& xi) {
  return DensityModel(cfg).realize(xi);
}

}  // namespace cadens
