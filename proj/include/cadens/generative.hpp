#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cadens/grid.hpp"
#include "cadens/matern.hpp"

namespace cadens {

enum class Direction { XtoY, YtoX, Independent };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

// Hyper-parameter priors for the three log-density fields. The coupling
// field h uses separable per-axis spectra plus one shared zero mode.
struct FieldPriors {
  MaternHyperPrior f;      // cause-marginal log-density
  MaternHyperPrior g;      // effect-only structure
  MaternHyperPrior h_x;    // coupling field, cause axis
  MaternHyperPrior h_y;    // coupling field, effect axis
  UniformPrior zero_mode;  // shared DC amplitude of the coupling field
};

FieldPriors default_field_priors();

struct ModelConfig {
  Direction direction = Direction::XtoY;
  Grid2D grid;  // axes as observed: x first, y second
  FieldPriors priors = default_field_priors();
  double rho0 = 1.0;  // reference density, N/100 by convention
  // Independent variant that keeps a strongly suppressed coupling block
  // instead of removing it (fidelity checks only).
  bool suppressed_coupling = false;
};

// Block offsets of the flat latent vector. Field excitations first, hyper
// latents after; every entry carries a standard-normal prior.
struct LatentLayout {
  int nx = 0, ny = 0;          // working-grid pixels (cause axis first)
  int nx_pad = 0, ny_pad = 0;  // padded mode counts
  bool has_h = false;
  Eigen::Index xi_f = 0;
  Eigen::Index xi_g = 0;
  Eigen::Index xi_h = 0;
  Eigen::Index hyper_f = 0;  // 3 entries: a, k0, gamma
  Eigen::Index hyper_g = 0;  // 3 entries
  Eigen::Index hyper_h = 0;  // 6 entries: a_x, k0_x, gamma_x, a_y, k0_y, gamma_y
  Eigen::Index zero_mode = 0;
  Eigen::Index dim = 0;
};

struct DensityRealization {
  Field f;      // cause-axis log-marginal
  Field g;      // effect-axis log-structure
  Field h;      // coupling field (identically zero when independent)
  Field cond;   // p(effect | cause); rows = cause pixels, cols = effect pixels
  Field joint;  // rho = rho0 * exp(f) * cond
};

// Maps the standardized latent vector to fields, conditional, joint density
// and expected pixel counts, with exact forward and adjoint linearizations.
// For Direction::YtoX the construction is identical with the two axes
// swapped; the working grid exposes the swapped order.
class DensityModel {
 public:
  explicit DensityModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const Grid2D& working_grid() const { return wgrid_; }
  const LatentLayout& layout() const { return layout_; }
  Eigen::Index dim() const { return layout_.dim; }

  // Cached forward pass through the generative chain.
  struct Eval {
    Eigen::VectorXd xi;
    MaternParams th_f, th_g, th_hx, th_hy;
    Eigen::Vector3d dth_f, dth_g;        // d(value)/d(latent) per hyper
    Eigen::Matrix<double, 6, 1> dth_h;
    double alpha = 0.0, dalpha = 0.0;

    // per-mode amplitudes and their partials w.r.t. the hyper values
    Eigen::ArrayXd Af, dAf_a, dAf_k, dAf_g;  // nx_pad
    Eigen::ArrayXd Ag, dAg_a, dAg_k, dAg_g;  // ny_pad
    Eigen::ArrayXd Bx, dBx_a, dBx_k, dBx_g;  // nx_pad, DC pinned to 1
    Eigen::ArrayXd By, dBy_a, dBy_k, dBy_g;  // ny_pad
    Eigen::ArrayXd Ah;                       // nx_pad * ny_pad, includes zero mode

    Eigen::ArrayXd f, g, h;  // cropped fields
    Eigen::ArrayXd expf;     // nx
    Eigen::ArrayXd sigma;    // nx*ny: softmax over the cause axis per effect column
    Eigen::ArrayXd p;        // nx*ny conditional values
    Eigen::ArrayXd rho;      // nx*ny joint density
    Eigen::ArrayXd lambda;   // nx*ny expected counts
  };

  Eval evaluate(const Eigen::VectorXd& xi) const;

  DensityRealization realize(const Eigen::VectorXd& xi) const;

  // Exact linearization of xi -> lambda.
  Eigen::ArrayXd lambda_jvp(const Eval& at, const Eigen::VectorXd& dxi) const;
  Eigen::VectorXd lambda_vjp(const Eval& at, const Eigen::ArrayXd& dlambda) const;

 private:
  ModelConfig cfg_;
  Grid2D wgrid_;
  LatentLayout layout_;
  Eigen::ArrayXd kx_, ky_;  // synthesis frequencies of the padded axes
  double h_scale_ = 1.0;    // 1, or tiny for the suppressed-coupling variant
};

// Single-field realizations, shared with the n-D density estimator.
Field realize_field(const Eigen::VectorXd& xi_modes,
                    const Eigen::Vector3d& hyper_latents, const Grid1D& grid,
                    const MaternHyperPrior& prior);
Field realize_field(const Eigen::VectorXd& xi_modes,
                    const Eigen::Matrix<double, 6, 1>& hyper_latents,
                    double zero_latent, const Grid2D& grid,
                    const MaternHyperPrior& prior_x,
                    const MaternHyperPrior& prior_y, const UniformPrior& zero);

// Normalized conditional p(effect | cause) from field values on a 2-D grid;
// h may be identically zero. Columns are shifted by their maximum before
// exponentiation, which leaves the result unchanged.
Field conditional_pdf(const Field& g, const Field& h, const Grid2D& grid);

// joint = rho0 * exp(f) * cond, with cond column-normalized.
Field joint_density(const Field& f, const Field& cond, double rho0);

DensityRealization build_density(const ModelConfig& cfg, const Eigen::VectorXd& xi);

}  // namespace cadens
