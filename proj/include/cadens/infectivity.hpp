#pragma once

#include <string>
#include <vector>

#include "cadens/generative.hpp"
#include "cadens/inference.hpp"

namespace cadens {

// Probit-shaped response curve: I(y) = Phi((y - shift - mu) / sigma).
// shift translates the curve in whole decades for sensitivity runs.
struct ProbitCurve {
  double mu = 0.0;     // log10 load at 50% response
  double sigma = 1.0;  // probit width in log10 units
  double shift = 0.0;  // decades

  double operator()(double y) const;
};

// Default calibration: sigma = 1, mu anchored so that I(5.4) = 0.05.
ProbitCurve default_probit_curve(double shift = 0.0);

double infectivity_of_load(double y, const ProbitCurve& curve);

// Tabulated response curve (CSV `log10_load,infectivity`), linearly
// interpolated and clamped to its end values outside the table.
struct TabulatedCurve {
  std::vector<double> loads;   // strictly increasing
  std::vector<double> values;  // in (0, 1)
  double shift = 0.0;

  double operator()(double y) const;
};

TabulatedCurve load_curve_csv(const std::string& path);

struct InfectivityProfile {
  Eigen::ArrayXd ages;          // cause-axis pixel centers
  Eigen::ArrayXd mean;          // I(x), in [0, 1]
  Eigen::ArrayXd sigma1_lo, sigma1_hi;
  Eigen::ArrayXd sigma2_lo, sigma2_hi;
  double max_relative_difference = 0.0;  // max_x I / min_x I - 1 of the mean curve
};

// Project a response curve through the fitted conditional: per posterior
// sample, I_s(x) = sum_j I(y_j) p_s(y_j|x) dy; bands from the sample
// moments. Only defined for models whose conditional runs over the effect
// axis given the cause axis (XtoY or Independent).
template <typename Curve>
InfectivityProfile project_infectivity(const PosteriorApprox& posterior,
                                       const ModelConfig& model_cfg,
                                       const Curve& curve);

InfectivityProfile project_infectivity_fn(
    const PosteriorApprox& posterior, const ModelConfig& model_cfg,
    const std::function<double(double)>& curve);

template <typename Curve>
InfectivityProfile project_infectivity(const PosteriorApprox& posterior,
                                       const ModelConfig& model_cfg,
                                       const Curve& curve) {
  return project_infectivity_fn(posterior, model_cfg,
                                [&curve](double y) { return curve(y); });
}

}  // namespace cadens
