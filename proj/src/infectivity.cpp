#include "cadens/infectivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cadens/mathutil.hpp"

namespace cadens {

double ProbitCurve::operator()(double y) const {
  return norm_cdf((y - shift - mu) / sigma);
}

ProbitCurve default_probit_curve(double shift) {
  ProbitCurve c;
  c.sigma = 1.0;
  // Anchor: 5% isolation probability at log10 load 5.4.
  c.mu = 5.4 - norm_ppf(0.05);
  c.shift = shift;
  return c;
}

double infectivity_of_load(double y, const ProbitCurve& curve) { return curve(y); }

double TabulatedCurve::operator()(double y) const {
  const double yy = y - shift;
  if (loads.empty()) throw std::logic_error("TabulatedCurve: empty table");
  if (yy <= loads.front()) return values.front();
  if (yy >= loads.back()) return values.back();
  const auto it = std::upper_bound(loads.begin(), loads.end(), yy);
  const std::size_t i = static_cast<std::size_t>(it - loads.begin());
  const double t = (yy - loads[i - 1]) / (loads[i] - loads[i - 1]);
  return values[i - 1] + t * (values[i] - values[i - 1]);
}

TabulatedCurve load_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_curve_csv: cannot open " + path);
  TabulatedCurve curve;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      std::string h = line;
      h.erase(std::remove_if(h.begin(), h.end(), [](unsigned char c) { return std::isspace(c); }), h.end());
      if (h != "log10_load,infectivity") {
        throw std::runtime_error("load_curve_csv: expected header 'log10_load,infectivity'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw std::runtime_error("load_curve_csv: malformed row at line " + std::to_string(lineno));
    }
    const double y = std::stod(a);
    const double v = std::stod(b);
    if (!curve.loads.empty() && y <= curve.loads.back()) {
      throw std::runtime_error("load_curve_csv: loads must be strictly increasing");
    }
    if (!(v > 0.0 && v < 1.0)) {
      throw std::runtime_error("load_curve_csv: infectivity values must lie in (0, 1)");
    }
    curve.loads.push_back(y);
    curve.values.push_back(v);
  }
  if (curve.loads.size() < 2) {
    throw std::runtime_error("load_curve_csv: need at least two rows");
  }
  return curve;
}

InfectivityProfile project_infectivity_fn(
    const PosteriorApprox& posterior, const ModelConfig& model_cfg,
    const std::function<double(double)>& curve) {
  if (model_cfg.direction == Direction::YtoX) {
    throw std::invalid_argument(
        "project_infectivity: projection is defined over p(y|x); fit an XtoY or "
        "Independent model");
  }
  const DensityModel model(model_cfg);
  const Grid2D& grid = model.working_grid();
  const int nx = grid.gx.n_pixels;
  const int ny = grid.gy.n_pixels;
  const double dy = grid.gy.step;

  Eigen::ArrayXd response(ny);
  for (int j = 0; j < ny; ++j) response[j] = curve(grid.gy.center(j));

  const auto project = [&](const Eigen::VectorXd& xi) {
    const auto eval = model.evaluate(xi);
    Eigen::ArrayXd profile(nx);
    for (int i = 0; i < nx; ++i) {
      const auto row = eval.p.segment(static_cast<Eigen::Index>(i) * ny, ny);
      profile[i] = (row * response).sum() * dy;
    }
    return profile;
  };

  const auto [mean, sigma] = posterior_moments(posterior, project);

  InfectivityProfile out;
  out.ages = Eigen::ArrayXd(nx);
  for (int i = 0; i < nx; ++i) out.ages[i] = grid.gx.center(i);
  out.mean = mean;
  out.sigma1_lo = mean - sigma;
  out.sigma1_hi = mean + sigma;
  out.sigma2_lo = mean - 2.0 * sigma;
  out.sigma2_hi = mean + 2.0 * sigma;
  out.max_relative_difference = mean.maxCoeff() / mean.minCoeff() - 1.0;
  return out;
}

}  // namespace cadens
