#include "cadens/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cadens/cg.hpp"
#include "cadens/harmonic.hpp"

namespace cadens {

using nlohmann::json;

namespace {

ModelConfig build_model_config(Direction direction, const Dataset& data,
                               const RunConfig& cfg, const CountGrid& counts) {
  ModelConfig mc;
  mc.direction = direction;
  mc.grid = cfg.grid;
  mc.priors = cfg.priors;
  mc.suppressed_coupling =
      (direction == Direction::Independent) && cfg.suppressed_coupling;
  mc.rho0 = cfg.rho0 > 0.0 ? cfg.rho0
                           : std::max(1.0, static_cast<double>(counts.total())) / 100.0;
  (void)data;
  return mc;
}

}  // namespace

FitResult fit_direction(const Dataset& data, Direction direction,
                        const RunConfig& cfg, Rng rng) {
  FitResult out;
  out.requested_direction = direction;
  out.dataset_label = data.label.empty() ? cfg.dataset_label : data.label;

  const bool swap = (direction == Direction::YtoX);
  const Dataset oriented = swap ? swap_xy(data) : data;
  const Grid2D oriented_grid = swap ? Grid2D{cfg.grid.gy, cfg.grid.gx} : cfg.grid;
  CountGrid counts = bin_data(oriented, oriented_grid);

  ModelConfig mc = build_model_config(direction, data, cfg, counts);
  PoissonDensityModel model(mc, counts);

  InferenceConfig inf = cfg.inference;
  inf.seed = rng.fork(0x666974u).seed();
  inf.threads = cfg.threads;

  out.model_cfg = mc;
  out.counts = std::move(counts);
  out.posterior = run_mgvi(model, inf);
  out.elbo = estimate_elbo(out.posterior, model, cfg.evidence, rng.fork(0x656cu),
                           out.dataset_label, direction, cfg.threads);
  return out;
}

DeltaEvidence direction_delta(const Dataset& data, Direction direction,
                              const RunConfig& cfg, Rng rng) {
  if (direction == Direction::Independent) {
    throw std::invalid_argument("direction_delta: direction must be causal");
  }
  // The independent reference shares the causal model's orientation: for
  // YtoX both models live on the axis-swapped grid. The causal and the
  // reference fit get fixed fork tags so the YtoX result on D equals the
  // XtoY result on swapped D exactly under a shared rng.
  RunConfig oriented_cfg = cfg;
  Dataset oriented = data;
  Direction causal_as = direction;
  if (direction == Direction::YtoX) {
    oriented = swap_xy(data);
    oriented.label = data.label;
    oriented_cfg.grid = Grid2D{cfg.grid.gy, cfg.grid.gx};
    causal_as = Direction::XtoY;
  }
  FitResult causal = fit_direction(oriented, causal_as, oriented_cfg, rng.fork(1));
  FitResult indep =
      fit_direction(oriented, Direction::Independent, oriented_cfg, rng.fork(0));
  causal.elbo.direction = direction;
  DeltaEvidence d = delta_evidence(causal.elbo, indep.elbo);
  d.direction = direction;
  return d;
}

DirectionComparison compare_directions(const Dataset& data, const RunConfig& cfg,
                                       Rng rng) {
  DirectionComparison out;
  const Rng shared = rng.fork(0x636d70u);
  out.xtoy = direction_delta(data, Direction::XtoY, cfg, shared);
  out.ytox = direction_delta(data, Direction::YtoX, cfg, shared);
  return out;
}

NullTestResult randomization_null_test(const Dataset& data, const RunConfig& cfg,
                                       int n_permutations, Rng rng) {
  if (n_permutations < 1) {
    throw std::invalid_argument("randomization_null_test: need at least one permutation");
  }
  NullTestResult out;
  for (int p = 0; p < n_permutations; ++p) {
    Dataset shuffled = permute_y(data, rng.fork(0x706du, static_cast<std::uint64_t>(p)));
    shuffled.label = data.label + "/perm" + std::to_string(p);
    try {
      out.deltas.push_back(direction_delta(
          shuffled, Direction::XtoY, cfg,
          rng.fork(0x7066u, static_cast<std::uint64_t>(p))));
    } catch (const NumericalError&) {
      ++out.failures;
    }
  }
  if (out.deltas.empty()) {
    throw NumericalError("randomization_null_test: every permutation failed");
  }
  double mean = 0.0;
  for (const auto& d : out.deltas) mean += d.delta;
  mean /= static_cast<double>(out.deltas.size());
  out.mean = mean;
  if (out.deltas.size() > 1) {
    double var = 0.0;
    for (const auto& d : out.deltas) var += (d.delta - mean) * (d.delta - mean);
    var /= static_cast<double>(out.deltas.size() - 1);
    out.spread = std::sqrt(var);
  }
  return out;
}

SyntheticTruth make_synthetic_truth(const Grid2D& grid, double coupling_amplitude,
                                    double n_expected, Rng rng) {
  // Fixed smooth spectra: a handful of correlation lengths per domain.
  const double Lx = grid.gx.length();
  const double Ly = grid.gy.length();
  const MaternParams pf{0.4, 3.0 / Lx, -5.0};
  const MaternParams pg{0.6, 3.0 / Ly, -5.0};
  const MaternParams phx{coupling_amplitude, 2.0 / Lx, -5.0};
  const MaternParams phy{1.0, 2.0 / Ly, -5.0};
  const double alpha = coupling_amplitude > 0.0 ? 0.3 : 0.0;

  Rng stream = rng.fork(0x747275u);
  const Eigen::ArrayXd kx = synthesis_freqs(grid.gx);
  const Eigen::ArrayXd ky = synthesis_freqs(grid.gy);

  Eigen::ArrayXd cf(kx.size());
  for (Eigen::Index j = 0; j < kx.size(); ++j) {
    cf[j] = matern_amplitude(kx[j], pf) * stream.normal();
  }
  const Field f = harmonic_synthesize(cf, grid.gx);

  Eigen::ArrayXd cg(ky.size());
  for (Eigen::Index j = 0; j < ky.size(); ++j) {
    cg[j] = matern_amplitude(ky[j], pg) * stream.normal();
  }
  const Field g = harmonic_synthesize(cg, grid.gy);

  Field h = make_field(grid);
  if (coupling_amplitude > 0.0) {
    Eigen::ArrayXd ch(kx.size() * ky.size());
    Eigen::Index idx = 0;
    for (Eigen::Index jx = 0; jx < kx.size(); ++jx) {
      for (Eigen::Index jy = 0; jy < ky.size(); ++jy, ++idx) {
        ch[idx] = outer_amplitude(kx[jx], ky[jy], phx, phy, alpha) * stream.normal();
      }
    }
    h = harmonic_synthesize(ch, grid);
  }

  SyntheticTruth out;
  out.cond = conditional_pdf(g, h, grid);
  out.joint = joint_density(f, out.cond, 1.0);
  const double mass = integrate(out.joint);
  out.joint.values *= n_expected / mass;

  json params;
  params["f"] = {{"a", pf.a}, {"k0", pf.k0}, {"gamma", pf.gamma}};
  params["g"] = {{"a", pg.a}, {"k0", pg.k0}, {"gamma", pg.gamma}};
  params["h_x"] = {{"a", phx.a}, {"k0", phx.k0}, {"gamma", phx.gamma}};
  params["h_y"] = {{"a", phy.a}, {"k0", phy.k0}, {"gamma", phy.gamma}};
  params["zero_mode"] = alpha;
  params["coupling_amplitude"] = coupling_amplitude;
  params["n_expected"] = n_expected;
  out.params_json = params.dump(2);
  return out;
}

namespace {

json grid_to_json(const Grid1D& g) {
  return json{{"n_pixels", g.n_pixels},
              {"start", g.start},
              {"step", g.step},
              {"pad_factor", g.pad_factor}};
}

Grid1D grid_from_json(const json& j) {
  return make_grid(j.at("n_pixels").get<int>(), j.at("start").get<double>(),
                   j.at("step").get<double>(), j.at("pad_factor").get<double>());
}

json prior_to_json(const MaternHyperPrior& p) {
  return json{{"a", {p.a.mean, p.a.stddev}},
              {"k0", {p.k0.mean, p.k0.stddev}},
              {"gamma", {p.gamma.mean, p.gamma.stddev}}};
}

MaternHyperPrior prior_from_json(const json& j) {
  MaternHyperPrior p;
  p.a = LogNormalPrior{j.at("a")[0].get<double>(), j.at("a")[1].get<double>()};
  p.k0 = LogNormalPrior{j.at("k0")[0].get<double>(), j.at("k0")[1].get<double>()};
  p.gamma = NormalPrior{j.at("gamma")[0].get<double>(), j.at("gamma")[1].get<double>()};
  return p;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

void save_fit_state(const std::string& path, const FitResult& fit) {
  json j;
  j["direction"] = to_string(fit.requested_direction);
  j["dataset_label"] = fit.dataset_label;
  j["grid"] = {{"x", grid_to_json(fit.model_cfg.grid.gx)},
               {"y", grid_to_json(fit.model_cfg.grid.gy)}};
  j["priors"] = {{"f", prior_to_json(fit.model_cfg.priors.f)},
                 {"g", prior_to_json(fit.model_cfg.priors.g)},
                 {"h_x", prior_to_json(fit.model_cfg.priors.h_x)},
                 {"h_y", prior_to_json(fit.model_cfg.priors.h_y)},
                 {"zero_mode", {fit.model_cfg.priors.zero_mode.lo,
                                fit.model_cfg.priors.zero_mode.hi}}};
  j["rho0"] = fit.model_cfg.rho0;
  j["suppressed_coupling"] = fit.model_cfg.suppressed_coupling;
  j["elbo"] = {{"value", fit.elbo.value}, {"stderr", fit.elbo.stderr_}};
  j["xi_bar"] = to_vec(fit.posterior.xi_bar);
  json res = json::array();
  for (const auto& r : fit.posterior.residuals) res.push_back(to_vec(r));
  j["residuals"] = res;
  write_text_file(path, j.dump());
}

FitResult load_fit_state(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_fit_state: cannot open " + path);
  json j;
  in >> j;
  FitResult fit;
  fit.requested_direction = direction_from_string(j.at("direction").get<std::string>());
  fit.dataset_label = j.value("dataset_label", "");
  fit.model_cfg.direction = fit.requested_direction;
  fit.model_cfg.grid.gx = grid_from_json(j.at("grid").at("x"));
  fit.model_cfg.grid.gy = grid_from_json(j.at("grid").at("y"));
  fit.model_cfg.priors.f = prior_from_json(j.at("priors").at("f"));
  fit.model_cfg.priors.g = prior_from_json(j.at("priors").at("g"));
  fit.model_cfg.priors.h_x = prior_from_json(j.at("priors").at("h_x"));
  fit.model_cfg.priors.h_y = prior_from_json(j.at("priors").at("h_y"));
  fit.model_cfg.priors.zero_mode =
      UniformPrior{j.at("priors").at("zero_mode")[0].get<double>(),
                   j.at("priors").at("zero_mode")[1].get<double>()};
  fit.model_cfg.rho0 = j.at("rho0").get<double>();
  fit.model_cfg.suppressed_coupling = j.value("suppressed_coupling", false);
  fit.elbo.value = j.at("elbo").at("value").get<double>();
  fit.elbo.stderr_ = j.at("elbo").at("stderr").get<double>();
  fit.posterior.xi_bar = from_vec(j.at("xi_bar").get<std::vector<double>>());
  for (const auto& r : j.at("residuals")) {
    fit.posterior.residuals.push_back(from_vec(r.get<std::vector<double>>()));
  }
  return fit;
}

void ensure_directory(const std::string& path) {
  std::filesystem::create_directories(path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

void write_matrix_csv(const std::string& path, const Field& field2d,
                      const std::string& quantity) {
  if (field2d.dim() != 2) {
    throw std::invalid_argument("write_matrix_csv: expected a 2-D field");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Grid1D& gx = field2d.axes[0];
  const Grid1D& gy = field2d.axes[1];
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# x: start=%.17g step=%.17g n=%d\n", gx.start,
                gx.step, gx.n_pixels);
  out << buf;
  std::snprintf(buf, sizeof(buf), "# y: start=%.17g step=%.17g n=%d\n", gy.start,
                gy.step, gy.n_pixels);
  out << buf;
  out << "# quantity: " << quantity << "\n";
  out << "# layout: rows=x cols=y\n";
  for (int i = 0; i < gx.n_pixels; ++i) {
    for (int j = 0; j < gy.n_pixels; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    field2d.values[static_cast<Eigen::Index>(i) * gy.n_pixels + j]);
      out << buf << (j + 1 == gy.n_pixels ? "\n" : ",");
    }
  }
}

Field read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::string line;
  double xs = 0, xstep = 1, ys = 0, ystep = 1;
  int xn = 0, yn = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::sscanf(line.c_str(), "# x: start=%lg step=%lg n=%d", &xs, &xstep, &xn);
      std::sscanf(line.c_str(), "# y: start=%lg step=%lg n=%d", &ys, &ystep, &yn);
      continue;
    }
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
  }
  if (xn <= 0 || yn <= 0 || static_cast<int>(values.size()) != xn * yn) {
    throw std::runtime_error("read_matrix_csv: inconsistent matrix in " + path);
  }
  Field f = make_field(Grid2D{make_grid(xn, xs, xstep, 1.0), make_grid(yn, ys, ystep, 1.0)});
  for (std::size_t i = 0; i < values.size(); ++i) {
    f.values[static_cast<Eigen::Index>(i)] = values[i];
  }
  return f;
}

namespace {

std::string svg_header(int w, int h, const std::string& title) {
  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"12\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  return ss.str();
}

std::string color_ramp(double t) {
  // simple blue -> yellow ramp
  const int r = static_cast<int>(255.0 * t);
  const int g = static_cast<int>(220.0 * t + 20.0 * (1.0 - t));
  const int b = static_cast<int>(160.0 * (1.0 - t) + 40.0);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_heatmap_svg(const std::string& path, const Field& field2d,
                       const std::string& title) {
  if (field2d.dim() != 2) {
    throw std::invalid_argument("write_heatmap_svg: expected a 2-D field");
  }
  const int nx = field2d.axes[0].n_pixels;
  const int ny = field2d.axes[1].n_pixels;
  const int margin = 30;
  const int cell = std::max(2, 360 / std::max(nx, ny));
  const int w = margin * 2 + nx * cell;
  const int h = margin * 2 + ny * cell;
  const double lo = field2d.values.minCoeff();
  const double hi = field2d.values.maxCoeff();
  const double span = (hi > lo) ? hi - lo : 1.0;

  std::ostringstream ss;
  ss << svg_header(w, h, title);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double v = field2d.values[static_cast<Eigen::Index>(i) * ny + j];
      const double t = (v - lo) / span;
      ss << "<rect x=\"" << margin + i * cell << "\" y=\""
         << margin + (ny - 1 - j) * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"" << color_ramp(t) << "\"/>\n";
    }
  }
  ss << "</svg>\n";
  write_text_file(path, ss.str());
}

void write_band_svg(const std::string& path, const Eigen::ArrayXd& x,
                    const Eigen::ArrayXd& mean, const Eigen::ArrayXd& lo,
                    const Eigen::ArrayXd& hi, const std::string& title) {
  const int w = 480, h = 320, margin = 40;
  const double xmin = x.minCoeff(), xmax = x.maxCoeff();
  const double ymin = std::min(0.0, lo.minCoeff());
  const double ymax = std::max(hi.maxCoeff(), ymin + 1e-12);
  const auto X = [&](double v) {
    return margin + (v - xmin) / std::max(xmax - xmin, 1e-12) * (w - 2 * margin);
  };
  const auto Y = [&](double v) {
    return h - margin - (v - ymin) / (ymax - ymin) * (h - 2 * margin);
  };
  std::ostringstream ss;
  ss << svg_header(w, h, title);
  ss << "<polygon fill=\"#cfe0f5\" stroke=\"none\" points=\"";
  for (Eigen::Index i = 0; i < x.size(); ++i) ss << X(x[i]) << ',' << Y(hi[i]) << ' ';
  for (Eigen::Index i = x.size() - 1; i >= 0; --i) ss << X(x[i]) << ',' << Y(lo[i]) << ' ';
  ss << "\"/>\n<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (Eigen::Index i = 0; i < x.size(); ++i) ss << X(x[i]) << ',' << Y(mean[i]) << ' ';
  ss << "\"/>\n</svg>\n";
  write_text_file(path, ss.str());
}

}  // namespace cadens
