#include "cadens/inference.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "cadens/cg.hpp"
#include "cadens/parallel.hpp"

namespace cadens {

namespace {

void log_line(const InferenceConfig& cfg, const std::string& line) {
  if (cfg.log) cfg.log(line);
}

std::string format(const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

double objective_at(const LatentModel& model, const Eigen::VectorXd& xi_bar,
                    const std::vector<Eigen::VectorXd>& residuals, int threads) {
  const int n = static_cast<int>(residuals.size());
  std::vector<double> vals(n);
  parallel_for(n, threads, [&](int s) {
    const Eigen::VectorXd xi = xi_bar + residuals[s];
    vals[s] = -model.log_likelihood(xi) + 0.5 * xi.squaredNorm();
  });
  double sum = 0.0;
  for (double v : vals) sum += v;
  return sum / n;
}

}  // namespace

double sampled_kl(const LatentModel& model, const Eigen::VectorXd& xi_bar,
                  const std::vector<Eigen::VectorXd>& residuals, int threads) {
  return objective_at(model, xi_bar, residuals, threads);
}

std::vector<Eigen::VectorXd> draw_metric_samples(const LatentModel& model,
                                                 const Eigen::VectorXd& xi_bar,
                                                 int n, Rng rng,
                                                 const InferenceConfig& cfg) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("draw_metric_samples: n must be even and >= 2");
  }
  const Eigen::Index dim = model.dim();
  const auto lin = model.linearize(xi_bar);
  const auto apply_metric = [&lin](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(lin.metric(v) + v);
  };

  std::vector<Eigen::VectorXd> out(n);
  std::vector<CgResult> cg_results(n / 2);
  parallel_for(n / 2, cfg.threads, [&](int pair) {
    Rng stream = rng.fork(0x7361u, static_cast<std::uint64_t>(pair));
    // Cov[w] = 1 + likelihood metric = M.
    Eigen::VectorXd w = stream.normal_vector(dim) + lin.metric_sample(stream);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(dim);
    cg_results[pair] = conjugate_gradient(apply_metric, w, r, cfg.cg_tolerance,
                                          cfg.cg_max_iter);
    out[2 * pair] = r;
    out[2 * pair + 1] = -r;
  });
  for (int pair = 0; pair < n / 2; ++pair) {
    const CgResult& res = cg_results[pair];
    log_line(cfg, format("event=metric_sample pair=%d cg_iters=%d rel_residual=%.3e",
                         pair, res.iterations, res.rel_residual));
    if (!res.converged) {
      throw NumericalError(format(
          "draw_metric_samples: CG did not converge (pair %d, %d iterations, "
          "relative residual %.3e)",
          pair, res.iterations, res.rel_residual));
    }
  }
  return out;
}

Eigen::VectorXd minimize_kl(const LatentModel& model, Eigen::VectorXd xi_bar,
                            const std::vector<Eigen::VectorXd>& residuals,
                            int steps, const InferenceConfig& cfg) {
  const int n = static_cast<int>(residuals.size());
  if (n == 0) throw std::invalid_argument("minimize_kl: no residual samples");
  const Eigen::Index dim = model.dim();

  double current = objective_at(model, xi_bar, residuals, cfg.threads);
  for (int step = 0; step < steps; ++step) {
    std::vector<LatentModel::Linearization> lins(n);
    parallel_for(n, cfg.threads, [&](int s) {
      lins[s] = model.linearize(xi_bar + residuals[s]);
    });

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    for (int s = 0; s < n; ++s) {
      grad += -lins[s].gradient + (xi_bar + residuals[s]);
    }
    grad /= n;
    const double gnorm = grad.norm();
    if (gnorm < 1e-12 * std::max(1.0, xi_bar.norm())) break;

    const auto apply_metric = [&](const Eigen::VectorXd& v) {
      std::vector<Eigen::VectorXd> mv(n);
      parallel_for(n, cfg.threads, [&](int s) { mv[s] = lins[s].metric(v); });
      Eigen::VectorXd acc = v;  // prior identity
      for (int s = 0; s < n; ++s) acc += mv[s] / n;
      return acc;
    };

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(dim);
    const CgResult cgres = conjugate_gradient(apply_metric, grad, direction,
                                              cfg.cg_tolerance, cfg.cg_max_iter);
    if (direction.dot(grad) <= 0.0) direction = grad;  // fallback to gradient

    // Backtracking line search with an Armijo condition.
    const double slope = grad.dot(direction);
    double alpha = 1.0;
    bool accepted = false;
    double trial_obj = current;
    while (alpha > 1e-4) {
      const Eigen::VectorXd trial = xi_bar - alpha * direction;
      trial_obj = objective_at(model, trial, residuals, cfg.threads);
      if (trial_obj <= current - 1e-4 * alpha * slope) {
        xi_bar = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    log_line(cfg, format("event=kl_step step=%d kl=%.8g grad_norm=%.3e cg_iters=%d "
                         "alpha=%g accepted=%d",
                         step, trial_obj, gnorm, cgres.iterations, alpha,
                         accepted ? 1 : 0));
    if (!accepted) {
      log_line(cfg, format("event=kl_warning step=%d msg=line_search_failed", step));
      break;  // return best-so-far
    }
    const double decrease = current - trial_obj;
    current = trial_obj;
    if (decrease >= 0.0 && decrease < 1e-9 * std::max(1.0, std::abs(current))) break;
  }
  return xi_bar;
}

PosteriorApprox run_mgvi(const LatentModel& model, const InferenceConfig& cfg) {
  if (cfg.n_samples < 2 || cfg.n_samples % 2 != 0) {
    throw std::invalid_argument("run_mgvi: n_samples must be even and >= 2");
  }
  Rng master(cfg.seed);
  PosteriorApprox post;
  post.xi_bar = Eigen::VectorXd::Zero(model.dim());

  for (int it = 0; it < cfg.n_global_iterations; ++it) {
    post.residuals = draw_metric_samples(model, post.xi_bar, cfg.n_samples,
                                         master.fork(0x4d47u, static_cast<std::uint64_t>(it)),
                                         cfg);
    post.xi_bar = minimize_kl(model, post.xi_bar, post.residuals,
                              cfg.optimizer_steps, cfg);
    const double kl = sampled_kl(model, post.xi_bar, post.residuals, cfg.threads);
    post.kl_history.push_back(kl);
    log_line(cfg, format("event=mgvi_iter iter=%d kl=%.8g mean_norm=%.4g", it, kl,
                         post.xi_bar.norm()));
  }
  // Final samples drawn at the final mean, so stored moments are centered.
  post.residuals = draw_metric_samples(
      model, post.xi_bar, cfg.n_samples,
      master.fork(0x4d47u, static_cast<std::uint64_t>(cfg.n_global_iterations)), cfg);
  return post;
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> posterior_moments(
    const PosteriorApprox& posterior,
    const std::function<Eigen::ArrayXd(const Eigen::VectorXd&)>& q) {
  const int n = static_cast<int>(posterior.residuals.size());
  if (n < 2) {
    throw std::invalid_argument("posterior_moments: need at least two samples");
  }
  Eigen::ArrayXd mean;
  std::vector<Eigen::ArrayXd> vals(n);
  for (int s = 0; s < n; ++s) {
    vals[s] = q(posterior.xi_bar + posterior.residuals[s]);
    if (s == 0) {
      mean = vals[s];
    } else {
      mean += vals[s];
    }
  }
  mean /= n;
  Eigen::ArrayXd var = Eigen::ArrayXd::Zero(mean.size());
  for (int s = 0; s < n; ++s) var += (vals[s] - mean).square();
  var /= (n - 1);
  return {mean, var.sqrt()};
}

}  // namespace cadens
