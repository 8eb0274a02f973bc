#include "cadens/evidence.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cadens/parallel.hpp"

namespace cadens {

LogDetEstimate slq_logdet(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    Eigen::Index dim, int probes, int order, Rng rng, int threads) {
  if (probes < 1) throw std::invalid_argument("slq_logdet: probes must be >= 1");
  order = std::min<Eigen::Index>(order, dim);

  std::vector<double> estimates(probes);
  std::vector<int> truncated(probes, 0);
  parallel_for(probes, threads, [&](int probe) {
    Rng stream = rng.fork(0x70u, static_cast<std::uint64_t>(probe));
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = (stream.next_u64() & 1u) ? 1.0 : -1.0;
    const double znorm2 = static_cast<double>(dim);

    // Lanczos with full reorthogonalization.
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(order);
    Eigen::VectorXd v = z / std::sqrt(znorm2);
    basis.push_back(v);
    Eigen::VectorXd alpha(order), beta(order);
    int m = 0;
    Eigen::VectorXd w;
    for (int j = 0; j < order; ++j) {
      w = apply(basis[j]);
      alpha[j] = basis[j].dot(w);
      w -= alpha[j] * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (const auto& q : basis) w -= q.dot(w) * q;
      m = j + 1;
      if (j + 1 == order) break;
      const double b = w.norm();
      if (b < 1e-10 * std::max(1.0, std::abs(alpha[j]))) {
        // Krylov space closed; the truncated quadrature is exact here.
        truncated[probe] = 1;
        break;
      }
      beta[j] = b;
      basis.push_back(w / b);
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXd U = es.eigenvectors();
    double acc = 0.0;
    for (int l = 0; l < m; ++l) {
      const double tau = U(0, l) * U(0, l);
      acc += tau * std::log(std::max(theta[l], 1e-300));
    }
    estimates[probe] = znorm2 * acc;
  });

  LogDetEstimate out;
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= probes;
  out.value = mean;
  if (probes > 1) {
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    var /= (probes - 1);
    out.stderr_ = std::sqrt(var / probes);
  }
  for (int t : truncated) out.truncated_probes += t;
  return out;
}

ElboEstimate estimate_elbo(const PosteriorApprox& posterior, const LatentModel& model,
                           const EvidenceConfig& cfg, Rng rng,
                           const std::string& dataset_label, Direction direction,
                           int threads) {
  const Eigen::Index dim = model.dim();
  const int n = static_cast<int>(posterior.residuals.size());
  if (n < 2) throw std::invalid_argument("estimate_elbo: need at least two samples");

  // Expected log joint over the stored samples. Antithetic pairs are
  // dependent, so the scatter is taken over pair averages.
  std::vector<double> vals(n);
  parallel_for(n, threads, [&](int s) {
    const Eigen::VectorXd xi = posterior.xi_bar + posterior.residuals[s];
    vals[s] = model.log_likelihood(xi) - 0.5 * xi.squaredNorm() -
              0.5 * dim * std::log(2.0 * M_PI);
  });
  double lj_mean = 0.0;
  for (double v : vals) lj_mean += v;
  lj_mean /= n;
  double lj_stderr = 0.0;
  if (n >= 4 && n % 2 == 0) {
    const int pairs = n / 2;
    double var = 0.0;
    for (int p = 0; p < pairs; ++p) {
      const double pair_mean = 0.5 * (vals[2 * p] + vals[2 * p + 1]);
      var += (pair_mean - lj_mean) * (pair_mean - lj_mean);
    }
    var /= (pairs - 1);
    lj_stderr = std::sqrt(var / pairs);
  } else {
    double var = 0.0;
    for (double v : vals) var += (v - lj_mean) * (v - lj_mean);
    var /= (n - 1);
    lj_stderr = std::sqrt(var / n);
  }

  const auto lin = model.linearize(posterior.xi_bar);
  const auto apply_metric = [&lin](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(lin.metric(v) + v);
  };
  const LogDetEstimate ld =
      slq_logdet(apply_metric, dim, cfg.probes, cfg.lanczos_order,
                 rng.fork(0x4c44u), threads);

  ElboEstimate out;
  out.expected_log_joint = lj_mean;
  out.log_joint_stderr = lj_stderr;
  out.logdet = ld.value;
  out.logdet_stderr = ld.stderr_;
  out.entropy = 0.5 * dim * std::log(2.0 * M_PI * std::exp(1.0)) - 0.5 * ld.value;
  out.value = lj_mean + out.entropy;
  out.stderr_ = std::sqrt(lj_stderr * lj_stderr + 0.25 * ld.stderr_ * ld.stderr_);
  out.probes = cfg.probes;
  out.lanczos_order = cfg.lanczos_order;
  out.dataset_label = dataset_label;
  out.direction = direction;
  return out;
}

double DeltaEvidence::odds_ratio() const { return std::exp(delta); }

DeltaEvidence delta_evidence(const ElboEstimate& elbo_causal,
                             const ElboEstimate& elbo_independent) {
  if (elbo_causal.dataset_label != elbo_independent.dataset_label) {
    throw std::invalid_argument("delta_evidence: estimates come from different datasets");
  }
  DeltaEvidence d;
  d.delta = elbo_causal.value - elbo_independent.value;
  d.stderr_ = std::sqrt(elbo_causal.stderr_ * elbo_causal.stderr_ +
                        elbo_independent.stderr_ * elbo_independent.stderr_);
  d.direction = elbo_causal.direction;
  d.dataset_label = elbo_causal.dataset_label;
  d.elbo_causal = elbo_causal;
  d.elbo_independent = elbo_independent;
  return d;
}

}  // namespace cadens
