#pragma once

#include <string>
#include <vector>

#include "cadens/generative.hpp"
#include "cadens/inference.hpp"
#include "cadens/latent_model.hpp"

namespace cadens {

struct EvidenceConfig {
  int probes = 8;          // Rademacher probes for the log-determinant
  int lanczos_order = 50;  // Krylov order per probe
};

// Stochastic evidence lower bound: expected log joint over the stored
// posterior samples plus the Gaussian entropy of the approximation.
struct ElboEstimate {
  double value = 0.0;   // nits
  double stderr_ = 0.0; // numerical one-sigma of the estimate

  // breakdown
  double expected_log_joint = 0.0;
  double log_joint_stderr = 0.0;
  double entropy = 0.0;             // D/2 ln(2*pi*e) - logdet/2
  double logdet = 0.0;              // ln det M
  double logdet_stderr = 0.0;
  int probes = 0;
  int lanczos_order = 0;

  std::string dataset_label;
  Direction direction = Direction::XtoY;
};

ElboEstimate estimate_elbo(const PosteriorApprox& posterior, const LatentModel& model,
                           const EvidenceConfig& cfg, Rng rng,
                           const std::string& dataset_label = "",
                           Direction direction = Direction::XtoY, int threads = 0);

// Log evidence ratio of a causal model against its independent reference.
// One nit corresponds to a factor e ~ 2.7 in posterior odds.
struct DeltaEvidence {
  double delta = 0.0;
  double stderr_ = 0.0;  // both ELBO stderrs combined in quadrature
  Direction direction = Direction::XtoY;
  std::string dataset_label;
  ElboEstimate elbo_causal;
  ElboEstimate elbo_independent;

  double odds_ratio() const;  // e^delta
};

DeltaEvidence delta_evidence(const ElboEstimate& elbo_causal,
                             const ElboEstimate& elbo_independent);

// Stochastic Lanczos quadrature estimate of ln det(M) for a symmetric
// positive-definite operator, with the probe-scatter standard error.
struct LogDetEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int truncated_probes = 0;  // probes whose Krylov space closed early
};
LogDetEstimate slq_logdet(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
    Eigen::Index dim, int probes, int order, Rng rng, int threads = 0);

}  // namespace cadens
