#pragma once

#include <string>
#include <vector>

#include "cadens/config.hpp"
#include "cadens/dataio.hpp"
#include "cadens/evidence.hpp"
#include "cadens/infectivity.hpp"
#include "cadens/likelihood.hpp"

namespace cadens {

struct FitResult {
  ModelConfig model_cfg;           // direction + original-axis grid
  Direction requested_direction = Direction::XtoY;
  std::string dataset_label;
  CountGrid counts;                // on the working grid
  PosteriorApprox posterior;
  ElboEstimate elbo;
};

// Fit one model on a dataset (threshold already applied). rho0 defaults to
// N/100 with N the binned count total. Deterministic given rng.
FitResult fit_direction(const Dataset& data, Direction direction,
                        const RunConfig& cfg, Rng rng);

// Log-evidence gap of one causal direction against its independent
// reference in the same orientation. For YtoX both the causal and the
// reference model are built on the axis-swapped grid, so the result equals
// the XtoY gap on axis-swapped data bit for bit under a shared rng.
DeltaEvidence direction_delta(const Dataset& data, Direction direction,
                              const RunConfig& cfg, Rng rng);

struct DirectionComparison {
  DeltaEvidence xtoy;
  DeltaEvidence ytox;
};

DirectionComparison compare_directions(const Dataset& data, const RunConfig& cfg,
                                       Rng rng);

struct NullTestResult {
  std::vector<DeltaEvidence> deltas;  // one per successful permutation
  double mean = 0.0;
  double spread = 0.0;  // sample standard deviation over permutations
  int failures = 0;     // permutations whose fit raised a numerical error
};

// Shuffle y, refit XtoY against Independent, repeat.
NullTestResult randomization_null_test(const Dataset& data, const RunConfig& cfg,
                                       int n_permutations, Rng rng);

// Synthetic ground truth: smooth fields with fixed spectrum parameters and
// the stated coupling amplitude (0 for an independent truth); the joint
// density is scaled so its integral equals n_expected.
struct SyntheticTruth {
  Field joint;
  Field cond;
  std::string params_json;
};
SyntheticTruth make_synthetic_truth(const Grid2D& grid, double coupling_amplitude,
                                    double n_expected, Rng rng);

// Persisted fit (model plus posterior), enough to rebuild densities and
// project response curves.
void save_fit_state(const std::string& path, const FitResult& fit);
FitResult load_fit_state(const std::string& path);

// --- output helpers ---
void ensure_directory(const std::string& path);

// CSV matrix with a 4-line '#' metadata header (axis start/step/n).
void write_matrix_csv(const std::string& path, const Field& field2d,
                      const std::string& quantity);
Field read_matrix_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

// Minimal static plots.
void write_heatmap_svg(const std::string& path, const Field& field2d,
                       const std::string& title);
void write_band_svg(const std::string& path, const Eigen::ArrayXd& x,
                    const Eigen::ArrayXd& mean, const Eigen::ArrayXd& lo,
                    const Eigen::ArrayXd& hi, const std::string& title);

}  // namespace cadens
