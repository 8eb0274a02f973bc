#pragma once

#include <string>
#include <vector>

#include "cadens/grid.hpp"
#include "cadens/rng.hpp"

namespace cadens {

struct Record {
  double x = 0.0;  // age in years
  double y = 0.0;  // log10 viral RNA copies per ml
};

struct Dataset {
  std::vector<Record> records;
  std::string label;
  std::string provenance;

  std::size_t size() const { return records.size(); }
};

// CSV with header `age,log10_load`; comment lines start with '#'. In strict
// mode any malformed row aborts with the offending line numbers; otherwise
// malformed rows are skipped and noted in the provenance string.
Dataset load_dataset(const std::string& path, bool strict = false);

void save_dataset(const std::string& path, const Dataset& data);

// Keep records with y >= y_min.
Dataset apply_threshold(const Dataset& data, double y_min);

// Shuffle the y values with a uniformly random permutation.
Dataset permute_y(const Dataset& data, Rng rng);

// Deterministic variant used by identity-permutation checks.
Dataset apply_permutation(const Dataset& data, const std::vector<int>& perm);

// Swap the roles of the two coordinates.
Dataset swap_xy(const Dataset& data);

// Draw Poisson pixel counts from the expected-count surface and emit one
// record per count at the pixel center. Optional sub-pixel uniform jitter
// (off by default so binning synthetic data is exactly invertible).
Dataset synthesize_counts(const Field& joint_density, Rng rng, bool jitter = false,
                          const std::string& label = "synthetic");

}  // namespace cadens
