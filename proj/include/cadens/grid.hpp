#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace cadens {

// Regular 1-D axis. Pixel i covers [start + i*step, start + (i+1)*step) and
// is represented by its center. Harmonic operations act on a periodic
// zero-padded embedding of length padded_n >= n_pixels * pad_factor.
struct Grid1D {
  int n_pixels = 0;
  double start = 0.0;
  double step = 1.0;
  double pad_factor = 1.0;
  int padded_n = 0;  // actual padded length (even, 5-smooth)

  double length() const { return n_pixels * step; }
  double padded_length() const { return padded_n * step; }
  double center(int i) const { return start + (i + 0.5) * step; }
  double end() const { return start + n_pixels * step; }
};

// padded_n is the smallest even 2^a*3^b*5^c integer >= n_pixels * pad_factor.
Grid1D make_grid(int n_pixels, double start, double step, double pad_factor = 2.0);

struct Grid2D {
  Grid1D gx;
  Grid1D gy;

  std::int64_t size() const {
    return static_cast<std::int64_t>(gx.n_pixels) * gy.n_pixels;
  }
  std::vector<Grid1D> axes() const { return {gx, gy}; }
};

// Scalar values at the pixel centers of a product grid (1..n axes).
// Values are flattened row-major: the last axis varies fastest.
struct Field {
  std::vector<Grid1D> axes;
  Eigen::ArrayXd values;

  int dim() const { return static_cast<int>(axes.size()); }
  std::int64_t size() const;
  double pixel_volume() const;
};

Field make_field(std::vector<Grid1D> axes);
Field make_field(const Grid1D& g);
Field make_field(const Grid2D& g);

// Midpoint quadrature: sum of values times the pixel volume.
double integrate(const Field& field);

// Harmonic frequencies of the padded axis in the real-field convention:
// k_j = j / padded_length for j = 0 .. padded_n/2. volume_factor is the
// mode volume 1 / padded_length; synthesis applies its square root so the
// spectrum parameters stay intensive with respect to the axis extent.
struct ModeSet {
  Eigen::ArrayXd k;
  double volume_factor = 0.0;
};

ModeSet mode_set(const Grid1D& grid);

// One frequency per harmonic basis function of the padded axis
// (length padded_n): min(j, padded_n - j) / padded_length.
Eigen::ArrayXd synthesis_freqs(const Grid1D& grid);

}  // namespace cadens
