#pragma once

#include <complex>
#include <vector>

#include "cadens/grid.hpp"

namespace cadens {

// Separable discrete Hartley transform over a row-major array of the given
// shape, unnormalized: applying it twice multiplies by the total size. The
// Hartley basis diagonalizes stationary covariances with even spectra while
// keeping every degree of freedom real, which is what lets standard-normal
// latent excitations map linearly onto Gaussian-process field samples.
Eigen::ArrayXd dht(const Eigen::ArrayXd& v, const std::vector<int>& shape);

// Synthesis from real harmonic coefficients on the padded grid, including
// the sqrt(mode volume) normalization. Stays on the padded grid.
Eigen::ArrayXd synthesize_padded(const Eigen::ArrayXd& coeffs,
                                 const std::vector<Grid1D>& axes);

// Exact inverse of synthesize_padded.
Eigen::ArrayXd analyze_padded(const Eigen::ArrayXd& field_padded,
                              const std::vector<Grid1D>& axes);

// Adjoint of (crop of synthesize_padded): maps a gradient on the unpadded
// grid back to harmonic-coefficient space.
Eigen::ArrayXd synthesize_adjoint(const Eigen::ArrayXd& grad_cropped,
                                  const std::vector<Grid1D>& axes);

// Restrict a padded row-major array to the unpadded region.
Eigen::ArrayXd crop_padded(const Eigen::ArrayXd& padded,
                           const std::vector<Grid1D>& axes);

// Embed an unpadded array into the padded grid with zeros (adjoint of crop).
Eigen::ArrayXd zeropad(const Eigen::ArrayXd& cropped,
                       const std::vector<Grid1D>& axes);

// Real field from real harmonic coefficients, cropped to the unpadded grid.
Field harmonic_synthesize(const Eigen::ArrayXd& coeffs,
                          const std::vector<Grid1D>& axes);
Field harmonic_synthesize(const Eigen::ArrayXd& coeffs, const Grid1D& grid);
Field harmonic_synthesize(const Eigen::ArrayXd& coeffs, const Grid2D& grid);

// 1-D complex view: coefficients in the half-spectrum convention
// (length padded_n/2 + 1; entries 0 and Nyquist must be real).
Field harmonic_synthesize(const std::vector<std::complex<double>>& coeffs,
                          const Grid1D& grid);

}  // namespace cadens
