#include "cadens/harmonic.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace cadens {

namespace {

// FFTW plan creation is not thread safe; execution on distinct buffers is.
// Plans are cached per shape for the lifetime of the process.
class DhtPlans {
 public:
  static fftw_plan get(const std::vector<int>& shape) {
    static DhtPlans instance;
    std::lock_guard<std::mutex> lock(instance.mutex_);
    auto it = instance.plans_.find(shape);
    if (it != instance.plans_.end()) return it->second;

    std::size_t total = 1;
    for (int n : shape) total *= static_cast<std::size_t>(n);
    std::vector<double> in(total), out(total);
    std::vector<fftw_r2r_kind> kinds(shape.size(), FFTW_DHT);
    fftw_plan plan = fftw_plan_r2r(static_cast<int>(shape.size()), shape.data(),
                                   in.data(), out.data(), kinds.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("dht: FFTW plan creation failed");
    instance.plans_.emplace(shape, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::vector<int>, fftw_plan> plans_;
};

std::vector<int> padded_shape(const std::vector<Grid1D>& axes) {
  std::vector<int> shape;
  shape.reserve(axes.size());
  for (const auto& ax : axes) shape.push_back(ax.padded_n);
  return shape;
}

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

double mode_volume(const std::vector<Grid1D>& axes) {
  double v = 1.0;
  for (const auto& ax : axes) v /= ax.padded_length();
  return v;
}

}  // namespace

Eigen::ArrayXd dht(const Eigen::ArrayXd& v, const std::vector<int>& shape) {
  if (shape.empty()) throw std::invalid_argument("dht: empty shape");
  if (v.size() != shape_size(shape)) {
    throw std::invalid_argument("dht: value count does not match shape");
  }
  fftw_plan plan = DhtPlans::get(shape);
  Eigen::ArrayXd out(v.size());
  // Out-of-place r2r transforms preserve their input.
  fftw_execute_r2r(plan, const_cast<double*>(v.data()), out.data());
  return out;
}

Eigen::ArrayXd synthesize_padded(const Eigen::ArrayXd& coeffs,
                                 const std::vector<Grid1D>& axes) {
  const auto shape = padded_shape(axes);
  if (coeffs.size() != shape_size(shape)) {
    throw std::invalid_argument("synthesize_padded: coefficient count does not match padded grid");
  }
  return dht(coeffs, shape) * std::sqrt(mode_volume(axes));
}

Eigen::ArrayXd analyze_padded(const Eigen::ArrayXd& field_padded,
                              const std::vector<Grid1D>& axes) {
  const auto shape = padded_shape(axes);
  if (field_padded.size() != shape_size(shape)) {
    throw std::invalid_argument("analyze_padded: value count does not match padded grid");
  }
  const double scale = 1.0 / (static_cast<double>(shape_size(shape)) *
                              std::sqrt(mode_volume(axes)));
  return dht(field_padded, shape) * scale;
}

Eigen::ArrayXd crop_padded(const Eigen::ArrayXd& padded,
                           const std::vector<Grid1D>& axes) {
  const auto shape = padded_shape(axes);
  if (padded.size() != shape_size(shape)) {
    throw std::invalid_argument("crop_padded: value count does not match padded grid");
  }
  std::int64_t out_size = 1;
  for (const auto& ax : axes) out_size *= ax.n_pixels;
  Eigen::ArrayXd out(out_size);

  const int dims = static_cast<int>(axes.size());
  std::vector<std::int64_t> idx(dims, 0);
  for (std::int64_t flat = 0; flat < out_size; ++flat) {
    std::int64_t src = 0;
    for (int d = 0; d < dims; ++d) src = src * axes[d].padded_n + idx[d];
    out[flat] = padded[src];
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < axes[d].n_pixels) break;
      idx[d] = 0;
    }
  }
  return out;
}

Eigen::ArrayXd zeropad(const Eigen::ArrayXd& cropped,
                       const std::vector<Grid1D>& axes) {
  std::int64_t in_size = 1;
  for (const auto& ax : axes) in_size *= ax.n_pixels;
  if (cropped.size() != in_size) {
    throw std::invalid_argument("zeropad: value count does not match grid");
  }
  const auto shape = padded_shape(axes);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(shape_size(shape));

  const int dims = static_cast<int>(axes.size());
  std::vector<std::int64_t> idx(dims, 0);
  for (std::int64_t flat = 0; flat < in_size; ++flat) {
    std::int64_t dst = 0;
    for (int d = 0; d < dims; ++d) dst = dst * axes[d].padded_n + idx[d];
    out[dst] = cropped[flat];
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < axes[d].n_pixels) break;
      idx[d] = 0;
    }
  }
  return out;
}

Eigen::ArrayXd synthesize_adjoint(const Eigen::ArrayXd& grad_cropped,
                                  const std::vector<Grid1D>& axes) {
  // crop^T = zeropad, and the Hartley matrix is symmetric.
  const auto shape = padded_shape(axes);
  return dht(zeropad(grad_cropped, axes), shape) * std::sqrt(mode_volume(axes));
}

Field harmonic_synthesize(const Eigen::ArrayXd& coeffs,
                          const std::vector<Grid1D>& axes) {
  Field f = make_field(axes);
  f.values = crop_padded(synthesize_padded(coeffs, axes), axes);
  return f;
}

Field harmonic_synthesize(const Eigen::ArrayXd& coeffs, const Grid1D& grid) {
  return harmonic_synthesize(coeffs, std::vector<Grid1D>{grid});
}

Field harmonic_synthesize(const Eigen::ArrayXd& coeffs, const Grid2D& grid) {
  return harmonic_synthesize(coeffs, grid.axes());
}

Field harmonic_synthesize(const std::vector<std::complex<double>>& coeffs,
                          const Grid1D& grid) {
  const int n = grid.padded_n;
  if (static_cast<int>(coeffs.size()) != n / 2 + 1) {
    throw std::invalid_argument("harmonic_synthesize: expected padded_n/2 + 1 complex modes");
  }
  const double tol = 1e-12;
  if (std::abs(coeffs.front().imag()) > tol || std::abs(coeffs.back().imag()) > tol) {
    throw std::invalid_argument("harmonic_synthesize: DC and Nyquist modes must be real");
  }
  // Map the Hermitian half spectrum onto the real Hartley basis.
  Eigen::ArrayXd c = Eigen::ArrayXd::Zero(n);
  c[0] = coeffs[0].real();
  c[n / 2] = coeffs[n / 2].real();
  for (int j = 1; j < n / 2; ++j) {
    c[j] = coeffs[j].real() - coeffs[j].imag();
    c[n - j] = coeffs[j].real() + coeffs[j].imag();
  }
  return harmonic_synthesize(c, grid);
}

}  // namespace cadens
