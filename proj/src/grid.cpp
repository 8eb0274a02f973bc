#include "cadens/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace cadens {

namespace {

bool is_five_smooth(int n) {
  for (int f : {2, 3, 5}) {
    while (n % f == 0) n /= f;
  }
  return n == 1;
}

int next_padded_size(int minimum) {
  int n = minimum + (minimum % 2);  // even
  while (!(n % 2 == 0 && is_five_smooth(n))) n += 2;
  return n;
}

}  // namespace

Grid1D make_grid(int n_pixels, double start, double step, double pad_factor) {
  if (n_pixels < 2) throw std::invalid_argument("make_grid: n_pixels must be >= 2");
  if (!(step > 0.0)) throw std::invalid_argument("make_grid: step must be positive");
  if (!(pad_factor >= 1.0)) throw std::invalid_argument("make_grid: pad_factor must be >= 1");
  Grid1D g;
  g.n_pixels = n_pixels;
  g.start = start;
  g.step = step;
  g.pad_factor = pad_factor;
  const int minimum = static_cast<int>(std::ceil(n_pixels * pad_factor - 1e-9));
  g.padded_n = next_padded_size(minimum);
  return g;
}

std::int64_t Field::size() const {
  std::int64_t n = 1;
  for (const auto& ax : axes) n *= ax.n_pixels;
  return n;
}

double Field::pixel_volume() const {
  double v = 1.0;
  for (const auto& ax : axes) v *= ax.step;
  return v;
}

Field make_field(std::vector<Grid1D> axes) {
  Field f;
  f.axes = std::move(axes);
  f.values = Eigen::ArrayXd::Zero(f.size());
  return f;
}

Field make_field(const Grid1D& g) { return make_field(std::vector<Grid1D>{g}); }

Field make_field(const Grid2D& g) { return make_field(g.axes()); }

double integrate(const Field& field) {
  return field.values.sum() * field.pixel_volume();
}

ModeSet mode_set(const Grid1D& grid) {
  ModeSet m;
  const int n_modes = grid.padded_n / 2 + 1;
  m.k = Eigen::ArrayXd(n_modes);
  const double L = grid.padded_length();
  for (int j = 0; j < n_modes; ++j) m.k[j] = j / L;
  m.volume_factor = 1.0 / L;
  return m;
}

Eigen::ArrayXd synthesis_freqs(const Grid1D& grid) {
  const int n = grid.padded_n;
  const double L = grid.padded_length();
  Eigen::ArrayXd k(n);
  for (int j = 0; j < n; ++j) k[j] = std::min(j, n - j) / L;
  return k;
}

}  // namespace cadens
