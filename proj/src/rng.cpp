#include "cadens/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cadens {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  std::uint64_t s = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // Lemire's multiply-shift rejection method (unbiased).
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  while (true) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    const std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo >= bound || lo >= (-bound) % bound) {
      return static_cast<int>(m >> 64);
    }
  }
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Rng Rng::fork(std::uint64_t a, std::uint64_t b) const {
  return Rng(mix(mix(seed_, a), b));
}

std::vector<int> random_permutation(int n, Rng& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

long poisson_draw(double mean, Rng& rng) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson_draw: mean must be >= 0");
  long total = 0;
  // Splitting keeps the inversion loop short; the sum of independent
  // Poisson draws is Poisson with the summed mean.
  while (mean > 30.0) {
    double chunk = 30.0;
    double p = std::exp(-chunk);
    double c = p;
    const double u = rng.uniform();
    long k = 0;
    while (u > c && k < 1000) {
      ++k;
      p *= chunk / static_cast<double>(k);
      c += p;
    }
    total += k;
    mean -= chunk;
  }
  if (mean > 0.0) {
    double p = std::exp(-mean);
    double c = p;
    const double u = rng.uniform();
    long k = 0;
    while (u > c && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      c += p;
    }
    total += k;
  }
  return total;
}

}  // namespace cadens
