#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace cadens {

// Deterministic splittable random stream (xoshiro256++ core, splitmix64
// seeding). Every stochastic step in the library draws from an explicitly
// forked stream, so results depend only on the seed and the fork path --
// never on thread scheduling or call order between streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();        // [0, 1)
  double normal();         // standard normal
  int uniform_int(int n);  // uniform on [0, n)

  Eigen::VectorXd normal_vector(Eigen::Index n);

  // Child stream addressed by (a, b). Depends only on this stream's seed,
  // not on how many values have been drawn from it.
  Rng fork(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates permutation of {0, ..., n-1}.
std::vector<int> random_permutation(int n, Rng& rng);

// Exact Poisson draw; valid for any mean >= 0.
long poisson_draw(double mean, Rng& rng);

}  // namespace cadens
