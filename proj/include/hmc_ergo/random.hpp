#ifndef HMC_ERGO_RANDOM_HPP
#define HMC_ERGO_RANDOM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace hmc_ergo {

/// Private random stream for one chain or probe, keyed by (master seed, index).
///
/// Distinct indices give statistically independent streams; the same key
/// always reproduces the same draws within one build.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed, std::uint64_t stream_index = 0) {
    std::uint64_t state = master_seed;
    const std::uint64_t a = splitmix64(state);
    state ^= 0x9e3779b97f4a7c15ULL * (stream_index + 1);
    const std::uint64_t b = splitmix64(state);
    const std::uint64_t c = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    engine_.seed(seq);
  }

  double normal() { return normal_(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal();
    return out;
  }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Uniform integer on {lo, ..., hi}.
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace hmc_ergo

#endif  // HMC_ERGO_RANDOM_HPP
