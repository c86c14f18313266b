#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace fvd {

/// Purpose tags that keep the engine's random streams disjoint.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kDeath = 2,
  kDonor = 3,
  kRebirth = 4,
  kResample = 5,
  kSelect = 6,
  kReference = 7,
  kUser = 8,
};

/// A single random stream. Streams are cheap to construct and are keyed
/// by (seed, tag, a, b), so the draws a particle sees at a given step do
/// not depend on which worker thread evaluates it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  Eigen::VectorXd normal_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_key(std::uint64_t seed, StreamTag tag, std::uint64_t a,
                      std::uint64_t b);

inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
  return Rng(mix_key(seed, tag, a, b));
}

}  // namespace fvd
