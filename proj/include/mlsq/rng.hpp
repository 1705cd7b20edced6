#pragma once

#include <cstddef>
#include <cstdint>

namespace mlsq {

// Stream ids used throughout the project. One master seed plus a stream id
// select an independent substream, so problem generation, per-trial masks,
// per-trial block draws, and Monte Carlo batches never share randomness:
//
//   stream 0              problem generation (matrix entries, then rhs coefficients)
//   stream 1000 + trial   per-trial observation masks
//   stream 2000 + trial   per-trial block-pair draws
//   stream 3000 + batch   second-moment estimator batches
inline constexpr std::uint64_t kStreamProblem = 0;
inline constexpr std::uint64_t kStreamMaskBase = 1000;
inline constexpr std::uint64_t kStreamPairBase = 2000;
inline constexpr std::uint64_t kStreamRhoBatchBase = 3000;

// Splittable counter-based generator: a splitmix64 walk whose increment is
// derived from the stream id, so distinct streams follow distinct orbits.
// Identical (seed, stream) pairs reproduce identical sequences; the integer
// and uniform draws use 64-bit integer arithmetic only.
class SeededRng {
 public:
  SeededRng() : SeededRng(0, 0) {}
  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53 random bits.
  double next_double();

  // Standard normal via the polar Box-Muller method; one spare is cached.
  double next_gaussian();

  // Uniform on {0, ..., n-1}, unbiased by rejection.
  std::size_t next_index(std::size_t n);

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
  std::uint64_t increment_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mlsq
