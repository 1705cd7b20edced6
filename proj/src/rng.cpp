#include "mlsq/rng.hpp"

#include <cmath>

#include "mlsq/errors.hpp"

namespace mlsq {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  // Odd per-stream increment puts distinct streams on distinct orbits.
  increment_ = mix64(stream + kGolden) | 1ULL;
  state_ = mix64(seed + kGolden) ^ mix64(stream ^ 0x6A09E667F3BCC909ULL);
}

std::uint64_t SeededRng::next_u64() {
  state_ += increment_;
  return mix64(state_);
}

double SeededRng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_double() - 1.0;
    v = 2.0 * next_double() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::size_t SeededRng::next_index(std::size_t n) {
  if (n == 0) throw PreconditionError("next_index: empty range");
  const std::uint64_t nn = n;
  const std::uint64_t threshold = (0 - nn) % nn;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return static_cast<std::size_t>(x % nn);
  }
}

}  // namespace mlsq
