#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mlsq/rng.hpp"

namespace mlsq {

// A partition of {0, ..., universe-1} into nonempty, pairwise disjoint
// blocks whose union covers the universe. Indices are 0-based internally;
// user-facing documentation states the usual 1-based convention.
class Partition {
 public:
  Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks);

  std::size_t universe() const noexcept { return universe_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<std::size_t>& block(std::size_t i) const { return blocks_[i]; }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  std::size_t max_block_size() const;

 private:
  std::size_t universe_;
  std::vector<std::vector<std::size_t>> blocks_;
};

// ceil(universe / block_size) contiguous blocks; all of size block_size
// except possibly the last, which holds the remainder.
Partition contiguous_partition(std::size_t universe, std::size_t block_size);

// Uniform sampling over the product of a row partition (s blocks) and a
// column partition (t blocks): each pair has probability 1/(s*t). The row
// index is drawn first, then the column index, independently.
class PairSampler {
 public:
  PairSampler(Partition row_partition, Partition col_partition)
      : rows_(std::move(row_partition)), cols_(std::move(col_partition)) {}

  const Partition& row_partition() const noexcept { return rows_; }
  const Partition& col_partition() const noexcept { return cols_; }
  std::size_t row_blocks() const noexcept { return rows_.block_count(); }
  std::size_t col_blocks() const noexcept { return cols_.block_count(); }

  std::pair<std::size_t, std::size_t> sample(SeededRng& rng) const;

 private:
  Partition rows_;
  Partition cols_;
};

inline std::pair<std::size_t, std::size_t> sample_pair(const PairSampler& sampler,
                                                       SeededRng& rng) {
  return sampler.sample(rng);
}

}  // namespace mlsq
