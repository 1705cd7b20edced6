#include "mlsq/partition.hpp"

#include <algorithm>

#include "mlsq/errors.hpp"

namespace mlsq {

Partition::Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks)
    : universe_(universe), blocks_(std::move(blocks)) {
  if (universe_ == 0) throw PreconditionError("partition: empty universe");
  if (blocks_.empty()) throw PreconditionError("partition: no blocks");
  std::vector<std::uint8_t> seen(universe_, 0);
  std::size_t total = 0;
  for (const auto& block : blocks_) {
    if (block.empty()) throw PreconditionError("partition: empty block");
    for (std::size_t idx : block) {
      if (idx >= universe_) throw PreconditionError("partition: index out of range");
      if (seen[idx]) throw PreconditionError("partition: blocks are not disjoint");
      seen[idx] = 1;
    }
    total += block.size();
  }
  if (total != universe_) throw PreconditionError("partition: blocks do not cover the universe");
}

std::size_t Partition::max_block_size() const {
  std::size_t best = 0;
  for (const auto& block : blocks_) best = std::max(best, block.size());
  return best;
}

Partition contiguous_partition(std::size_t universe, std::size_t block_size) {
  if (block_size == 0 || block_size > universe)
    throw PreconditionError("contiguous_partition: block size must lie in [1, universe]");
  const std::size_t count = (universe + block_size - 1) / block_size;
  std::vector<std::vector<std::size_t>> blocks(count);
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t lo = b * block_size;
    const std::size_t hi = std::min(lo + block_size, universe);
    blocks[b].reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) blocks[b].push_back(i);
  }
  return Partition(universe, std::move(blocks));
}

std::pair<std::size_t, std::size_t> PairSampler::sample(SeededRng& rng) const {
  const std::size_t i = rng.next_index(rows_.block_count());
  const std::size_t j = rng.next_index(cols_.block_count());
  return {i, j};
}

}  // namespace mlsq
