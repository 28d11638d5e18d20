#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace igt {

// Indices into a dataset; graphs are processed one by one within a batch.
struct Batch {
  std::vector<std::size_t> indices;
  std::size_t size() const noexcept { return indices.size(); }
};

// Splits `count` items into batches of at most max_batch (>= 2). A trailing
// single-item batch is merged into its predecessor so every batch can pair
// variant parts across at least two graphs. With a seed, items are shuffled
// first (std::mt19937_64).
std::vector<Batch> make_batches(std::size_t count, std::size_t max_batch,
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

}  // namespace igt
