#include "igt/batching.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "igt/errors.hpp"

namespace igt {

std::vector<Batch> make_batches(std::size_t count, std::size_t max_batch,
                                std::optional<std::uint64_t> shuffle_seed) {
  if (max_batch < 2) throw ConfigError("max_batch must be at least 2");
  if (count == 1) throw ConfigError("a single graph cannot form an intervention batch");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    std::mt19937_64 rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < count; start += max_batch) {
    const std::size_t end = std::min(count, start + max_batch);
    Batch b;
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
    if (b.size() == 1 && !batches.empty()) {
      batches.back().indices.push_back(b.indices[0]);
    } else {
      batches.push_back(std::move(b));
    }
  }
  return batches;
}

}  // namespace igt
