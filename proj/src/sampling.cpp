#include <numeric>
#include <unordered_set>
#include <utility>

#include "attrbias/rng.hpp"

namespace attrbias {

std::vector<std::uint64_t> sample_without_replacement(CounterRng& rng, std::uint64_t population,
                                                      std::uint64_t k) {
  std::vector<std::uint64_t> out;
  if (k >= population) {
    out.resize(population);
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return out;
  }
  out.reserve(k);
  if (population <= 2 * k) {
    // Dense: partial Fisher-Yates over the whole population.
    std::vector<std::uint64_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::uint64_t i = 0; i < k; ++i) {
      const std::uint64_t j = i + rng.uniform_below(population - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }
  // Sparse: rejection of repeats; acceptance probability stays above 1/2.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(k * 2);
  while (out.size() < k) {
    const std::uint64_t v = rng.uniform_below(population);
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

}  // namespace attrbias
