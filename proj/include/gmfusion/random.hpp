#ifndef GMFUSION_RANDOM_HPP
#define GMFUSION_RANDOM_HPP

#include <cassert>
#include <cstdint>
#include <random>
#include <vector>

namespace gmfusion {

// std::mt19937_64 has a standardized output sequence. The distributions of the
// standard library do not, so bounded draws use rejection sampling below.
using random_engine = std::mt19937_64;

// Uniform draw from [0, n).
inline std::uint64_t uniform_index(random_engine& rng, std::uint64_t n)
{
  assert(n > 0);
  const std::uint64_t limit = random_engine::max() - (random_engine::max() % n + 1) % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r > limit);
  return r % n;
}

// Fisher-Yates with uniform_index, so the order is platform independent.
template<typename T>
void shuffle(std::vector<T>& values, random_engine& rng)
{
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(values[i - 1], values[j]);
  }
}

}

#endif
