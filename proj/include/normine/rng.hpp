#ifndef NORMINE_RNG_HPP
#define NORMINE_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace normine {

// Draws built directly on the mt19937_64 word stream.  std::shuffle and the
// std distributions are implementation-defined, which would make output files
// depend on the standard library build; these helpers keep byte-identical
// reruns portable.

inline double uniform_double(std::mt19937_64& rng) {
  // 53 mantissa bits, in [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) via rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::size_t begin, std::size_t end,
                           std::mt19937_64& rng) {
  for (std::size_t i = end - begin; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[begin + i - 1], v[begin + j]);
  }
}

}  // namespace normine

#endif
