#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace zncount {

/// Seeded generator whose outputs are identical on every platform:
/// mt19937_64 raw words mapped by bit manipulation, never through the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n), n >= 1.
  std::int64_t below(std::int64_t n) {
    __extension__ typedef unsigned __int128 wide;
    const wide x = static_cast<wide>(next()) * static_cast<std::uint64_t>(n);
    return static_cast<std::int64_t>(x >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

/// size distinct residues of Z_n in increasing order (partial Fisher-Yates).
inline std::vector<std::int64_t> random_subset(std::int64_t n, std::int64_t size, Rng& rng) {
  if (n < 1 || size < 0 || size > n) throw std::invalid_argument("random_subset: need 0 <= size <= n");
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < size; ++i) {
    const std::int64_t j = i + rng.below(n - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace zncount
