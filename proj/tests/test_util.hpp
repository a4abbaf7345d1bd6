#pragma once

#include <cstdint>
#include <vector>

#include "cqg/tensor.hpp"

namespace testutil {

// Deterministic RNG for test fixtures, independent of the library's
// initialization path.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }
};

inline cqg::Tensor random_tensor(Rng& rng, cqg::Shape shape, double lo = -1.0,
                                 double hi = 1.0) {
  std::vector<double> v(cqg::shape_size(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return cqg::Tensor(std::move(shape), std::move(v));
}

}  // namespace testutil
