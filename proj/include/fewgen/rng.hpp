#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "fewgen/matrix.hpp"

namespace fewgen {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// PCG32 (O'Neill's pcg32, fixed multiplier, per-stream increment). The
// generator is fully specified here, so identical seeds reproduce identical
// streams on any platform. Distinct stream selectors give distinct sequences,
// which is what split() hands out for parallel or per-index use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    state_ = 0;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, bound) by rejection; deterministic given the stream.
  std::uint32_t next_below(std::uint32_t bound) {
    std::uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller. Two draws per sample, no cached spare,
  // so the stream position is a pure function of the call count.
  double normal() {
    double u1 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derives an independent generator for (this stream, key). Distinct keys map
  // to distinct PCG stream selectors, so the derived sequences never collide.
  Rng split(std::uint64_t key) const {
    std::uint64_t s = detail::splitmix64(seed_ ^ detail::splitmix64(key + 0x632BE59BD9B4E019ULL));
    std::uint64_t t = detail::splitmix64(stream_ + 0x9E3779B97F4A7C15ULL * (key + 1));
    return Rng(s, t);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 1;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

// i.i.d. N(mean, std^2) samples; std = 0 degenerates to the constant mean.
template <typename T>
Matrix<T> gaussian(Rng& rng, double mean, double stddev, std::size_t rows, std::size_t cols) {
  if (stddev < 0.0) throw std::invalid_argument("gaussian: negative stddev");
  Matrix<T> m(rows, cols);
  for (T& v : m.data) v = static_cast<T>(rng.normal(mean, stddev));
  return m;
}

template <typename T>
void fill_uniform(Rng& rng, Matrix<T>& m, double lo, double hi) {
  for (T& v : m.data) v = static_cast<T>(rng.uniform(lo, hi));
}

// Fisher-Yates over [0, n).
inline std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace fewgen
