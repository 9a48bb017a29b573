#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fewgen/errors.hpp"

namespace fewgen {

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
T l2_norm(std::span<const T> a) {
  return std::sqrt(dot(a, a));
}

template <typename T>
std::vector<T> l2_normalized(std::span<const T> a) {
  T n = l2_norm(a);
  if (n == T(0)) throw DataError("l2_normalized: zero-norm vector");
  std::vector<T> out(a.begin(), a.end());
  for (T& v : out) v /= n;
  return out;
}

// 1 - cos(a, b), with the norm product guarded from below by eps.
template <typename T>
T cosine_distance(std::span<const T> a, std::span<const T> b, T eps = T(1e-8)) {
  T denom = l2_norm(a) * l2_norm(b);
  if (denom < eps) denom = eps;
  return T(1) - dot(a, b) / denom;
}

}  // namespace fewgen
