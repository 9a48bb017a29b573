#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fewgen/errors.hpp"
#include "fewgen/matrix.hpp"

namespace fewgen {

enum class Mode { Train, Eval };

// Per-column batch normalization with learnable scale/shift and running
// statistics. Train mode normalizes by the batch mean and population
// variance and folds them into the running stats by exponential moving
// average; eval mode normalizes by the running stats only.
template <typename T>
struct BatchNorm {
  std::vector<T> gamma, beta;
  std::vector<T> running_mean, running_var;
  T eps = T(1e-5);
  T momentum = T(0.1);

  BatchNorm() = default;
  explicit BatchNorm(std::size_t width)
      : gamma(width, T(1)), beta(width, T(0)), running_mean(width, T(0)), running_var(width, T(1)) {}

  std::size_t width() const { return gamma.size(); }
};

// Forward cache consumed by bn_backward.
template <typename T>
struct BnCache {
  Mode mode = Mode::Train;
  std::vector<T> inv_std;  // 1/sqrt(var + eps) actually used
  Matrix<T> xhat;          // normalized pre-scale input
};

template <typename T>
Matrix<T> bn_forward(BatchNorm<T>& bn, const Matrix<T>& x, Mode mode, BnCache<T>* cache = nullptr) {
  const std::size_t d = bn.width();
  if (x.cols != d)
    throw ShapeError("batchnorm: input has " + std::to_string(x.cols) + " columns, layer has " +
                     std::to_string(d));
  const std::size_t n = x.rows;
  Matrix<T> y(n, d);
  std::vector<T> mean(d), inv_std(d);

  if (mode == Mode::Train) {
    if (n < 2) throw DataError("batchnorm: train mode needs batch >= 2, got " + std::to_string(n));
    std::vector<T> var(d, T(0));
    for (std::size_t j = 0; j < d; ++j) mean[j] = T(0);
    for (std::size_t i = 0; i < n; ++i) {
      const T* row = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= T(n);
    for (std::size_t i = 0; i < n; ++i) {
      const T* row = x.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) {
        T c = row[j] - mean[j];
        var[j] += c * c;
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      var[j] /= T(n);
      inv_std[j] = T(1) / std::sqrt(var[j] + bn.eps);
      bn.running_mean[j] = (T(1) - bn.momentum) * bn.running_mean[j] + bn.momentum * mean[j];
      bn.running_var[j] = (T(1) - bn.momentum) * bn.running_var[j] + bn.momentum * var[j];
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] = bn.running_mean[j];
      inv_std[j] = T(1) / std::sqrt(bn.running_var[j] + bn.eps);
    }
  }

  Matrix<T> xhat(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = x.row_ptr(i);
    T* xh = xhat.row_ptr(i);
    T* yr = y.row_ptr(i);
    for (std::size_t j = 0; j < d; ++j) {
      xh[j] = (row[j] - mean[j]) * inv_std[j];
      yr[j] = bn.gamma[j] * xh[j] + bn.beta[j];
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->inv_std = std::move(inv_std);
    cache->xhat = std::move(xhat);
  }
  return y;
}

// Backward through the normalization. Train mode accounts for the batch
// statistics' dependence on the input; eval mode is the affine map's
// gradient. dgamma/dbeta may be null when parameter gradients are unwanted.
template <typename T>
Matrix<T> bn_backward(const BatchNorm<T>& bn, const BnCache<T>& cache, const Matrix<T>& dy,
                      std::vector<T>* dgamma = nullptr, std::vector<T>* dbeta = nullptr) {
  const std::size_t n = dy.rows, d = dy.cols;
  if (dgamma) dgamma->assign(d, T(0));
  if (dbeta) dbeta->assign(d, T(0));
  if (dgamma || dbeta) {
    for (std::size_t i = 0; i < n; ++i) {
      const T* dyr = dy.row_ptr(i);
      const T* xh = cache.xhat.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) {
        if (dgamma) (*dgamma)[j] += dyr[j] * xh[j];
        if (dbeta) (*dbeta)[j] += dyr[j];
      }
    }
  }

  Matrix<T> dx(n, d);
  if (cache.mode == Mode::Eval) {
    for (std::size_t i = 0; i < n; ++i) {
      const T* dyr = dy.row_ptr(i);
      T* dxr = dx.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) dxr[j] = dyr[j] * bn.gamma[j] * cache.inv_std[j];
    }
    return dx;
  }

  // dxhat = dy * gamma
  // dx = inv_std/n * (n*dxhat - sum(dxhat) - xhat * sum(dxhat*xhat))   per column
  std::vector<T> sum_dxhat(d, T(0)), sum_dxhat_xhat(d, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const T* dyr = dy.row_ptr(i);
    const T* xh = cache.xhat.row_ptr(i);
    for (std::size_t j = 0; j < d; ++j) {
      T dxh = dyr[j] * bn.gamma[j];
      sum_dxhat[j] += dxh;
      sum_dxhat_xhat[j] += dxh * xh[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const T* dyr = dy.row_ptr(i);
    const T* xh = cache.xhat.row_ptr(i);
    T* dxr = dx.row_ptr(i);
    for (std::size_t j = 0; j < d; ++j) {
      T dxh = dyr[j] * bn.gamma[j];
      dxr[j] = cache.inv_std[j] / T(n) * (T(n) * dxh - sum_dxhat[j] - xh[j] * sum_dxhat_xhat[j]);
    }
  }
  return dx;
}

}  // namespace fewgen
