#pragma once

#include <cmath>
#include <stdexcept>

#include "fewgen/matrix.hpp"

namespace fewgen {

// max(x, slope*x) elementwise; slope must lie in (0, 1).
template <typename T>
Matrix<T> leaky_relu(const Matrix<T>& x, T slope) {
  if (!(slope > T(0) && slope < T(1)))
    throw std::invalid_argument("leaky_relu: slope must be in (0, 1)");
  Matrix<T> y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    T v = x.data[i];
    y.data[i] = v > T(0) ? v : slope * v;
  }
  return y;
}

// dL/dx given dL/dy; the kink at 0 takes the slope branch.
template <typename T>
Matrix<T> leaky_relu_backward(const Matrix<T>& x, const Matrix<T>& dy, T slope) {
  Matrix<T> dx(x.rows, x.cols);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    dx.data[i] = x.data[i] > T(0) ? dy.data[i] : slope * dy.data[i];
  return dx;
}

template <typename T>
T sigmoid_scalar(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
Matrix<T> sigmoid(const Matrix<T>& z) {
  Matrix<T> y(z.rows, z.cols);
  for (std::size_t i = 0; i < z.data.size(); ++i) y.data[i] = sigmoid_scalar(z.data[i]);
  return y;
}

// dL/dz from dL/dy using the forward output y.
template <typename T>
Matrix<T> sigmoid_backward(const Matrix<T>& y, const Matrix<T>& dy) {
  Matrix<T> dz(y.rows, y.cols);
  for (std::size_t i = 0; i < y.data.size(); ++i)
    dz.data[i] = dy.data[i] * y.data[i] * (T(1) - y.data[i]);
  return dz;
}

// Row-wise softmax, max-shifted for stability.
template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& z) {
  Matrix<T> y(z.rows, z.cols);
  for (std::size_t i = 0; i < z.rows; ++i) {
    const T* zin = z.row_ptr(i);
    T* yout = y.row_ptr(i);
    T mx = zin[0];
    for (std::size_t j = 1; j < z.cols; ++j) mx = std::max(mx, zin[j]);
    T sum = T(0);
    for (std::size_t j = 0; j < z.cols; ++j) {
      yout[j] = std::exp(zin[j] - mx);
      sum += yout[j];
    }
    for (std::size_t j = 0; j < z.cols; ++j) yout[j] /= sum;
  }
  return y;
}

// General softmax backward: dz_j = y_j * (dy_j - sum_k dy_k y_k) per row.
// Training uses the fused cross-entropy form instead; this covers callers
// that differentiate through softmax outputs directly.
template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& y, const Matrix<T>& dy) {
  Matrix<T> dz(y.rows, y.cols);
  for (std::size_t i = 0; i < y.rows; ++i) {
    const T* yr = y.row_ptr(i);
    const T* dyr = dy.row_ptr(i);
    T inner = T(0);
    for (std::size_t j = 0; j < y.cols; ++j) inner += dyr[j] * yr[j];
    T* dzr = dz.row_ptr(i);
    for (std::size_t j = 0; j < y.cols; ++j) dzr[j] = yr[j] * (dyr[j] - inner);
  }
  return dz;
}

}  // namespace fewgen
