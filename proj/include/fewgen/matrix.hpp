#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fewgen/errors.hpp"

namespace fewgen {

// Dense row-major matrix over a floating scalar. Training runs in float;
// gradient checking instantiates the same code in double.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  T* row_ptr(std::size_t r) { return data.data() + r * cols; }
  const T* row_ptr(std::size_t r) const { return data.data() + r * cols; }

  std::span<T> row(std::size_t r) { return {row_ptr(r), cols}; }
  std::span<const T> row(std::size_t r) const { return {row_ptr(r), cols}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

namespace detail {
inline std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}
}  // namespace detail

// C = A * B. Accumulation order over k is ascending for every output entry,
// matching the naive triple loop bit for bit.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols != b.rows)
    throw ShapeError("matmul: inner dimensions disagree: " + detail::shape_str(a.rows, a.cols) +
                     " x " + detail::shape_str(b.rows, b.cols));
  Matrix<T> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const T* arow = a.row_ptr(i);
    T* crow = c.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const T aik = arow[k];
      const T* brow = b.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A * B^T. Rows of both operands are read contiguously.
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols != b.cols)
    throw ShapeError("matmul_nt: inner dimensions disagree: " + detail::shape_str(a.rows, a.cols) +
                     " x " + detail::shape_str(b.cols, b.rows));
  Matrix<T> c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const T* arow = a.row_ptr(i);
    T* crow = c.row_ptr(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const T* brow = b.row_ptr(j);
      T acc = T(0);
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

// C = A^T * B.
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows != b.rows)
    throw ShapeError("matmul_tn: inner dimensions disagree: " + detail::shape_str(a.cols, a.rows) +
                     " x " + detail::shape_str(b.rows, b.cols));
  Matrix<T> c(a.cols, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const T* arow = a.row_ptr(i);
    const T* brow = b.row_ptr(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const T aik = arow[k];
      T* crow = c.row_ptr(k);
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

// y[i][j] += b[j]
template <typename T>
void add_row_broadcast(Matrix<T>& y, std::span<const T> b) {
  if (y.cols != b.size())
    throw ShapeError("add_row_broadcast: " + std::to_string(b.size()) + " vs " +
                     detail::shape_str(y.rows, y.cols));
  for (std::size_t i = 0; i < y.rows; ++i) {
    T* row = y.row_ptr(i);
    for (std::size_t j = 0; j < y.cols; ++j) row[j] += b[j];
  }
}

template <typename T>
std::vector<T> column_sums(const Matrix<T>& a) {
  std::vector<T> s(a.cols, T(0));
  for (std::size_t i = 0; i < a.rows; ++i) {
    const T* row = a.row_ptr(i);
    for (std::size_t j = 0; j < a.cols; ++j) s[j] += row[j];
  }
  return s;
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("add: shape mismatch: " + detail::shape_str(a.rows, a.cols) + " vs " +
                     detail::shape_str(b.rows, b.cols));
  Matrix<T> c = a;
  for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
  return c;
}

template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b) {
  if (!a.same_shape(b))
    throw ShapeError("add_inplace: shape mismatch: " + detail::shape_str(a.rows, a.cols) + " vs " +
                     detail::shape_str(b.rows, b.cols));
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

template <typename T>
Matrix<T> scale(const Matrix<T>& a, T s) {
  Matrix<T> c = a;
  for (T& v : c.data) v *= s;
  return c;
}

// Casts entry-wise between scalar types (float <-> double).
template <typename To, typename From>
Matrix<To> matrix_cast(const Matrix<From>& a) {
  Matrix<To> c(a.rows, a.cols);
  for (std::size_t i = 0; i < a.data.size(); ++i) c.data[i] = static_cast<To>(a.data[i]);
  return c;
}

}  // namespace fewgen
