#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fewgen/errors.hpp"
#include "fewgen/matrix.hpp"

namespace fewgen {

// Top-2 principal directions via power iteration with deflation on the
// sample covariance. Deterministic: fixed start vectors, sign fixed by the
// largest-magnitude component.
struct Pca2 {
  std::vector<double> mean;
  std::vector<double> pc1, pc2;
  double eigval1 = 0.0, eigval2 = 0.0;
};

namespace detail {

inline std::vector<double> matvec(const Matrix<double>& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row_ptr(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

inline void fix_sign(std::vector<double>& v) {
  double best = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best) {
      best = std::abs(v[i]);
      arg = i;
    }
  }
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
}

inline std::pair<std::vector<double>, double> power_iterate(const Matrix<double>& cov, double tol,
                                                            int max_iter) {
  const std::size_t d = cov.rows;
  // start at the column of largest diagonal entry; fall back to e0
  std::size_t start = 0;
  for (std::size_t j = 1; j < d; ++j)
    if (cov(j, j) > cov(start, start)) start = j;
  std::vector<double> v(d, 0.0);
  v[start] = 1.0;
  double eig = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<double> w = matvec(cov, v);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-300) {
      // null matrix: any unit vector is an eigenvector with eigenvalue 0
      return {v, 0.0};
    }
    for (double& x : w) x /= norm;
    // align sign to avoid oscillating between v and -v
    double align = 0.0;
    for (std::size_t j = 0; j < d; ++j) align += w[j] * v[j];
    if (align < 0.0)
      for (double& x : w) x = -x;
    double delta = 0.0;
    for (std::size_t j = 0; j < d; ++j) delta = std::max(delta, std::abs(w[j] - v[j]));
    v = std::move(w);
    eig = norm;
    if (delta < tol) break;
  }
  // Rayleigh quotient for the final eigenvalue
  std::vector<double> cv = matvec(cov, v);
  eig = 0.0;
  for (std::size_t j = 0; j < d; ++j) eig += v[j] * cv[j];
  return {v, eig};
}

}  // namespace detail

inline Pca2 fit_pca2(const Matrix<double>& points, double tol = 1e-9, int max_iter = 1000) {
  if (points.rows < 3) throw DataError("fit_pca2: need at least 3 points");
  const std::size_t n = points.rows, d = points.cols;
  Pca2 out;
  out.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += points(i, j);
  for (double& m : out.mean) m /= static_cast<double>(n);

  Matrix<double> cov(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = points(i, a) - out.mean[a];
      double* row = cov.row_ptr(a);
      for (std::size_t b = 0; b < d; ++b) row[b] += ca * (points(i, b) - out.mean[b]);
    }
  }
  for (double& v : cov.data) v /= static_cast<double>(n - 1);

  auto [v1, e1] = detail::power_iterate(cov, tol, max_iter);
  detail::fix_sign(v1);
  out.pc1 = v1;
  out.eigval1 = e1;

  // deflate: cov2 = cov - e1 * v1 v1^T
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) cov(a, b) -= e1 * v1[a] * v1[b];
  auto [v2, e2] = detail::power_iterate(cov, tol, max_iter);
  // enforce orthogonality against pc1 (exact for symmetric deflation up to roundoff)
  double proj = 0.0;
  for (std::size_t j = 0; j < d; ++j) proj += v2[j] * v1[j];
  for (std::size_t j = 0; j < d; ++j) v2[j] -= proj * v1[j];
  double norm = 0.0;
  for (double x : v2) norm += x * x;
  norm = std::sqrt(norm);
  // v2 was unit length; if removing the pc1 component leaves only roundoff,
  // the deflated matrix had no genuine second direction (rank-1 data)
  if (norm < 1e-6) {
    // rank-1 data: pick the axis least aligned with pc1 and orthogonalize
    std::size_t arg = 0;
    double best = 2.0;
    for (std::size_t j = 0; j < d; ++j)
      if (std::abs(v1[j]) < best) {
        best = std::abs(v1[j]);
        arg = j;
      }
    v2.assign(d, 0.0);
    v2[arg] = 1.0;
    proj = v1[arg];
    for (std::size_t j = 0; j < d; ++j) v2[j] -= proj * v1[j];
    norm = 0.0;
    for (double x : v2) norm += x * x;
    norm = std::sqrt(norm);
    e2 = 0.0;
  }
  for (double& x : v2) x /= norm;
  detail::fix_sign(v2);
  out.pc2 = v2;
  out.eigval2 = e2;
  return out;
}

inline std::pair<double, double> pca_project(const Pca2& p, std::span<const double> point) {
  if (point.size() != p.mean.size()) throw ShapeError("pca_project: dimension mismatch");
  double x = 0.0, y = 0.0;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const double c = point[j] - p.mean[j];
    x += c * p.pc1[j];
    y += c * p.pc2[j];
  }
  return {x, y};
}

}  // namespace fewgen
