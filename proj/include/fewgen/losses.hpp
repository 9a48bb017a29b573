#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fewgen/errors.hpp"
#include "fewgen/matrix.hpp"
#include "fewgen/vec.hpp"

namespace fewgen {

template <typename T>
struct LossValue {
  T value = T(0);
  Matrix<T> grad;
};

// Probabilities are clamped into [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

template <typename T>
Matrix<T> one_hot(const std::vector<std::uint32_t>& labels, std::size_t num_classes) {
  Matrix<T> t(labels.size(), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes)
      throw DataError("one_hot: label " + std::to_string(labels[i]) + " out of range for " +
                      std::to_string(num_classes) + " classes");
    t(i, labels[i]) = T(1);
  }
  return t;
}

namespace detail {
template <typename T>
T clamp_prob(T p) {
  const T lo = T(kProbClamp), hi = T(1) - T(kProbClamp);
  return p < lo ? lo : (p > hi ? hi : p);
}

template <typename T>
void check_one_hot(const Matrix<T>& target) {
  for (std::size_t i = 0; i < target.rows; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < target.cols; ++j) {
      T v = target(i, j);
      if (v == T(1))
        ++ones;
      else if (v != T(0))
        throw DataError("cce: target row " + std::to_string(i) + " is not one-hot");
    }
    if (ones != 1) throw DataError("cce: target row " + std::to_string(i) + " is not one-hot");
  }
}
}  // namespace detail

// Categorical cross-entropy over row-wise probability distributions.
// The gradient is the fused form with respect to pre-softmax logits:
// (P - T) / N.
template <typename T>
LossValue<T> cce(const Matrix<T>& predicted, const Matrix<T>& target) {
  if (!predicted.same_shape(target))
    throw ShapeError("cce: prediction " + detail::shape_str(predicted.rows, predicted.cols) +
                     " vs target " + detail::shape_str(target.rows, target.cols));
  detail::check_one_hot(target);
  const T n = T(predicted.rows);
  for (std::size_t i = 0; i < predicted.rows; ++i) {
    T sum = T(0);
    for (std::size_t j = 0; j < predicted.cols; ++j) sum += predicted(i, j);
    if (std::abs(sum - T(1)) > T(1e-5))
      throw DataError("cce: prediction row " + std::to_string(i) + " sums to " +
                      std::to_string(static_cast<double>(sum)));
  }
  LossValue<T> out;
  out.grad = Matrix<T>(predicted.rows, predicted.cols);
  T acc = T(0);
  for (std::size_t i = 0; i < predicted.rows; ++i) {
    for (std::size_t j = 0; j < predicted.cols; ++j) {
      if (target(i, j) == T(1)) acc += std::log(detail::clamp_prob(predicted(i, j)));
      out.grad(i, j) = (predicted(i, j) - target(i, j)) / n;
    }
  }
  out.value = -acc / n;
  return out;
}

// Binary cross-entropy over a column of probabilities with {0,1} targets.
// Gradient is with respect to pre-sigmoid logits: (P - T) / N.
template <typename T>
LossValue<T> bce(const Matrix<T>& predicted, const Matrix<T>& target) {
  if (!predicted.same_shape(target))
    throw ShapeError("bce: prediction " + detail::shape_str(predicted.rows, predicted.cols) +
                     " vs target " + detail::shape_str(target.rows, target.cols));
  const T n = T(predicted.data.size());
  LossValue<T> out;
  out.grad = Matrix<T>(predicted.rows, predicted.cols);
  T acc = T(0);
  for (std::size_t i = 0; i < predicted.data.size(); ++i) {
    const T t = target.data[i];
    if (t != T(0) && t != T(1))
      throw DataError("bce: target " + std::to_string(static_cast<double>(t)) + " not in {0,1}");
    const T p = detail::clamp_prob(predicted.data[i]);
    acc += t * std::log(p) + (T(1) - t) * std::log(T(1) - p);
    out.grad.data[i] = (predicted.data[i] - t) / n;
  }
  out.value = -acc / n;
  return out;
}

template <typename T>
LossValue<T> bce_const_target(const Matrix<T>& predicted, T target) {
  Matrix<T> t(predicted.rows, predicted.cols, target);
  return bce(predicted, t);
}

// Cosine distance loss: mean over rows of 1 - a.b / max(|a||b|, eps).
// Gradient is with respect to a.
template <typename T>
LossValue<T> cdl(const Matrix<T>& a, const Matrix<T>& b, T eps = T(1e-8)) {
  if (!a.same_shape(b))
    throw ShapeError("cdl: " + detail::shape_str(a.rows, a.cols) + " vs " +
                     detail::shape_str(b.rows, b.cols));
  if (!(eps > T(0))) throw std::invalid_argument("cdl: eps must be positive");
  const T n = T(a.rows);
  LossValue<T> out;
  out.grad = Matrix<T>(a.rows, a.cols);
  T acc = T(0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    auto ar = a.row(i);
    auto br = b.row(i);
    const T na = l2_norm(ar), nb = l2_norm(br);
    const T prod = na * nb;
    const T d = dot(ar, br);
    T* g = out.grad.row_ptr(i);
    if (prod > eps) {
      acc += T(1) - d / prod;
      const T inv = T(1) / prod;
      const T coef = d / (na * na * prod);
      for (std::size_t j = 0; j < a.cols; ++j) g[j] = -(br[j] * inv - ar[j] * coef) / n;
    } else {
      acc += T(1) - d / eps;
      for (std::size_t j = 0; j < a.cols; ++j) g[j] = -br[j] / (eps * n);
    }
  }
  out.value = acc / n;
  return out;
}

// Sum of the real and fake arms: bce(real, 1) + bce(fake, 0). Gradients are
// kept per arm, each with respect to the discriminator's pre-sigmoid logits.
template <typename T>
struct DiscriminatorLoss {
  T value = T(0);
  T real_term = T(0), fake_term = T(0);
  Matrix<T> grad_real_logits, grad_fake_logits;
};

template <typename T>
DiscriminatorLoss<T> discriminator_loss(const Matrix<T>& real_out, const Matrix<T>& fake_out) {
  LossValue<T> real = bce_const_target(real_out, T(1));
  LossValue<T> fake = bce_const_target(fake_out, T(0));
  DiscriminatorLoss<T> out;
  out.real_term = real.value;
  out.fake_term = fake.value;
  out.value = real.value + fake.value;
  out.grad_real_logits = std::move(real.grad);
  out.grad_fake_logits = std::move(fake.grad);
  return out;
}

// Per-term weights for the combined generator objective. Defaults are the
// plain unweighted sum; the ablation runner zeroes terms out through these.
template <typename T>
struct GeneratorLossWeights {
  T cdl = T(1);
  T bce = T(1);
  T cce = T(1);
};

// Combined generator objective: CDL(generated, true embedding)
// + BCE(D(generated), 1) + CCE(C(generated), labels). Component values are
// reported unweighted; `total` and the gradients carry the weights.
template <typename T>
struct GeneratorLoss {
  T total = T(0);
  T cdl_term = T(0), bce_term = T(0), cce_term = T(0);
  Matrix<T> grad_generated_cdl;  // d(cdl)/d(generated), weighted
  Matrix<T> grad_disc_logits;    // d(bce)/d(disc logits), weighted
  Matrix<T> grad_class_logits;   // d(cce)/d(class logits), weighted
};

template <typename T>
GeneratorLoss<T> generator_loss(const Matrix<T>& generated, const Matrix<T>& true_embed,
                                const Matrix<T>& disc_out, const Matrix<T>& class_out,
                                const std::vector<std::uint32_t>& labels,
                                GeneratorLossWeights<T> w = {}) {
  if (generated.rows != disc_out.rows || generated.rows != class_out.rows ||
      generated.rows != labels.size())
    throw ShapeError("generator_loss: batch sizes disagree");
  LossValue<T> dist = cdl(generated, true_embed);
  LossValue<T> adv = bce_const_target(disc_out, T(1));
  LossValue<T> cls = cce(class_out, one_hot<T>(labels, class_out.cols));

  GeneratorLoss<T> out;
  out.cdl_term = dist.value;
  out.bce_term = adv.value;
  out.cce_term = cls.value;
  out.total = w.cdl * dist.value + w.bce * adv.value + w.cce * cls.value;
  out.grad_generated_cdl = scale(dist.grad, w.cdl);
  out.grad_disc_logits = scale(adv.grad, w.bce);
  out.grad_class_logits = scale(cls.grad, w.cce);
  return out;
}

}  // namespace fewgen
