#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fewgen/activations.hpp"
#include "fewgen/batchnorm.hpp"
#include "fewgen/matrix.hpp"
#include "fewgen/rng.hpp"

namespace fewgen {

enum class Activation : std::uint8_t { None = 0, LeakyRelu = 1, Sigmoid = 2, Softmax = 3 };

// Fully connected layer: Y = act(norm(X W + b)). Weight is in_dim x out_dim.
template <typename T>
struct DenseLayer {
  Matrix<T> weight;
  std::vector<T> bias;
  std::optional<BatchNorm<T>> norm;
  Activation act = Activation::None;
  T leaky_slope = T(0.2);

  std::size_t in_dim() const { return weight.rows; }
  std::size_t out_dim() const { return weight.cols; }
  std::size_t param_count() const {
    return weight.data.size() + bias.size() + (norm ? 2 * norm->width() : 0);
  }
};

template <typename T>
struct LayerCache {
  Matrix<T> input;    // X
  BnCache<T> bn;      // filled when the layer has a norm
  Matrix<T> pre_act;  // post-norm linear output (the "logits" of this layer)
  Matrix<T> output;   // post-activation
};

template <typename T>
struct Tape {
  Mode mode = Mode::Train;
  std::vector<LayerCache<T>> layers;
};

// Per-layer gradients, shapes mirroring DenseLayer.
template <typename T>
struct Grads {
  struct Layer {
    Matrix<T> weight;
    std::vector<T> bias;
    std::vector<T> gamma, beta;  // empty when the layer has no norm
  };
  std::vector<Layer> layers;
};

template <typename T>
struct Mlp {
  std::vector<DenseLayer<T>> layers;

  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.param_count();
    return n;
  }
};

// Stack description: widths[0] is the input dim, widths.back() the output.
// Hidden layers get BN + LeakyReLU; the last layer is plain linear with
// `output_act` and no norm.
template <typename T>
Mlp<T> make_mlp(const std::vector<std::size_t>& widths, Activation output_act, Rng& rng,
                T leaky_slope = T(0.2)) {
  if (widths.size() < 2) throw ShapeError("make_mlp: need at least input and output widths");
  Mlp<T> m;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer<T> layer;
    layer.weight = Matrix<T>(widths[l], widths[l + 1]);
    layer.bias.assign(widths[l + 1], T(0));
    // fan-in scaled uniform init for weights and biases
    double k = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    fill_uniform(rng, layer.weight, -k, k);
    for (T& b : layer.bias) b = static_cast<T>(rng.uniform(-k, k));
    const bool last = (l + 2 == widths.size());
    if (!last) {
      layer.norm.emplace(widths[l + 1]);
      layer.act = Activation::LeakyRelu;
      layer.leaky_slope = leaky_slope;
    } else {
      layer.act = output_act;
    }
    m.layers.push_back(std::move(layer));
  }
  return m;
}

template <typename T>
Matrix<T> apply_activation(Activation act, const Matrix<T>& z, T slope) {
  switch (act) {
    case Activation::None:
      return z;
    case Activation::LeakyRelu:
      return leaky_relu(z, slope);
    case Activation::Sigmoid:
      return sigmoid(z);
    case Activation::Softmax:
      return softmax_rows(z);
  }
  throw std::invalid_argument("unknown activation");
}

// Forward pass. Train mode updates BN running statistics; eval mode leaves
// the network untouched. Pass a tape to enable a later backward.
template <typename T>
Matrix<T> mlp_forward(Mlp<T>& m, const Matrix<T>& x, Mode mode, Tape<T>* tape = nullptr) {
  if (x.cols != m.in_dim())
    throw ShapeError("mlp_forward: input dim " + std::to_string(x.cols) + ", expected " +
                     std::to_string(m.in_dim()));
  if (tape) {
    tape->mode = mode;
    tape->layers.clear();
    tape->layers.resize(m.layers.size());
  }
  Matrix<T> cur = x;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    DenseLayer<T>& layer = m.layers[l];
    LayerCache<T>* cache = tape ? &tape->layers[l] : nullptr;
    if (cache) cache->input = cur;
    Matrix<T> z = matmul(cur, layer.weight);
    add_row_broadcast<T>(z, {layer.bias.data(), layer.bias.size()});
    if (layer.norm) z = bn_forward(*layer.norm, z, mode, cache ? &cache->bn : nullptr);
    if (cache) cache->pre_act = z;
    cur = apply_activation(layer.act, z, layer.leaky_slope);
    if (cache) cache->output = cur;
  }
  return cur;
}

// Eval-mode forward on a frozen network; no tape, no mutation.
template <typename T>
Matrix<T> mlp_infer(const Mlp<T>& m, const Matrix<T>& x) {
  return mlp_forward(const_cast<Mlp<T>&>(m), x, Mode::Eval, static_cast<Tape<T>*>(nullptr));
}

// Backward pass. `grad` is taken with respect to the LAST layer's
// pre-activation (the fused loss convention: cross-entropy losses hand back
// d/d logits, and a linear output layer's pre-activation is its output).
// Returns dL/dX; fills `grads` when non-null.
template <typename T>
Matrix<T> mlp_backward(const Mlp<T>& m, const Tape<T>& tape, Matrix<T> grad,
                       Grads<T>* grads = nullptr) {
  if (tape.layers.size() != m.layers.size())
    throw ShapeError("mlp_backward: tape does not match network");
  if (grads) grads->layers.resize(m.layers.size());
  for (std::size_t li = m.layers.size(); li-- > 0;) {
    const DenseLayer<T>& layer = m.layers[li];
    const LayerCache<T>& cache = tape.layers[li];
    const bool last = (li + 1 == m.layers.size());
    if (!last) {
      switch (layer.act) {
        case Activation::None:
          break;
        case Activation::LeakyRelu:
          grad = leaky_relu_backward(cache.pre_act, grad, layer.leaky_slope);
          break;
        case Activation::Sigmoid:
          grad = sigmoid_backward(cache.output, grad);
          break;
        case Activation::Softmax:
          grad = softmax_backward(cache.output, grad);
          break;
      }
    }
    if (layer.norm) {
      typename Grads<T>::Layer* g = grads ? &grads->layers[li] : nullptr;
      grad = bn_backward(*layer.norm, cache.bn, grad, g ? &g->gamma : nullptr,
                         g ? &g->beta : nullptr);
    }
    if (grads) {
      grads->layers[li].weight = matmul_tn(cache.input, grad);
      grads->layers[li].bias = column_sums(grad);
    }
    grad = matmul_nt(grad, layer.weight);
  }
  return grad;
}

}  // namespace fewgen
