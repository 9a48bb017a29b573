#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fewgen/errors.hpp"
#include "fewgen/mlp.hpp"

namespace fewgen {

// Bias-corrected Adam. One moment block per layer, covering that layer's
// parameters in the order [weight | bias | gamma | beta].
template <typename T>
struct AdamState {
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m, v;
};

template <typename T>
AdamState<T> adam_init(const Mlp<T>& model) {
  AdamState<T> s;
  s.m.resize(model.layers.size());
  s.v.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    s.m[l].assign(model.layers[l].param_count(), T(0));
    s.v[l].assign(model.layers[l].param_count(), T(0));
  }
  return s;
}

namespace detail {
template <typename T>
void adam_apply(T* params, const T* grads, T* m, T* v, std::size_t n, const AdamState<T>& s, T lr,
                T bc1, T bc2, const std::string& block) {
  for (std::size_t i = 0; i < n; ++i) {
    T g = grads[i];
    if (!std::isfinite(g))
      throw NumericError("adam_step: non-finite gradient in " + block + "[" + std::to_string(i) +
                         "]");
    m[i] = s.beta1 * m[i] + (T(1) - s.beta1) * g;
    v[i] = s.beta2 * v[i] + (T(1) - s.beta2) * g * g;
    T mhat = m[i] / bc1;
    T vhat = v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}
}  // namespace detail

template <typename T>
void adam_step(Mlp<T>& model, const Grads<T>& grads, AdamState<T>& state, T lr,
               const std::string& model_name = "model") {
  if (grads.layers.size() != model.layers.size())
    throw ShapeError("adam_step: gradient layer count mismatch");
  state.step += 1;
  const T bc1 = T(1) - std::pow(state.beta1, T(state.step));
  const T bc2 = T(1) - std::pow(state.beta2, T(state.step));
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    DenseLayer<T>& layer = model.layers[l];
    const auto& g = grads.layers[l];
    if (g.weight.data.size() != layer.weight.data.size() || g.bias.size() != layer.bias.size())
      throw ShapeError("adam_step: gradient shape mismatch at " + model_name + ".layer" +
                       std::to_string(l));
    std::vector<T>& m = state.m[l];
    std::vector<T>& v = state.v[l];
    std::size_t off = 0;
    const std::string prefix = model_name + ".layer" + std::to_string(l);
    detail::adam_apply(layer.weight.data.data(), g.weight.data.data(), m.data() + off,
                       v.data() + off, layer.weight.data.size(), state, lr, bc1, bc2,
                       prefix + ".weight");
    off += layer.weight.data.size();
    detail::adam_apply(layer.bias.data(), g.bias.data(), m.data() + off, v.data() + off,
                       layer.bias.size(), state, lr, bc1, bc2, prefix + ".bias");
    off += layer.bias.size();
    if (layer.norm) {
      if (g.gamma.size() != layer.norm->width() || g.beta.size() != layer.norm->width())
        throw ShapeError("adam_step: norm gradient shape mismatch at " + prefix);
      detail::adam_apply(layer.norm->gamma.data(), g.gamma.data(), m.data() + off, v.data() + off,
                         g.gamma.size(), state, lr, bc1, bc2, prefix + ".gamma");
      off += g.gamma.size();
      detail::adam_apply(layer.norm->beta.data(), g.beta.data(), m.data() + off, v.data() + off,
                         g.beta.size(), state, lr, bc1, bc2, prefix + ".beta");
    }
  }
}

}  // namespace fewgen
