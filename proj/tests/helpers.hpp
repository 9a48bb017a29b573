#pragma once

// Shared fixtures for the test suites: parameter flattening for
// finite-difference checks and small random-model builders.

#include <vector>

#include "fewgen/fewgen.hpp"

namespace fewgen::testing {

inline std::vector<double> flatten_params(const Mlp<double>& m) {
  std::vector<double> flat;
  for (const auto& layer : m.layers) {
    flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    if (layer.norm) {
      flat.insert(flat.end(), layer.norm->gamma.begin(), layer.norm->gamma.end());
      flat.insert(flat.end(), layer.norm->beta.begin(), layer.norm->beta.end());
    }
  }
  return flat;
}

inline void set_params(Mlp<double>& m, const std::vector<double>& flat) {
  std::size_t off = 0;
  for (auto& layer : m.layers) {
    for (double& w : layer.weight.data) w = flat[off++];
    for (double& b : layer.bias) b = flat[off++];
    if (layer.norm) {
      for (double& g : layer.norm->gamma) g = flat[off++];
      for (double& b : layer.norm->beta) b = flat[off++];
    }
  }
}

inline std::vector<double> flatten_grads(const Grads<double>& g) {
  std::vector<double> flat;
  for (const auto& layer : g.layers) {
    flat.insert(flat.end(), layer.weight.data.begin(), layer.weight.data.end());
    flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    flat.insert(flat.end(), layer.gamma.begin(), layer.gamma.end());
    flat.insert(flat.end(), layer.beta.begin(), layer.beta.end());
  }
  return flat;
}

// Smallest |pre-activation| feeding a LeakyReLU; finite differences are only
// trustworthy when every such value sits clear of the kink.
inline double min_leaky_preact(const Mlp<double>& m, const Tape<double>& tape) {
  double best = 1e300;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    if (m.layers[l].act != Activation::LeakyRelu) continue;
    for (double v : tape.layers[l].pre_act.data) best = std::min(best, std::abs(v));
  }
  return best;
}

// Scalar probe: sum of w (fixed) times the op output, a generic way to turn
// a matrix-valued op into a differentiable scalar.
inline double weighted_sum(const Matrix<double>& w, const Matrix<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.data.size(); ++i) acc += w.data[i] * y.data[i];
  return acc;
}

inline Matrix<double> random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix<double> m(r, c);
  for (double& v : m.data) v = scale * rng.normal();
  return m;
}

}  // namespace fewgen::testing
