#pragma once

#include <cstdint>
#include <vector>

#include "fewgen/adam.hpp"
#include "fewgen/mlp.hpp"
#include "fewgen/rng.hpp"

namespace fewgen {

// Layer widths for the three networks. The defaults are the 512-dim
// configuration; every width is overridable (the synthetic benchmark runs
// much narrower stacks).
struct ModelDims {
  std::size_t d_visual = 512;
  std::size_t d_semantic = 512;
  std::size_t c_train = 64;
  std::vector<std::size_t> gen_hidden = {1024, 1024};
  std::vector<std::size_t> disc_hidden = {512, 256, 128};
  std::vector<std::size_t> cls_hidden = {512, 256};
  // Literal-reproduction switch: per-class sigmoid scores instead of a
  // softmax distribution on the classifier output.
  bool classifier_sigmoid_output = false;
  float leaky_slope = 0.2f;
};

template <typename T>
struct ModelBundle {
  ModelDims dims;
  Mlp<T> generator;      // d_semantic -> ... -> d_visual, linear output
  Mlp<T> discriminator;  // d_visual -> ... -> 1, sigmoid output
  Mlp<T> classifier;     // d_visual -> ... -> c_train, softmax output
  AdamState<T> gen_opt, disc_opt, cls_opt;
};

namespace detail {
inline std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden,
                                      std::size_t out) {
  std::vector<std::size_t> w;
  w.push_back(in);
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}
}  // namespace detail

template <typename T>
ModelBundle<T> init_models(const ModelDims& dims, Rng& rng) {
  if (dims.d_visual < 1 || dims.d_semantic < 1 || dims.c_train < 1)
    throw ShapeError("init_models: all dims must be >= 1");
  ModelBundle<T> b;
  b.dims = dims;
  const T slope = T(dims.leaky_slope);
  Rng gen_rng = rng.split(0), disc_rng = rng.split(1), cls_rng = rng.split(2);
  b.generator = make_mlp<T>(detail::chain(dims.d_semantic, dims.gen_hidden, dims.d_visual),
                            Activation::None, gen_rng, slope);
  b.discriminator = make_mlp<T>(detail::chain(dims.d_visual, dims.disc_hidden, 1),
                                Activation::Sigmoid, disc_rng, slope);
  b.classifier = make_mlp<T>(
      detail::chain(dims.d_visual, dims.cls_hidden, dims.c_train),
      dims.classifier_sigmoid_output ? Activation::Sigmoid : Activation::Softmax, cls_rng, slope);
  b.gen_opt = adam_init(b.generator);
  b.disc_opt = adam_init(b.discriminator);
  b.cls_opt = adam_init(b.classifier);
  return b;
}

template <typename T>
Matrix<T> generator_forward(ModelBundle<T>& b, const Matrix<T>& s, Mode mode,
                            Tape<T>* tape = nullptr) {
  return mlp_forward(b.generator, s, mode, tape);
}

template <typename T>
Matrix<T> discriminator_forward(ModelBundle<T>& b, const Matrix<T>& x, Mode mode,
                                Tape<T>* tape = nullptr) {
  return mlp_forward(b.discriminator, x, mode, tape);
}

template <typename T>
Matrix<T> classifier_forward(ModelBundle<T>& b, const Matrix<T>& x, Mode mode,
                             Tape<T>* tape = nullptr) {
  return mlp_forward(b.classifier, x, mode, tape);
}

}  // namespace fewgen
