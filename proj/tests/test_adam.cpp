#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fewgen/adam.hpp"
#include "helpers.hpp"

using namespace fewgen;

namespace {

Mlp<float> single_param_model(float w0) {
  Mlp<float> m;
  DenseLayer<float> layer;
  layer.weight = Matrix<float>(1, 1, w0);
  layer.bias.assign(1, 0.0f);
  layer.act = Activation::None;
  m.layers.push_back(std::move(layer));
  return m;
}

Grads<float> single_grad(float g) {
  Grads<float> grads;
  grads.layers.resize(1);
  grads.layers[0].weight = Matrix<float>(1, 1, g);
  grads.layers[0].bias.assign(1, 0.0f);
  return grads;
}

}  // namespace

TEST_CASE("adam first step moves by ~lr") {
  Mlp<float> m = single_param_model(0.0f);
  AdamState<float> s = adam_init(m);
  adam_step(m, single_grad(1.0f), s, 1e-4f);
  // bias-corrected: m_hat = g, v_hat = g^2 => step = lr / (1 + eps)
  CHECK(m.layers[0].weight(0, 0) == Catch::Approx(-1e-4).margin(1e-9));
  CHECK(s.step == 1);
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  Mlp<float> m = single_param_model(0.7f);
  AdamState<float> s = adam_init(m);
  for (int t = 0; t < 10; ++t) adam_step(m, single_grad(0.0f), s, 1e-2f);
  CHECK(m.layers[0].weight(0, 0) == 0.7f);
  CHECK(s.step == 10);
}

TEST_CASE("adam runs are deterministic") {
  auto run = [] {
    Mlp<float> m = single_param_model(0.25f);
    AdamState<float> s = adam_init(m);
    for (int t = 1; t <= 20; ++t) adam_step(m, single_grad(0.1f * t), s, 3e-3f);
    return m.layers[0].weight(0, 0);
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects non-finite gradients and names the block") {
  Mlp<float> m = single_param_model(0.0f);
  AdamState<float> s = adam_init(m);
  Grads<float> g = single_grad(std::numeric_limits<float>::quiet_NaN());
  CHECK_THROWS_MATCHES(adam_step(m, g, s, 1e-4f, "generator"), NumericError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("generator.layer0.weight")));
}

TEST_CASE("adam step counter increments by one per call") {
  Mlp<float> m = single_param_model(0.0f);
  AdamState<float> s = adam_init(m);
  for (std::uint64_t t = 1; t <= 5; ++t) {
    adam_step(m, single_grad(0.5f), s, 1e-3f);
    CHECK(s.step == t);
  }
}
