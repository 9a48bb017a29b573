#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fewgen/errors.hpp"
#include "fewgen/rng.hpp"
#include "fewgen/vec.hpp"

namespace fewgen {

enum class InputMode { Textual, Visual, Blend };

inline InputMode parse_input_mode(const std::string& s) {
  if (s == "textual") return InputMode::Textual;
  if (s == "visual") return InputMode::Visual;
  if (s == "blend") return InputMode::Blend;
  throw std::invalid_argument("unknown input mode '" + s + "' (textual|visual|blend)");
}

inline const char* input_mode_name(InputMode m) {
  switch (m) {
    case InputMode::Textual: return "textual";
    case InputMode::Visual: return "visual";
    case InputMode::Blend: return "blend";
  }
  return "?";
}

inline constexpr double kVisualNoiseMean = 0.1;
inline constexpr double kVisualNoiseVar = 0.28;

// x plus i.i.d. N(0.1, 0.28) noise per component (std = sqrt(0.28)).
inline std::vector<float> make_visual_input(std::span<const float> x, Rng& rng) {
  const double stddev = std::sqrt(kVisualNoiseVar);
  std::vector<float> out(x.begin(), x.end());
  for (float& v : out) v += static_cast<float>(rng.normal(kVisualNoiseMean, stddev));
  return out;
}

// alpha * s_hat + (1 - alpha) * v_hat over L2-normalized copies.
inline std::vector<float> blend_inputs(std::span<const float> s, std::span<const float> v,
                                       float alpha) {
  if (!(alpha >= 0.0f && alpha <= 1.0f))
    throw std::invalid_argument("blend_inputs: alpha must be in [0, 1]");
  if (s.size() != v.size())
    throw ShapeError("blend_inputs: semantic dim " + std::to_string(s.size()) +
                     " vs visual dim " + std::to_string(v.size()));
  std::vector<float> sh = l2_normalized(s);
  std::vector<float> vh = l2_normalized(v);
  std::vector<float> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = alpha * sh[j] + (1.0f - alpha) * vh[j];
  return out;
}

// Generator input for one sample under the configured mode:
//   textual: normalized class semantic (the blend at alpha = 1)
//   visual:  raw feature + noise
//   blend:   alpha-weighted combination of the normalized pair
inline std::vector<float> build_generator_input(InputMode mode, float alpha,
                                                std::span<const float> semantic,
                                                std::span<const float> visual, Rng& rng) {
  switch (mode) {
    case InputMode::Textual:
      return l2_normalized(semantic);
    case InputMode::Visual:
      return make_visual_input(visual, rng);
    case InputMode::Blend:
      return blend_inputs(semantic, make_visual_input(visual, rng), alpha);
  }
  throw std::invalid_argument("unknown input mode");
}

}  // namespace fewgen
