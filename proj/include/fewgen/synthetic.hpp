#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fewgen/dataset.hpp"
#include "fewgen/rng.hpp"
#include "fewgen/vec.hpp"

namespace fewgen {

// Desk-scale synthetic benchmark. Class means are unit-norm gaussians,
// features are mean + sigma * noise, and semantics are a fixed seeded
// rotation-like image of the mean plus small noise, so class identity is
// recoverable from the semantic vector alone.
struct SyntheticSpec {
  std::uint32_t train_classes = 20;
  std::uint32_t test_classes = 10;
  std::uint32_t per_class = 200;
  std::uint32_t d_visual = 64;
  std::uint32_t d_semantic = 64;
  float sigma = 0.35f;
  std::uint64_t semantic_map_seed = 1234;
  float semantic_noise = 0.05f;

  void validate() const {
    if (train_classes < 1 || test_classes < 1 || per_class < 1 || d_visual < 1 || d_semantic < 1)
      throw std::invalid_argument("synthetic spec: all counts must be >= 1");
    if (sigma < 0.0f) throw std::invalid_argument("synthetic spec: sigma must be >= 0");
    if (semantic_noise < 0.0f)
      throw std::invalid_argument("synthetic spec: semantic noise must be >= 0");
  }
};

struct SyntheticData {
  FeatureTable train, test;
  SemanticTable train_semantics, test_semantics;
  EmbeddingTable train_means, test_means;  // ground-truth class means
};

namespace detail {

// Rows of a seeded gaussian matrix, orthonormalized by modified Gram-Schmidt.
// For d_semantic <= d_visual this is a semi-orthogonal (rotation-like) map;
// rows beyond the rank are only normalized.
inline std::vector<std::vector<double>> semantic_map(std::uint32_t d_semantic,
                                                     std::uint32_t d_visual, std::uint64_t seed) {
  Rng rng(seed, 77);
  std::vector<std::vector<double>> q(d_semantic, std::vector<double>(d_visual));
  for (auto& row : q)
    for (double& v : row) v = rng.normal();
  for (std::uint32_t i = 0; i < d_semantic; ++i) {
    for (std::uint32_t p = 0; p < std::min(i, d_visual); ++p) {
      double proj = 0.0;
      for (std::uint32_t j = 0; j < d_visual; ++j) proj += q[i][j] * q[p][j];
      for (std::uint32_t j = 0; j < d_visual; ++j) q[i][j] -= proj * q[p][j];
    }
    double norm = 0.0;
    for (double v : q[i]) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (double& v : q[i]) v /= norm;
  }
  return q;
}

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  const std::uint32_t total = spec.train_classes + spec.test_classes;
  const auto q = detail::semantic_map(spec.d_semantic, spec.d_visual, spec.semantic_map_seed);

  // All class means first, train classes then test classes.
  Rng mean_rng = rng.split(0);
  std::vector<std::vector<float>> means(total);
  for (std::uint32_t c = 0; c < total; ++c) {
    std::vector<double> mu(spec.d_visual);
    double norm = 0.0;
    for (double& v : mu) {
      v = mean_rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    means[c].resize(spec.d_visual);
    for (std::uint32_t j = 0; j < spec.d_visual; ++j)
      means[c][j] = static_cast<float>(mu[j] / norm);
  }

  Rng sem_rng = rng.split(1);
  auto make_semantic = [&](const std::vector<float>& mu) {
    std::vector<float> s(spec.d_semantic);
    for (std::uint32_t i = 0; i < spec.d_semantic; ++i) {
      double acc = 0.0;
      for (std::uint32_t j = 0; j < spec.d_visual; ++j) acc += q[i][j] * mu[j];
      s[i] = static_cast<float>(acc + sem_rng.normal(0.0, spec.semantic_noise));
    }
    return s;
  };

  Rng feat_rng = rng.split(2);
  auto fill_split = [&](std::uint32_t first_class, std::uint32_t n_classes, FeatureTable& table,
                        SemanticTable& sem, EmbeddingTable& gt) {
    table.dim = spec.d_visual;
    sem.dim = spec.d_semantic;
    gt.dim = spec.d_visual;
    sem.vectors.assign(n_classes, {});
    gt.vectors.assign(n_classes, {});
    std::vector<float> f(spec.d_visual);
    for (std::uint32_t c = 0; c < n_classes; ++c) {
      const auto& mu = means[first_class + c];
      gt.vectors[c] = mu;
      sem.vectors[c] = make_semantic(mu);
      for (std::uint32_t i = 0; i < spec.per_class; ++i) {
        for (std::uint32_t j = 0; j < spec.d_visual; ++j)
          f[j] = mu[j] + static_cast<float>(feat_rng.normal(0.0, spec.sigma));
        table.add(c, f);
      }
    }
    table.rebuild_index();
  };

  SyntheticData out;
  fill_split(0, spec.train_classes, out.train, out.train_semantics, out.train_means);
  fill_split(spec.train_classes, spec.test_classes, out.test, out.test_semantics, out.test_means);
  return out;
}

}  // namespace fewgen
