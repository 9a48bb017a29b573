#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fewgen/dataset.hpp"
#include "fewgen/format.hpp"
#include "fewgen/inputs.hpp"
#include "fewgen/models.hpp"
#include "fewgen/vec.hpp"

namespace fewgen {

// One N-way K-shot task. Support and query rows are grouped by episode class
// (class c occupies rows [c*shot, (c+1)*shot) and [c*query, (c+1)*query)).
struct Episode {
  std::uint32_t way = 0, shot = 0, query = 0;
  std::vector<std::uint32_t> class_ids;  // original labels, one per episode class
  Matrix<float> support;
  Matrix<float> queries;

  std::uint32_t query_truth(std::size_t row) const {
    return static_cast<std::uint32_t>(row / query);
  }
};

struct EvalConfig {
  std::uint32_t way = 5;
  std::uint32_t shot = 1;
  std::uint32_t query = 15;
  std::uint32_t episodes = 600;
  float lambda = 0.5f;
  bool use_generator = true;
  std::uint64_t seed = 0;
  // How generator inputs are built at inference; mirrors the training mode.
  InputMode mode = InputMode::Textual;
  float alpha = 1.0f;
  std::uint32_t generated_per_class = 1;
  // Alternative centroid reading: (1-lambda)*mean(support) + lambda*mean(gen).
  bool convex_blend = false;

  void validate() const {
    if (way < 2) throw std::invalid_argument("eval config: way must be >= 2");
    if (shot < 1) throw std::invalid_argument("eval config: shot must be >= 1");
    if (query < 1) throw std::invalid_argument("eval config: query must be >= 1");
    if (episodes < 1) throw std::invalid_argument("eval config: episodes must be >= 1");
    if (!(lambda >= 0.0f)) throw std::invalid_argument("eval config: lambda must be >= 0");
    if (generated_per_class < 1)
      throw std::invalid_argument("eval config: generated-per-class must be >= 1");
  }
};

struct EvalResult {
  double mean_accuracy = 0.0;  // percent
  double ci95 = 0.0;           // half-width, percent
  std::vector<double> per_episode;
};

// Uniformly samples `way` distinct classes, then shot+query distinct records
// per class, split disjointly.
inline Episode sample_episode(const FeatureTable& table, std::uint32_t way, std::uint32_t shot,
                              std::uint32_t query, Rng& rng) {
  if (table.num_classes() < way)
    throw DataError("sample_episode: need " + std::to_string(way) + " classes, table has " +
                    std::to_string(table.num_classes()));
  Episode ep;
  ep.way = way;
  ep.shot = shot;
  ep.query = query;

  std::vector<std::size_t> class_order = shuffled_indices(rng, table.num_classes());
  ep.class_ids.assign(class_order.begin(), class_order.begin() + way);

  ep.support = Matrix<float>(static_cast<std::size_t>(way) * shot, table.dim);
  ep.queries = Matrix<float>(static_cast<std::size_t>(way) * query, table.dim);
  for (std::uint32_t c = 0; c < way; ++c) {
    const auto& members = table.by_class[ep.class_ids[c]];
    if (members.size() < static_cast<std::size_t>(shot) + query)
      throw DataError("sample_episode: class " + std::to_string(ep.class_ids[c]) + " has " +
                      std::to_string(members.size()) + " features, need " +
                      std::to_string(shot + query));
    std::vector<std::size_t> pick = shuffled_indices(rng, members.size());
    for (std::uint32_t k = 0; k < shot; ++k) {
      auto f = table.feature(members[pick[k]]);
      std::copy(f.begin(), f.end(), ep.support.row_ptr(c * shot + k));
    }
    for (std::uint32_t q = 0; q < query; ++q) {
      auto f = table.feature(members[pick[shot + q]]);
      std::copy(f.begin(), f.end(), ep.queries.row_ptr(c * query + q));
    }
  }
  return ep;
}

namespace detail {

inline std::vector<float> support_mean(const Episode& ep, std::uint32_t c) {
  std::vector<float> m(ep.support.cols, 0.0f);
  for (std::uint32_t k = 0; k < ep.shot; ++k) {
    const float* row = ep.support.row_ptr(c * ep.shot + k);
    for (std::size_t j = 0; j < ep.support.cols; ++j) m[j] += row[j];
  }
  for (float& v : m) v /= static_cast<float>(ep.shot);
  return m;
}

}  // namespace detail

// Plain per-class support means.
inline Matrix<float> support_centroids(const Episode& ep) {
  Matrix<float> c(ep.way, ep.support.cols);
  for (std::uint32_t k = 0; k < ep.way; ++k) {
    std::vector<float> m = detail::support_mean(ep, k);
    std::copy(m.begin(), m.end(), c.row_ptr(k));
  }
  return c;
}

struct AugmentResult {
  Matrix<float> centroids;  // way x d
  Matrix<float> generated;  // (way * m) x d, class-major
};

// Generates m features per episode class and folds them into the support
// centroid as a weighted mean: (sum(x) + lambda * sum(g)) / (K + m*lambda).
// lambda = 0 reproduces the plain support mean exactly.
inline AugmentResult augment_support(const Episode& ep, const ModelBundle<float>& bundle,
                                     const SemanticTable& semantics, float lambda,
                                     InputMode mode = InputMode::Textual, float alpha = 1.0f,
                                     std::uint32_t generated_per_class = 1,
                                     bool convex_blend = false, Rng* rng = nullptr) {
  const std::size_t d = ep.support.cols;
  const std::uint32_t m = generated_per_class;
  Rng local(0);
  Rng& noise = rng ? *rng : local;

  Matrix<float> inputs(static_cast<std::size_t>(ep.way) * m, bundle.generator.in_dim());
  for (std::uint32_t c = 0; c < ep.way; ++c) {
    if (!semantics.has(ep.class_ids[c]))
      throw MissingClassError("augment_support: class " + std::to_string(ep.class_ids[c]) +
                              " has no semantic vector");
    std::vector<float> visual = detail::support_mean(ep, c);
    for (std::uint32_t i = 0; i < m; ++i) {
      std::vector<float> in =
          build_generator_input(mode, alpha, semantics.vec(ep.class_ids[c]), visual, noise);
      if (in.size() != inputs.cols)
        throw ShapeError("augment_support: generator input dim " + std::to_string(in.size()) +
                         ", generator expects " + std::to_string(inputs.cols));
      std::copy(in.begin(), in.end(), inputs.row_ptr(c * m + i));
    }
  }
  AugmentResult out;
  out.generated = mlp_infer(bundle.generator, inputs);

  out.centroids = Matrix<float>(ep.way, d);
  for (std::uint32_t c = 0; c < ep.way; ++c) {
    float* dst = out.centroids.row_ptr(c);
    if (convex_blend) {
      std::vector<float> sup = detail::support_mean(ep, c);
      for (std::size_t j = 0; j < d; ++j) {
        float gmean = 0.0f;
        for (std::uint32_t i = 0; i < m; ++i) gmean += out.generated(c * m + i, j);
        gmean /= static_cast<float>(m);
        dst[j] = (1.0f - lambda) * sup[j] + lambda * gmean;
      }
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        float acc = 0.0f;
        for (std::uint32_t k = 0; k < ep.shot; ++k) acc += ep.support(c * ep.shot + k, j);
        for (std::uint32_t i = 0; i < m; ++i) acc += lambda * out.generated(c * m + i, j);
        dst[j] = acc / (static_cast<float>(ep.shot) + static_cast<float>(m) * lambda);
      }
    }
  }
  return out;
}

// Nearest centroid under cosine similarity; ties resolve to the lowest index.
inline std::vector<std::uint32_t> classify_queries(const Matrix<float>& centroids,
                                                   const Matrix<float>& queries) {
  std::vector<float> cnorm(centroids.rows);
  for (std::size_t c = 0; c < centroids.rows; ++c) {
    cnorm[c] = l2_norm(centroids.row(c));
    if (cnorm[c] == 0.0f)
      throw DataError("classify_queries: centroid " + std::to_string(c) + " has zero norm");
  }
  std::vector<std::uint32_t> pred(queries.rows);
  for (std::size_t q = 0; q < queries.rows; ++q) {
    auto qr = queries.row(q);
    const float qn = l2_norm(qr);
    if (qn == 0.0f) throw DataError("classify_queries: query " + std::to_string(q) + " has zero norm");
    float best = -2.0f;
    std::uint32_t best_c = 0;
    for (std::size_t c = 0; c < centroids.rows; ++c) {
      float sim = dot(qr, centroids.row(c)) / (qn * cnorm[c]);
      if (sim > best) {
        best = sim;
        best_c = static_cast<std::uint32_t>(c);
      }
    }
    pred[q] = best_c;
  }
  return pred;
}

namespace detail {

inline EvalResult summarize(std::vector<double> per_episode) {
  EvalResult r;
  const std::size_t n = per_episode.size();
  double mean = 0.0;
  for (double a : per_episode) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : per_episode) var += (a - mean) * (a - mean);
  var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
  r.mean_accuracy = mean;
  r.ci95 = 1.96 * std::sqrt(var) / std::sqrt(static_cast<double>(n));
  r.per_episode = std::move(per_episode);
  return r;
}

}  // namespace detail

// Episode stream shared by both arms: episode e is a pure function of
// (cfg.seed, e), independent of whether a generator is used.
inline Rng episode_rng(std::uint64_t seed, std::uint32_t episode_index) {
  return Rng(seed, 0x45564C00ULL).split(episode_index);
}

inline EvalResult evaluate(const FeatureTable& table, const SemanticTable& semantics,
                           const ModelBundle<float>* bundle, const EvalConfig& cfg) {
  cfg.validate();
  if (cfg.use_generator) {
    if (!bundle) throw std::invalid_argument("evaluate: generator requested but no model given");
    std::string missing;
    for (std::size_t c = 0; c < table.num_classes(); ++c)
      if (!semantics.has(static_cast<std::uint32_t>(c)))
        missing += (missing.empty() ? "" : ", ") + std::to_string(c);
    if (!missing.empty())
      throw MissingClassError("evaluate: no semantic vector for classes: " + missing);
  }
  std::vector<double> accs(cfg.episodes);
  for (std::uint32_t e = 0; e < cfg.episodes; ++e) {
    Rng ep_rng = episode_rng(cfg.seed, e);
    Rng sample_rng = ep_rng.split(0);
    const Episode ep = sample_episode(table, cfg.way, cfg.shot, cfg.query, sample_rng);
    Matrix<float> centroids;
    if (cfg.use_generator) {
      Rng noise_rng = ep_rng.split(1);
      centroids = augment_support(ep, *bundle, semantics, cfg.lambda, cfg.mode, cfg.alpha,
                                  cfg.generated_per_class, cfg.convex_blend, &noise_rng)
                      .centroids;
    } else {
      centroids = support_centroids(ep);
    }
    const std::vector<std::uint32_t> pred = classify_queries(centroids, ep.queries);
    std::size_t correct = 0;
    for (std::size_t q = 0; q < pred.size(); ++q)
      if (pred[q] == ep.query_truth(q)) ++correct;
    accs[e] = 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
  }
  return detail::summarize(std::move(accs));
}

struct PairedEvalResult {
  EvalResult baseline;
  EvalResult augmented;
};

// Both arms on identical episodes (shared per-episode streams), so the
// accuracy delta is a paired statistic.
inline PairedEvalResult evaluate_paired(const FeatureTable& table, const SemanticTable& semantics,
                                        const ModelBundle<float>& bundle, const EvalConfig& cfg) {
  EvalConfig base_cfg = cfg;
  base_cfg.use_generator = false;
  EvalConfig aug_cfg = cfg;
  aug_cfg.use_generator = true;
  PairedEvalResult out;
  out.baseline = evaluate(table, semantics, nullptr, base_cfg);
  out.augmented = evaluate(table, semantics, &bundle, aug_cfg);
  return out;
}

inline void write_results_header(std::ostream& os) {
  os << "way,shot,query,episodes,lambda,use_generator,accuracy,ci95\n";
}

inline void write_results_row(std::ostream& os, const EvalConfig& cfg, bool used_generator,
                              const EvalResult& r) {
  os << cfg.way << ',' << cfg.shot << ',' << cfg.query << ',' << cfg.episodes << ','
     << fmt_float(cfg.lambda, 4) << ',' << (used_generator ? 1 : 0) << ','
     << fmt_float(r.mean_accuracy, 4) << ',' << fmt_float(r.ci95, 4) << '\n';
}

}  // namespace fewgen
