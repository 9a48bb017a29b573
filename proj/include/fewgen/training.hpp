#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "fewgen/dataset.hpp"
#include "fewgen/format.hpp"
#include "fewgen/inputs.hpp"
#include "fewgen/losses.hpp"
#include "fewgen/models.hpp"

namespace fewgen {

// Which terms enter the generator objective (Table-4 style ablations).
struct LossMask {
  bool cdl = true;   // cosine distance to the true class embedding
  bool disc = true;  // adversarial term
  bool cls = true;   // classifier term

  template <typename T>
  GeneratorLossWeights<T> weights() const {
    return {cdl ? T(1) : T(0), disc ? T(1) : T(0), cls ? T(1) : T(0)};
  }
};

struct TrainConfig {
  std::size_t epochs = 5000;
  std::size_t start_epoch = 0;  // resume point; epochs is the end bound
  std::size_t batch_size = 128;
  float lr = 1e-4f;
  float alpha = 1.0f;
  InputMode mode = InputMode::Textual;
  std::uint64_t seed = 0;
  std::size_t checkpoint_interval = 0;  // in epochs; 0 = no periodic checkpoints
  LossMask mask;
  ModelDims dims;  // c_train / d_visual / d_semantic are filled from the data

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (start_epoch >= epochs)
      throw std::invalid_argument("train config: start epoch must precede epochs");
    if (batch_size < 2) throw std::invalid_argument("train config: batch size must be >= 2");
    if (!(lr > 0.0f)) throw std::invalid_argument("train config: lr must be positive");
    if (!(alpha >= 0.0f && alpha <= 1.0f))
      throw std::invalid_argument("train config: alpha must be in [0, 1]");
  }
};

struct StepLosses {
  float loss_c = 0, loss_d = 0;
  float loss_g = 0, g_cdl = 0, g_bce = 0, g_cce = 0;
};

struct TrainMetrics {
  struct Row {
    std::size_t epoch;
    float loss_c, loss_d, loss_g, g_cdl, g_bce, g_cce;
    float mean_cdl_to_true;
  };
  std::vector<Row> rows;

  void write_csv(std::ostream& os) const {
    os << "epoch,loss_c,loss_d,loss_g,loss_g_cdl,loss_g_bce,loss_g_cce,mean_cdl_to_true\n";
    for (const Row& r : rows) {
      os << r.epoch << ',' << fmt_float(r.loss_c) << ',' << fmt_float(r.loss_d) << ','
         << fmt_float(r.loss_g) << ',' << fmt_float(r.g_cdl) << ',' << fmt_float(r.g_bce) << ','
         << fmt_float(r.g_cce) << ',' << fmt_float(r.mean_cdl_to_true) << '\n';
    }
  }
};

namespace detail {

template <typename T>
Matrix<T> gather_rows(const FeatureTable& table, const std::vector<std::size_t>& order,
                      std::size_t first, std::size_t count) {
  Matrix<T> x(count, table.dim);
  for (std::size_t i = 0; i < count; ++i) {
    auto f = table.feature(order[first + i]);
    for (std::size_t j = 0; j < table.dim; ++j) x(i, j) = static_cast<T>(f[j]);
  }
  return x;
}

template <typename T>
Matrix<T> rows_for_labels(const std::vector<std::uint32_t>& labels, std::uint32_t dim,
                          const std::vector<std::vector<float>>& by_label) {
  Matrix<T> m(labels.size(), dim);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& v = by_label[labels[i]];
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = static_cast<T>(v[j]);
  }
  return m;
}

}  // namespace detail

// Classifier update on true features: Adam step on CCE(C(x), y).
template <typename T>
T classifier_step(ModelBundle<T>& b, const Matrix<T>& x, const std::vector<std::uint32_t>& labels,
                  T lr) {
  Tape<T> tape;
  Matrix<T> probs = classifier_forward(b, x, Mode::Train, &tape);
  LossValue<T> loss = cce(probs, one_hot<T>(labels, b.classifier.out_dim()));
  Grads<T> grads;
  mlp_backward(b.classifier, tape, loss.grad, &grads);
  adam_step(b.classifier, grads, b.cls_opt, lr, "classifier");
  return loss.value;
}

// Discriminator update: Adam step on bce(D(x),1) + bce(D(generated),0), the
// generated batch treated as constant.
template <typename T>
T discriminator_step(ModelBundle<T>& b, const Matrix<T>& real, const Matrix<T>& generated, T lr) {
  Tape<T> real_tape, fake_tape;
  Matrix<T> real_out = discriminator_forward(b, real, Mode::Train, &real_tape);
  Matrix<T> fake_out = discriminator_forward(b, generated, Mode::Train, &fake_tape);
  DiscriminatorLoss<T> loss = discriminator_loss(real_out, fake_out);
  Grads<T> grads, fake_grads;
  mlp_backward(b.discriminator, real_tape, loss.grad_real_logits, &grads);
  mlp_backward(b.discriminator, fake_tape, loss.grad_fake_logits, &fake_grads);
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    add_inplace(grads.layers[l].weight, fake_grads.layers[l].weight);
    for (std::size_t i = 0; i < grads.layers[l].bias.size(); ++i)
      grads.layers[l].bias[i] += fake_grads.layers[l].bias[i];
    for (std::size_t i = 0; i < grads.layers[l].gamma.size(); ++i) {
      grads.layers[l].gamma[i] += fake_grads.layers[l].gamma[i];
      grads.layers[l].beta[i] += fake_grads.layers[l].beta[i];
    }
  }
  adam_step(b.discriminator, grads, b.disc_opt, lr, "discriminator");
  return loss.value;
}

// Generator update against the combined objective. D and C are frozen: they
// run eval-mode normalization and receive no parameter gradients.
template <typename T>
GeneratorLoss<T> generator_step(ModelBundle<T>& b, const Matrix<T>& generated,
                                const Tape<T>& gen_tape, const Matrix<T>& true_embed,
                                const std::vector<std::uint32_t>& labels, T lr,
                                const GeneratorLossWeights<T>& w) {
  Tape<T> disc_tape, cls_tape;
  Matrix<T> disc_out = discriminator_forward(b, generated, Mode::Eval, &disc_tape);
  Matrix<T> class_out = classifier_forward(b, generated, Mode::Eval, &cls_tape);
  GeneratorLoss<T> loss = generator_loss(generated, true_embed, disc_out, class_out, labels, w);

  Matrix<T> d_generated = loss.grad_generated_cdl;
  add_inplace(d_generated, mlp_backward(b.discriminator, disc_tape, loss.grad_disc_logits));
  add_inplace(d_generated, mlp_backward(b.classifier, cls_tape, loss.grad_class_logits));

  Grads<T> grads;
  mlp_backward(b.generator, gen_tape, d_generated, &grads);
  adam_step(b.generator, grads, b.gen_opt, lr, "generator");
  return loss;
}

// One batch: classifier, discriminator, then generator, in that order.
template <typename T>
StepLosses train_step(ModelBundle<T>& b, const Matrix<T>& x,
                      const std::vector<std::uint32_t>& labels, const SemanticTable& semantics,
                      const EmbeddingTable& embeddings, const TrainConfig& cfg, Rng& rng) {
  if (x.rows < 2) throw DataError("train_step: batch must have >= 2 samples");
  for (std::uint32_t y : labels) {
    if (!semantics.has(y))
      throw MissingClassError("train_step: class " + std::to_string(y) +
                              " has no semantic vector");
    if (!embeddings.has(y))
      throw MissingClassError("train_step: class " + std::to_string(y) + " has no embedding");
  }

  StepLosses out;
  out.loss_c = static_cast<float>(classifier_step(b, x, labels, T(cfg.lr)));

  // Generator inputs for this batch; one generated feature per sample.
  Matrix<T> inputs(x.rows, b.generator.in_dim());
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::vector<float> xin(x.cols);
    for (std::size_t j = 0; j < x.cols; ++j) xin[j] = static_cast<float>(x(i, j));
    std::vector<float> in =
        build_generator_input(cfg.mode, cfg.alpha, semantics.vec(labels[i]), xin, rng);
    if (in.size() != inputs.cols)
      throw ShapeError("train_step: generator input dim " + std::to_string(in.size()) +
                       ", generator expects " + std::to_string(inputs.cols));
    for (std::size_t j = 0; j < inputs.cols; ++j) inputs(i, j) = static_cast<T>(in[j]);
  }
  Tape<T> gen_tape;
  Matrix<T> generated = generator_forward(b, inputs, Mode::Train, &gen_tape);

  out.loss_d = static_cast<float>(discriminator_step(b, x, generated, T(cfg.lr)));

  Matrix<T> true_embed =
      detail::rows_for_labels<T>(labels, embeddings.dim, embeddings.vectors);
  GeneratorLoss<T> g =
      generator_step(b, generated, gen_tape, true_embed, labels, T(cfg.lr), cfg.mask.weights<T>());
  out.loss_g = static_cast<float>(g.total);
  out.g_cdl = static_cast<float>(g.cdl_term);
  out.g_bce = static_cast<float>(g.bce_term);
  out.g_cce = static_cast<float>(g.cce_term);
  return out;
}

// Epoch-end diagnostic: mean CDL(G(class input), t_c) over train classes,
// generator in eval mode. Textual/blend runs use the normalized semantic;
// visual runs use the noise-free expectation t_c + 0.1.
template <typename T>
T mean_cdl_to_true(ModelBundle<T>& b, const SemanticTable& semantics,
                   const EmbeddingTable& embeddings, InputMode mode) {
  const std::size_t n = embeddings.vectors.size();
  Matrix<T> inputs(n, b.generator.in_dim());
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<float> in;
    if (mode == InputMode::Visual) {
      auto t = embeddings.vec(static_cast<std::uint32_t>(c));
      in.assign(t.begin(), t.end());
      for (float& v : in) v += static_cast<float>(kVisualNoiseMean);
    } else {
      in = l2_normalized(semantics.vec(static_cast<std::uint32_t>(c)));
    }
    for (std::size_t j = 0; j < inputs.cols; ++j) inputs(c, j) = static_cast<T>(in[j]);
  }
  Matrix<T> generated = generator_forward(b, inputs, Mode::Eval);
  Matrix<T> targets(n, embeddings.dim);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t j = 0; j < embeddings.dim; ++j)
      targets(c, j) = static_cast<T>(embeddings.vectors[c][j]);
  return cdl(generated, targets).value;
}

using CheckpointFn = std::function<void(std::size_t epoch, const ModelBundle<float>&)>;

// Joint co-training loop. True embeddings are computed once from the full
// table; every epoch shuffles with an epoch-derived stream, so resuming at an
// epoch boundary replays exactly the same trajectory.
inline std::pair<ModelBundle<float>, TrainMetrics> train(
    const FeatureTable& table, const SemanticTable& semantics, const TrainConfig& cfg,
    std::optional<ModelBundle<float>> warm_start = {}, const CheckpointFn& on_checkpoint = {}) {
  cfg.validate();
  if (table.dim == 0 || table.size() == 0) throw DataError("train: empty feature table");
  for (std::size_t c = 0; c < table.num_classes(); ++c)
    if (!semantics.has(static_cast<std::uint32_t>(c)))
      throw MissingClassError("train: class " + std::to_string(c) + " has no semantic vector");

  const EmbeddingTable embeddings = true_class_embeddings(table);
  Rng root(cfg.seed);

  ModelBundle<float> bundle;
  if (warm_start) {
    bundle = std::move(*warm_start);
    if (bundle.generator.out_dim() != table.dim)
      throw ShapeError("train: checkpoint visual dim " +
                       std::to_string(bundle.generator.out_dim()) + " vs data dim " +
                       std::to_string(table.dim));
  } else {
    ModelDims dims = cfg.dims;
    dims.d_visual = table.dim;
    dims.d_semantic =
        (cfg.mode == InputMode::Visual) ? table.dim : semantics.dim;
    dims.c_train = table.num_classes();
    Rng init_rng = root.split(0);
    bundle = init_models<float>(dims, init_rng);
  }
  if (cfg.mode != InputMode::Textual && bundle.generator.in_dim() != table.dim)
    throw ShapeError("train: " + std::string(input_mode_name(cfg.mode)) +
                     " mode needs generator input dim " + std::to_string(table.dim) + ", got " +
                     std::to_string(bundle.generator.in_dim()));

  TrainMetrics metrics;
  for (std::size_t epoch = cfg.start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng epoch_rng = root.split(epoch + 1);
    Rng shuffle_rng = epoch_rng.split(0);
    std::vector<std::size_t> order = shuffled_indices(shuffle_rng, table.size());

    double sum_c = 0, sum_d = 0, sum_g = 0, sum_cdl = 0, sum_bce = 0, sum_cce = 0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      if (count < 2) break;  // batchnorm needs >= 2; a trailing singleton is dropped
      Matrix<float> x = detail::gather_rows<float>(table, order, first, count);
      std::vector<std::uint32_t> labels(count);
      for (std::size_t i = 0; i < count; ++i) labels[i] = table.labels[order[first + i]];
      Rng step_rng = epoch_rng.split(1 + batches);
      StepLosses losses;
      try {
        losses = train_step(bundle, x, labels, semantics, embeddings, cfg, step_rng);
      } catch (const NumericError& e) {
        throw NumericError("train: epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batches) + ": " + e.what());
      }
      if (!std::isfinite(losses.loss_c) || !std::isfinite(losses.loss_d) ||
          !std::isfinite(losses.loss_g))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batches));
      sum_c += losses.loss_c;
      sum_d += losses.loss_d;
      sum_g += losses.loss_g;
      sum_cdl += losses.g_cdl;
      sum_bce += losses.g_bce;
      sum_cce += losses.g_cce;
      ++batches;
    }
    if (batches == 0) throw DataError("train: no trainable batch (need >= 2 samples)");

    TrainMetrics::Row row;
    row.epoch = epoch;
    row.loss_c = static_cast<float>(sum_c / batches);
    row.loss_d = static_cast<float>(sum_d / batches);
    row.loss_g = static_cast<float>(sum_g / batches);
    row.g_cdl = static_cast<float>(sum_cdl / batches);
    row.g_bce = static_cast<float>(sum_bce / batches);
    row.g_cce = static_cast<float>(sum_cce / batches);
    row.mean_cdl_to_true = mean_cdl_to_true(bundle, semantics, embeddings, cfg.mode);
    metrics.rows.push_back(row);

    if (on_checkpoint && cfg.checkpoint_interval > 0 && (epoch + 1) % cfg.checkpoint_interval == 0)
      on_checkpoint(epoch + 1, bundle);
  }
  return {std::move(bundle), std::move(metrics)};
}

}  // namespace fewgen
