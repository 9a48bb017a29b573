// fewgen: synthetic benchmarks, generator training, episodic evaluation and
// embedding export for few-shot feature generation experiments.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fewgen/fewgen.hpp"

namespace fs = std::filesystem;
using namespace fewgen;

namespace {

// Exit codes: 0 success, 2 usage, 3 data/shape, 4 missing class, 5 numeric.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitMissingClass = 4;
constexpr int kExitNumeric = 5;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

SemanticTable embedding_as_table(const EmbeddingTable& e) {
  SemanticTable t;
  t.dim = e.dim;
  t.vectors = e.vectors;
  return t;
}

std::string join_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

void add_dims_options(CLI::App* cmd, ModelDims& dims) {
  cmd->add_option("--gen-hidden", dims.gen_hidden, "Generator hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--disc-hidden", dims.disc_hidden, "Discriminator hidden widths")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--cls-hidden", dims.cls_hidden, "Classifier hidden widths")
      ->delimiter(',')
      ->capture_default_str();
}

LossMask parse_loss_mask(const std::vector<std::string>& terms) {
  LossMask mask{false, false, false};
  for (const auto& t : terms) {
    if (t == "cosine")
      mask.cdl = true;
    else if (t == "discriminator")
      mask.disc = true;
    else if (t == "classifier")
      mask.cls = true;
    else
      throw CLI::ValidationError("--loss-mask",
                                 "unknown term '" + t +
                                     "' (cosine|discriminator|classifier)");
  }
  if (!mask.cdl && !mask.disc && !mask.cls)
    throw CLI::ValidationError("--loss-mask", "at least one loss term is required");
  return mask;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

int run_synth(const SynthArgs& a) {
  Stopwatch watch;
  fs::create_directories(a.out_dir);
  Rng rng(a.seed);
  SyntheticData data = make_synthetic(a.spec, rng);

  const fs::path out(a.out_dir);
  save_features(data.train, out / "train.fgf1");
  save_features(data.test, out / "test.fgf1");
  save_semantics(data.train_semantics, out / "train_sem.fgs1");
  save_semantics(data.test_semantics, out / "test_sem.fgs1");
  save_semantics(embedding_as_table(data.train_means), out / "train_means.fgs1");
  save_semantics(embedding_as_table(data.test_means), out / "test_means.fgs1");

  RunManifest m;
  m.command = "synth";
  m.seed = a.seed;
  m.set("classes-train", std::to_string(a.spec.train_classes));
  m.set("classes-test", std::to_string(a.spec.test_classes));
  m.set("per-class", std::to_string(a.spec.per_class));
  m.set("dim", std::to_string(a.spec.d_visual));
  m.set("sem-dim", std::to_string(a.spec.d_semantic));
  m.set("sigma", fmt_float_full(a.spec.sigma));
  m.set("sem-noise", fmt_float_full(a.spec.semantic_noise));
  m.set("sem-map-seed", std::to_string(a.spec.semantic_map_seed));
  m.set("seed", std::to_string(a.seed));
  m.set("out-dir", a.out_dir);
  for (const char* f : {"train.fgf1", "test.fgf1", "train_sem.fgs1", "test_sem.fgs1",
                        "train_means.fgs1", "test_means.fgs1"})
    m.outputs.push_back((out / f).string());
  m.duration_seconds = watch.seconds();
  m.save(out / "synth_manifest.json");

  std::cout << "wrote " << data.train.size() << " train / " << data.test.size()
            << " test features to " << a.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string features, semantics, raw_semantics;
  std::string warm_start;
  std::string out_dir = ".";
  TrainConfig cfg;
  std::vector<std::string> loss_terms = {"cosine", "discriminator", "classifier"};
  std::string mode = "textual";
};

int run_train(const TrainArgs& a) {
  Stopwatch watch;
  fs::create_directories(a.out_dir);
  FeatureTable table = load_features(a.features);
  SemanticTable semantics;
  if (!a.raw_semantics.empty())
    semantics = average_semantics(load_raw_semantics(a.raw_semantics));
  else
    semantics = load_semantics(a.semantics);

  TrainConfig cfg = a.cfg;
  cfg.mode = parse_input_mode(a.mode);
  cfg.mask = parse_loss_mask(a.loss_terms);

  std::optional<ModelBundle<float>> warm;
  if (!a.warm_start.empty()) warm = load_checkpoint(a.warm_start);

  const fs::path out(a.out_dir);
  CheckpointFn periodic = [&](std::size_t epoch, const ModelBundle<float>& b) {
    char name[64];
    std::snprintf(name, sizeof(name), "model_epoch%06zu.fgck", epoch);
    save_checkpoint(b, out / name);
  };

  auto [bundle, metrics] = train(table, semantics, cfg, std::move(warm), periodic);

  save_checkpoint(bundle, out / "model.fgck");
  {
    std::ofstream os(out / "metrics.csv");
    if (!os) throw IoError("cannot open metrics.csv for writing");
    metrics.write_csv(os);
  }

  RunManifest m;
  m.command = "train";
  m.seed = cfg.seed;
  m.set("features", a.features);
  if (!a.raw_semantics.empty())
    m.set("raw-semantics", a.raw_semantics);
  else
    m.set("semantics", a.semantics);
  if (!a.warm_start.empty()) m.set("warm-start", a.warm_start);
  m.set("epochs", std::to_string(cfg.epochs));
  m.set("start-epoch", std::to_string(cfg.start_epoch));
  m.set("batch-size", std::to_string(cfg.batch_size));
  m.set("lr", fmt_float_full(cfg.lr));
  m.set("alpha", fmt_float_full(cfg.alpha));
  m.set("mode", a.mode);
  m.set_list("loss-mask", a.loss_terms);
  m.set("checkpoint-interval", std::to_string(cfg.checkpoint_interval));
  m.set("gen-hidden", join_list(cfg.dims.gen_hidden));
  m.set("disc-hidden", join_list(cfg.dims.disc_hidden));
  m.set("cls-hidden", join_list(cfg.dims.cls_hidden));
  m.set("seed", std::to_string(cfg.seed));
  m.set("out-dir", a.out_dir);
  m.inputs = {a.features};
  if (!a.semantics.empty()) m.inputs.push_back(a.semantics);
  if (!a.raw_semantics.empty()) m.inputs.push_back(a.raw_semantics);
  if (!a.warm_start.empty()) m.inputs.push_back(a.warm_start);
  m.outputs = {(out / "model.fgck").string(), (out / "metrics.csv").string()};
  m.duration_seconds = watch.seconds();
  m.save(out / "train_manifest.json");

  const auto& last = metrics.rows.back();
  std::cout << "epoch " << last.epoch << ": loss_c=" << fmt_float(last.loss_c)
            << " loss_d=" << fmt_float(last.loss_d) << " loss_g=" << fmt_float(last.loss_g)
            << " mean_cdl_to_true=" << fmt_float(last.mean_cdl_to_true) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint, features, semantics;
  std::string out_dir = ".";
  EvalConfig cfg;
  std::vector<std::uint32_t> shots = {1, 5};
  std::string mode = "textual";
};

int run_eval(const EvalArgs& a) {
  Stopwatch watch;
  fs::create_directories(a.out_dir);
  FeatureTable table = load_features(a.features);
  SemanticTable semantics = load_semantics(a.semantics);
  ModelBundle<float> bundle = load_checkpoint(a.checkpoint);

  EvalConfig cfg = a.cfg;
  cfg.mode = parse_input_mode(a.mode);

  const fs::path out(a.out_dir);
  std::ofstream os(out / "results.csv");
  if (!os) throw IoError("cannot open results.csv for writing");
  write_results_header(os);
  for (std::uint32_t shot : a.shots) {
    cfg.shot = shot;
    PairedEvalResult pair = evaluate_paired(table, semantics, bundle, cfg);
    write_results_row(os, cfg, false, pair.baseline);
    write_results_row(os, cfg, true, pair.augmented);
    std::cout << cfg.way << "-way " << shot << "-shot: baseline "
              << fmt_float(pair.baseline.mean_accuracy, 2) << " +- "
              << fmt_float(pair.baseline.ci95, 2) << ", augmented "
              << fmt_float(pair.augmented.mean_accuracy, 2) << " +- "
              << fmt_float(pair.augmented.ci95, 2) << "\n";
  }
  os.flush();
  if (!os) throw IoError("short write to results.csv");

  RunManifest m;
  m.command = "eval";
  m.seed = cfg.seed;
  m.set("checkpoint", a.checkpoint);
  m.set("features", a.features);
  m.set("semantics", a.semantics);
  m.set("way", std::to_string(cfg.way));
  {
    std::vector<std::string> shot_strs;
    for (auto s : a.shots) shot_strs.push_back(std::to_string(s));
    m.set_list("shot", shot_strs);
  }
  m.set("query", std::to_string(cfg.query));
  m.set("episodes", std::to_string(cfg.episodes));
  m.set("lambda", fmt_float_full(cfg.lambda));
  m.set("mode", a.mode);
  m.set("alpha", fmt_float_full(cfg.alpha));
  m.set("gen-count", std::to_string(cfg.generated_per_class));
  m.set("seed", std::to_string(cfg.seed));
  m.set("out-dir", a.out_dir);
  m.inputs = {a.checkpoint, a.features, a.semantics};
  m.outputs = {(out / "results.csv").string()};
  m.duration_seconds = watch.seconds();
  m.save(out / "eval_manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// ablate-alpha

struct AblateArgs {
  std::string train_features, train_semantics;
  std::string test_features, test_semantics;
  std::string out_dir = ".";
  std::vector<float> alphas = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
  TrainConfig train_cfg;
  EvalConfig eval_cfg;
};

int run_ablate_alpha(const AblateArgs& a) {
  Stopwatch watch;
  fs::create_directories(a.out_dir);
  FeatureTable train_table = load_features(a.train_features);
  SemanticTable train_sem = load_semantics(a.train_semantics);
  FeatureTable test_table = load_features(a.test_features);
  SemanticTable test_sem = load_semantics(a.test_semantics);

  std::vector<float> alphas = a.alphas;
  std::sort(alphas.begin(), alphas.end());

  const fs::path out(a.out_dir);
  std::ofstream os(out / "alpha_ablation.csv");
  if (!os) throw IoError("cannot open alpha_ablation.csv for writing");
  os << "alpha,accuracy,ci95\n";
  for (float alpha : alphas) {
    TrainConfig tcfg = a.train_cfg;
    tcfg.mode = InputMode::Blend;
    tcfg.alpha = alpha;
    auto [bundle, metrics] = train(train_table, train_sem, tcfg);

    EvalConfig ecfg = a.eval_cfg;
    ecfg.mode = InputMode::Blend;
    ecfg.alpha = alpha;
    ecfg.use_generator = true;
    EvalResult r = evaluate(test_table, test_sem, &bundle, ecfg);
    os << fmt_float(alpha, 4) << ',' << fmt_float(r.mean_accuracy, 4) << ','
       << fmt_float(r.ci95, 4) << '\n';
    std::cout << "alpha=" << fmt_float(alpha, 2) << ": " << fmt_float(r.mean_accuracy, 2)
              << " +- " << fmt_float(r.ci95, 2) << "\n";
  }
  os.flush();
  if (!os) throw IoError("short write to alpha_ablation.csv");

  RunManifest m;
  m.command = "ablate-alpha";
  m.seed = a.train_cfg.seed;
  m.set("features", a.train_features);
  m.set("semantics", a.train_semantics);
  m.set("test-features", a.test_features);
  m.set("test-semantics", a.test_semantics);
  {
    std::vector<std::string> alpha_strs;
    for (float v : alphas) alpha_strs.push_back(fmt_float_full(v));
    m.set_list("alphas", alpha_strs);
  }
  m.set("epochs", std::to_string(a.train_cfg.epochs));
  m.set("batch-size", std::to_string(a.train_cfg.batch_size));
  m.set("lr", fmt_float_full(a.train_cfg.lr));
  m.set("gen-hidden", join_list(a.train_cfg.dims.gen_hidden));
  m.set("disc-hidden", join_list(a.train_cfg.dims.disc_hidden));
  m.set("cls-hidden", join_list(a.train_cfg.dims.cls_hidden));
  m.set("way", std::to_string(a.eval_cfg.way));
  m.set("shot", std::to_string(a.eval_cfg.shot));
  m.set("query", std::to_string(a.eval_cfg.query));
  m.set("episodes", std::to_string(a.eval_cfg.episodes));
  m.set("lambda", fmt_float_full(a.eval_cfg.lambda));
  m.set("seed", std::to_string(a.train_cfg.seed));
  m.set("out-dir", a.out_dir);
  m.inputs = {a.train_features, a.train_semantics, a.test_features, a.test_semantics};
  m.outputs = {(out / "alpha_ablation.csv").string()};
  m.duration_seconds = watch.seconds();
  m.save(out / "ablate-alpha_manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// export-embeddings

struct ExportArgs {
  std::string checkpoint, features, semantics, means;
  std::string out_dir = ".";
  std::uint32_t way = 5, shot = 1, query = 15;
  std::uint32_t episode_index = 0;
  float lambda = 0.5f;
  std::string mode = "textual";
  float alpha = 1.0f;
  std::uint64_t seed = 0;
};

int run_export_embeddings(const ExportArgs& a) {
  Stopwatch watch;
  fs::create_directories(a.out_dir);
  FeatureTable table = load_features(a.features);
  SemanticTable semantics = load_semantics(a.semantics);
  ModelBundle<float> bundle = load_checkpoint(a.checkpoint);
  EmbeddingTable truth;
  if (!a.means.empty()) {
    SemanticTable m = load_semantics(a.means);
    truth.dim = m.dim;
    truth.vectors = m.vectors;
  } else {
    truth = true_class_embeddings(table);
  }

  Rng ep_rng = episode_rng(a.seed, a.episode_index);
  Rng sample_rng = ep_rng.split(0);
  Episode ep = sample_episode(table, a.way, a.shot, a.query, sample_rng);
  Rng noise_rng = ep_rng.split(1);
  AugmentResult aug = augment_support(ep, bundle, semantics, a.lambda, parse_input_mode(a.mode),
                                      a.alpha, 1, false, &noise_rng);
  Matrix<float> baseline = support_centroids(ep);

  // PCA basis fitted on the union of every exported point.
  struct Tagged {
    std::uint32_t label;
    const char* kind;
    std::vector<double> point;
  };
  std::vector<Tagged> points;
  auto push = [&](std::uint32_t label, const char* kind, std::span<const float> v) {
    points.push_back({label, kind, std::vector<double>(v.begin(), v.end())});
  };
  for (std::uint32_t c = 0; c < ep.way; ++c) {
    const std::uint32_t label = ep.class_ids[c];
    for (std::uint32_t k = 0; k < ep.shot; ++k)
      push(label, "support-feature", ep.support.row(c * ep.shot + k));
    push(label, "generated-feature", aug.generated.row(c));
    push(label, "baseline-centroid", baseline.row(c));
    push(label, "augmented-centroid", aug.centroids.row(c));
    push(label, "true-embedding", truth.vec(label));
  }
  Matrix<double> cloud(points.size(), table.dim);
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < table.dim; ++j) cloud(i, j) = points[i].point[j];
  Pca2 pca = fit_pca2(cloud);

  const fs::path out(a.out_dir);
  std::ofstream os(out / "embeddings.csv");
  if (!os) throw IoError("cannot open embeddings.csv for writing");
  os << "label,kind,x,y\n";
  for (const Tagged& t : points) {
    auto [x, y] = pca_project(pca, t.point);
    os << t.label << ',' << t.kind << ',' << fmt_float(x) << ',' << fmt_float(y) << '\n';
  }
  os.flush();
  if (!os) throw IoError("short write to embeddings.csv");

  RunManifest m;
  m.command = "export-embeddings";
  m.seed = a.seed;
  m.set("checkpoint", a.checkpoint);
  m.set("features", a.features);
  m.set("semantics", a.semantics);
  if (!a.means.empty()) m.set("means", a.means);
  m.set("way", std::to_string(a.way));
  m.set("shot", std::to_string(a.shot));
  m.set("query", std::to_string(a.query));
  m.set("episode-index", std::to_string(a.episode_index));
  m.set("lambda", fmt_float_full(a.lambda));
  m.set("mode", a.mode);
  m.set("alpha", fmt_float_full(a.alpha));
  m.set("seed", std::to_string(a.seed));
  m.set("out-dir", a.out_dir);
  m.inputs = {a.checkpoint, a.features, a.semantics};
  if (!a.means.empty()) m.inputs.push_back(a.means);
  m.outputs = {(out / "embeddings.csv").string()};
  m.duration_seconds = watch.seconds();
  m.save(out / "export-embeddings_manifest.json");

  std::cout << "exported " << points.size() << " projected points\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"few-shot feature generator pipeline"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate the synthetic benchmark files");
  synth_cmd->add_option("--classes-train", synth.spec.train_classes)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--classes-test", synth.spec.test_classes)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--per-class", synth.spec.per_class)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth.spec.d_visual)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--sem-dim", synth.spec.d_semantic)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--sigma", synth.spec.sigma)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--sem-noise", synth.spec.semantic_noise)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth_cmd->add_option("--sem-map-seed", synth.spec.semantic_map_seed)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out-dir", synth.out_dir)->capture_default_str();

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Co-train generator/discriminator/classifier");
  train_cmd->add_option("--features", train_args.features, "FGF1 training features")->required();
  auto* sem_opt = train_cmd->add_option("--semantics", train_args.semantics, "FGS1 semantics");
  auto* raw_opt = train_cmd->add_option("--raw-semantics", train_args.raw_semantics,
                                        "Per-sentence text semantics (averaged on load)");
  raw_opt->excludes(sem_opt);
  train_cmd->add_option("--epochs", train_args.cfg.epochs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--start-epoch", train_args.cfg.start_epoch)->capture_default_str();
  train_cmd->add_option("--batch-size", train_args.cfg.batch_size)
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.cfg.lr)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--alpha", train_args.cfg.alpha)
      ->check(CLI::Range(0.0f, 1.0f))
      ->capture_default_str();
  train_cmd->add_option("--mode", train_args.mode, "textual|visual|blend")
      ->check(CLI::IsMember({"textual", "visual", "blend"}))
      ->capture_default_str();
  train_cmd->add_option("--loss-mask", train_args.loss_terms,
                        "Generator loss terms: cosine,discriminator,classifier")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--warm-start", train_args.warm_start, "Checkpoint to continue from");
  train_cmd->add_option("--checkpoint-interval", train_args.cfg.checkpoint_interval)
      ->capture_default_str();
  add_dims_options(train_cmd, train_args.cfg.dims);
  train_cmd->add_option("--seed", train_args.cfg.seed)->capture_default_str();
  train_cmd->add_option("--out-dir", train_args.out_dir)->capture_default_str();

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Episodic N-way K-shot evaluation");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval_cmd->add_option("--features", eval_args.features, "FGF1 test features")->required();
  eval_cmd->add_option("--semantics", eval_args.semantics, "FGS1 test semantics")->required();
  eval_cmd->add_option("--way", eval_args.cfg.way)
      ->check(CLI::Range(2u, 1000u))
      ->capture_default_str();
  eval_cmd->add_option("--shot", eval_args.shots, "Shot counts (repeatable)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--query", eval_args.cfg.query)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--episodes", eval_args.cfg.episodes)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--lambda", eval_args.cfg.lambda)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval_cmd->add_option("--mode", eval_args.mode, "Generator input mode at inference")
      ->check(CLI::IsMember({"textual", "visual", "blend"}))
      ->capture_default_str();
  eval_cmd->add_option("--alpha", eval_args.cfg.alpha)
      ->check(CLI::Range(0.0f, 1.0f))
      ->capture_default_str();
  eval_cmd->add_option("--gen-count", eval_args.cfg.generated_per_class)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_flag("--convex-centroid", eval_args.cfg.convex_blend,
                     "Use (1-lambda)*mean + lambda*generated instead of the weighted mean");
  eval_cmd->add_option("--seed", eval_args.cfg.seed)->capture_default_str();
  eval_cmd->add_option("--out-dir", eval_args.out_dir)->capture_default_str();

  AblateArgs ablate;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate-alpha", "Train and evaluate a blend generator per alpha");
  ablate_cmd->add_option("--features", ablate.train_features)->required();
  ablate_cmd->add_option("--semantics", ablate.train_semantics)->required();
  ablate_cmd->add_option("--test-features", ablate.test_features)->required();
  ablate_cmd->add_option("--test-semantics", ablate.test_semantics)->required();
  ablate_cmd->add_option("--alphas", ablate.alphas)
      ->delimiter(',')
      ->check(CLI::Range(0.0f, 1.0f))
      ->capture_default_str();
  ablate_cmd->add_option("--epochs", ablate.train_cfg.epochs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ablate_cmd->add_option("--batch-size", ablate.train_cfg.batch_size)
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20))
      ->capture_default_str();
  ablate_cmd->add_option("--lr", ablate.train_cfg.lr)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_dims_options(ablate_cmd, ablate.train_cfg.dims);
  ablate_cmd->add_option("--way", ablate.eval_cfg.way)->capture_default_str();
  ablate_cmd->add_option("--shot", ablate.eval_cfg.shot)->capture_default_str();
  ablate_cmd->add_option("--query", ablate.eval_cfg.query)->capture_default_str();
  ablate_cmd->add_option("--episodes", ablate.eval_cfg.episodes)->capture_default_str();
  ablate_cmd->add_option("--lambda", ablate.eval_cfg.lambda)->capture_default_str();
  ablate_cmd->add_option("--seed", ablate.train_cfg.seed)->capture_default_str();
  ablate_cmd->add_option("--out-dir", ablate.out_dir)->capture_default_str();

  ExportArgs exp;
  CLI::App* export_cmd =
      app.add_subcommand("export-embeddings", "PCA-project one episode's geometry to 2-D");
  export_cmd->add_option("--checkpoint", exp.checkpoint)->required();
  export_cmd->add_option("--features", exp.features)->required();
  export_cmd->add_option("--semantics", exp.semantics)->required();
  export_cmd->add_option("--means", exp.means, "FGS1 ground-truth means (default: table means)");
  export_cmd->add_option("--way", exp.way)->check(CLI::Range(2u, 1000u))->capture_default_str();
  export_cmd->add_option("--shot", exp.shot)->check(CLI::PositiveNumber)->capture_default_str();
  export_cmd->add_option("--query", exp.query)->check(CLI::PositiveNumber)->capture_default_str();
  export_cmd->add_option("--episode-index", exp.episode_index)->capture_default_str();
  export_cmd->add_option("--lambda", exp.lambda)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  export_cmd->add_option("--mode", exp.mode)
      ->check(CLI::IsMember({"textual", "visual", "blend"}))
      ->capture_default_str();
  export_cmd->add_option("--alpha", exp.alpha)->check(CLI::Range(0.0f, 1.0f))->capture_default_str();
  export_cmd->add_option("--seed", exp.seed)->capture_default_str();
  export_cmd->add_option("--out-dir", exp.out_dir)->capture_default_str();

  // flat key=value config per subcommand; explicit flags take precedence
  for (CLI::App* sub : {synth_cmd, train_cmd, eval_cmd, ablate_cmd, export_cmd})
    sub->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (train_cmd->parsed()) {
      if (train_args.semantics.empty() && train_args.raw_semantics.empty())
        throw std::invalid_argument("train: --semantics or --raw-semantics is required");
      return run_train(train_args);
    }
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (ablate_cmd->parsed()) return run_ablate_alpha(ablate);
    if (export_cmd->parsed()) return run_export_embeddings(exp);
  } catch (const MissingClassError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingClass;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
