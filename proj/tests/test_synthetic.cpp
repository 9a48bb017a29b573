#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fewgen/synthetic.hpp"
#include "fewgen/vec.hpp"

using namespace fewgen;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.train_classes = 4;
  s.test_classes = 3;
  s.per_class = 50;
  s.d_visual = 8;
  s.d_semantic = 8;
  s.sigma = 0.2f;
  return s;
}

}  // namespace

TEST_CASE("synthetic generation is reproducible from the seed") {
  SyntheticSpec spec = small_spec();
  Rng a(9), b(9);
  SyntheticData d1 = make_synthetic(spec, a);
  SyntheticData d2 = make_synthetic(spec, b);
  CHECK(d1.train.data == d2.train.data);
  CHECK(d1.test.data == d2.test.data);
  CHECK(d1.train_semantics.vectors == d2.train_semantics.vectors);
  CHECK(d1.test_means.vectors == d2.test_means.vectors);
}

TEST_CASE("sigma 0 collapses every feature onto the class mean") {
  SyntheticSpec spec = small_spec();
  spec.sigma = 0.0f;
  Rng rng(3);
  SyntheticData d = make_synthetic(spec, rng);
  EmbeddingTable emp = true_class_embeddings(d.train);
  // averaging identical floats rounds at each partial sum; exact up to that
  for (std::size_t c = 0; c < spec.train_classes; ++c)
    for (std::size_t j = 0; j < spec.d_visual; ++j)
      CHECK(emp.vectors[c][j] == Catch::Approx(d.train_means.vectors[c][j]).margin(1e-6));
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    auto f = d.train.feature(i);
    const auto& mu = d.train_means.vectors[d.train.labels[i]];
    for (std::size_t j = 0; j < f.size(); ++j) CHECK(f[j] == mu[j]);
  }
}

TEST_CASE("class means are unit norm and empirical means approach them") {
  SyntheticSpec spec = small_spec();
  spec.per_class = 400;
  Rng rng(5);
  SyntheticData d = make_synthetic(spec, rng);
  for (const auto& mu : d.train_means.vectors)
    CHECK(l2_norm<float>(mu) == Catch::Approx(1.0).margin(1e-5));

  EmbeddingTable emp = true_class_embeddings(d.train);
  const double bound = 3.0 * spec.sigma / std::sqrt(static_cast<double>(spec.per_class));
  std::size_t violations = 0;
  for (std::size_t c = 0; c < spec.train_classes; ++c)
    for (std::size_t j = 0; j < spec.d_visual; ++j)
      if (std::abs(emp.vectors[c][j] - d.train_means.vectors[c][j]) > bound) ++violations;
  // a 3-sigma bound admits rare excursions; the bulk must hold
  CHECK(violations <= spec.train_classes * spec.d_visual / 100 + 1);
}

TEST_CASE("train and test splits have the declared shapes and dense labels") {
  SyntheticSpec spec = small_spec();
  Rng rng(7);
  SyntheticData d = make_synthetic(spec, rng);
  CHECK(d.train.num_classes() == spec.train_classes);
  CHECK(d.test.num_classes() == spec.test_classes);
  CHECK(d.train.size() == spec.train_classes * spec.per_class);
  CHECK(d.test.size() == spec.test_classes * spec.per_class);
  CHECK(d.train_semantics.num_classes() == spec.train_classes);
  CHECK(d.test_semantics.num_classes() == spec.test_classes);
}

TEST_CASE("train and test class means are distinct sets") {
  SyntheticSpec spec = small_spec();
  Rng rng(11);
  SyntheticData d = make_synthetic(spec, rng);
  for (const auto& tr : d.train_means.vectors)
    for (const auto& te : d.test_means.vectors) CHECK(tr != te);
}

TEST_CASE("semantics encode class identity through the fixed map") {
  SyntheticSpec spec = small_spec();
  spec.semantic_noise = 0.0f;
  Rng rng(13);
  SyntheticData d = make_synthetic(spec, rng);
  // with square d_sem = d_vis and zero noise the map is a rotation:
  // |s_c| = |mu_c| = 1 and distinct classes stay distinct
  for (const auto& s : d.train_semantics.vectors)
    CHECK(l2_norm<float>(s) == Catch::Approx(1.0).margin(1e-4));
  for (std::size_t a = 0; a < spec.train_classes; ++a)
    for (std::size_t b = a + 1; b < spec.train_classes; ++b)
      CHECK(cosine_distance<float>(d.train_semantics.vectors[a],
                                   d.train_semantics.vectors[b]) > 1e-3);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec bad = small_spec();
  bad.per_class = 0;
  Rng rng(1);
  CHECK_THROWS_AS(make_synthetic(bad, rng), std::invalid_argument);
  bad = small_spec();
  bad.sigma = -1.0f;
  CHECK_THROWS_AS(make_synthetic(bad, rng), std::invalid_argument);
}
