#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fewgen/activations.hpp"
#include "fewgen/gradcheck.hpp"
#include "fewgen/losses.hpp"
#include "fewgen/rng.hpp"
#include "helpers.hpp"

using namespace fewgen;
using fewgen::testing::random_matrix;

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

TEST_CASE("cce of a perfect one-hot prediction is ~0") {
  Matrix<float> p(1, 3);
  p.data = {1.0f, 0.0f, 0.0f};
  Matrix<float> t = p;
  CHECK(cce(p, t).value == Catch::Approx(0.0).margin(1e-5));
}

TEST_CASE("cce closed form: uniform binary prediction costs ln 2") {
  Matrix<float> p(1, 2);
  p.data = {0.5f, 0.5f};
  Matrix<float> t(1, 2);
  t.data = {1.0f, 0.0f};
  CHECK(cce(p, t).value == Catch::Approx(kLn2).margin(1e-6));
}

TEST_CASE("cce mean over identical rows equals the single-row value") {
  Matrix<float> p1(1, 2), p2(2, 2), t1(1, 2), t2(2, 2);
  p1.data = {0.3f, 0.7f};
  t1.data = {0.0f, 1.0f};
  p2.data = {0.3f, 0.7f, 0.3f, 0.7f};
  t2.data = {0.0f, 1.0f, 0.0f, 1.0f};
  CHECK(cce(p2, t2).value == Catch::Approx(cce(p1, t1).value).margin(1e-7));
}

TEST_CASE("cce rejects shape mismatch and non-one-hot targets") {
  Matrix<float> p(1, 2);
  p.data = {0.5f, 0.5f};
  Matrix<float> bad_shape(1, 3, 0.0f);
  CHECK_THROWS_AS(cce(p, bad_shape), ShapeError);
  Matrix<float> two_hot(1, 2, 1.0f);
  CHECK_THROWS_AS(cce(p, two_hot), DataError);
  Matrix<float> soft(1, 2);
  soft.data = {0.5f, 0.5f};
  CHECK_THROWS_AS(cce(p, soft), DataError);
}

TEST_CASE("cce rejects rows that do not sum to one") {
  Matrix<float> p(1, 2);
  p.data = {0.9f, 0.3f};
  Matrix<float> t(1, 2);
  t.data = {1.0f, 0.0f};
  CHECK_THROWS_AS(cce(p, t), DataError);
}

TEST_CASE("bce closed forms and symmetry") {
  Matrix<float> half(1, 1, 0.5f);
  Matrix<float> one(1, 1, 1.0f);
  Matrix<float> zero(1, 1, 0.0f);
  CHECK(bce(half, one).value == Catch::Approx(kLn2).margin(1e-6));
  CHECK(bce(half, zero).value == Catch::Approx(kLn2).margin(1e-6));

  Matrix<float> p(1, 1, 1.0f - 1e-7f);
  CHECK(bce(p, one).value == Catch::Approx(0.0).margin(1e-5));

  // bce(P, 1) == bce(1-P, 0)
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    float v = static_cast<float>(rng.uniform(0.01, 0.99));
    Matrix<float> a(1, 1, v), b(1, 1, 1.0f - v);
    CHECK(bce(a, one).value == Catch::Approx(bce(b, zero).value).margin(1e-6));
  }
}

TEST_CASE("bce rejects targets outside {0,1}") {
  Matrix<float> p(1, 1, 0.5f);
  Matrix<float> t(1, 1, 0.5f);
  CHECK_THROWS_AS(bce(p, t), DataError);
}

TEST_CASE("cdl identities: equal, orthogonal, antipodal") {
  Matrix<float> a(1, 3), b(1, 3);
  a.data = {1.0f, 2.0f, 3.0f};
  b.data = {1.0f, 2.0f, 3.0f};
  CHECK(cdl(a, b).value == Catch::Approx(0.0).margin(1e-6));

  a.data = {1.0f, 0.0f, 0.0f};
  b.data = {0.0f, 2.0f, 0.0f};
  CHECK(cdl(a, b).value == Catch::Approx(1.0).margin(1e-6));

  a.data = {1.0f, -2.0f, 0.5f};
  b.data = {-1.0f, 2.0f, -0.5f};
  CHECK(cdl(a, b).value == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("cdl is invariant to positive rescaling") {
  Rng rng(7);
  Matrix<double> a = random_matrix(rng, 4, 8);
  Matrix<double> b = random_matrix(rng, 4, 8);
  double base = cdl(a, b).value;
  for (double c : {0.25, 3.0, 117.0}) {
    CHECK(cdl(scale(a, c), b).value == Catch::Approx(base).margin(1e-9));
    CHECK(cdl(a, scale(b, c)).value == Catch::Approx(base).margin(1e-9));
  }
}

TEST_CASE("cdl handles zero vectors through the eps guard") {
  Matrix<float> a(1, 2, 0.0f);
  Matrix<float> b(1, 2);
  b.data = {1.0f, 0.0f};
  LossValue<float> lv = cdl(a, b);
  CHECK(lv.value == Catch::Approx(1.0));
  CHECK(lv.grad.all_finite());
}

TEST_CASE("cdl gradient w.r.t. the first argument matches finite differences") {
  Rng rng(11);
  Matrix<double> a = random_matrix(rng, 3, 6);
  Matrix<double> b = random_matrix(rng, 3, 6);
  LossValue<double> lv = cdl(a, b);
  auto f = [&](const std::vector<double>& flat) {
    Matrix<double> aa = a;
    aa.data = flat;
    return cdl(aa, b).value;
  };
  CHECK(grad_check(f, a.data, lv.grad.data) < 1e-5);
}

TEST_CASE("fused cce gradient matches finite differences through softmax") {
  Rng rng(13);
  for (int seed = 0; seed < 5; ++seed) {
    Rng r = rng.split(seed);
    Matrix<double> logits = random_matrix(r, 4, 5, 1.5);
    std::vector<std::uint32_t> labels = {0, 3, 1, 4};
    Matrix<double> target = one_hot<double>(labels, 5);
    LossValue<double> lv = cce(softmax_rows(logits), target);
    auto f = [&](const std::vector<double>& flat) {
      Matrix<double> z = logits;
      z.data = flat;
      return cce(softmax_rows(z), target).value;
    };
    CHECK(grad_check(f, logits.data, lv.grad.data) < 1e-4);
  }
}

TEST_CASE("fused bce gradient matches finite differences through sigmoid") {
  Rng rng(17);
  for (int seed = 0; seed < 5; ++seed) {
    Rng r = rng.split(seed);
    Matrix<double> logits = random_matrix(r, 6, 1, 2.0);
    Matrix<double> target(6, 1);
    for (std::size_t i = 0; i < 6; ++i) target.data[i] = (r.next_u32() & 1) ? 1.0 : 0.0;
    LossValue<double> lv = bce(sigmoid(logits), target);
    auto f = [&](const std::vector<double>& flat) {
      Matrix<double> z = logits;
      z.data = flat;
      return bce(sigmoid(z), target).value;
    };
    CHECK(grad_check(f, logits.data, lv.grad.data) < 1e-4);
  }
}

TEST_CASE("discriminator loss closed form and symmetry") {
  Matrix<float> real(2, 1, 0.5f), fake(2, 1, 0.5f);
  DiscriminatorLoss<float> l = discriminator_loss(real, fake);
  CHECK(l.value == Catch::Approx(2 * kLn2).margin(1e-6));

  Matrix<float> good_real(2, 1, 1.0f - 1e-7f), good_fake(2, 1, 1e-7f);
  CHECK(discriminator_loss(good_real, good_fake).value == Catch::Approx(0.0).margin(1e-5));

  // swapping arms with flipped targets gives the same value
  Rng rng(5);
  Matrix<float> p(3, 1), q(3, 1);
  for (int i = 0; i < 3; ++i) {
    p.data[i] = static_cast<float>(rng.uniform(0.05, 0.95));
    q.data[i] = static_cast<float>(rng.uniform(0.05, 0.95));
  }
  Matrix<float> p_flip(3, 1), q_flip(3, 1);
  for (int i = 0; i < 3; ++i) {
    p_flip.data[i] = 1.0f - p.data[i];
    q_flip.data[i] = 1.0f - q.data[i];
  }
  CHECK(discriminator_loss(p, q).value ==
        Catch::Approx(discriminator_loss(q_flip, p_flip).value).margin(1e-6));
}

TEST_CASE("generator loss is the exact sum of its components") {
  Rng rng(23);
  Matrix<float> gen(4, 8), embed(4, 8);
  fill_uniform(rng, gen, -1.0, 1.0);
  fill_uniform(rng, embed, -1.0, 1.0);
  Matrix<float> disc(4, 1);
  for (int i = 0; i < 4; ++i) disc.data[i] = static_cast<float>(rng.uniform(0.1, 0.9));
  Matrix<float> logits(4, 3);
  fill_uniform(rng, logits, -2.0, 2.0);
  Matrix<float> probs = softmax_rows(logits);
  std::vector<std::uint32_t> labels = {0, 1, 2, 1};

  GeneratorLoss<float> l = generator_loss(gen, embed, disc, probs, labels);
  float expected = l.cdl_term + l.bce_term + l.cce_term;
  CHECK(l.total == expected);  // same expression, identical rounding
  CHECK(l.cdl_term >= 0.0f);
  CHECK(l.bce_term >= 0.0f);
  CHECK(l.cce_term >= 0.0f);
}

TEST_CASE("generator loss at the optimum is ~0") {
  Matrix<float> gen(1, 4);
  gen.data = {0.5f, -0.25f, 1.0f, 0.0f};
  Matrix<float> embed = gen;
  Matrix<float> disc(1, 1, 1.0f - 1e-7f);
  Matrix<float> probs(1, 3);
  probs.data = {1.0f, 0.0f, 0.0f};
  std::vector<std::uint32_t> labels = {0};
  GeneratorLoss<float> l = generator_loss(gen, embed, disc, probs, labels);
  CHECK(l.total == Catch::Approx(0.0).margin(1e-5));
}

TEST_CASE("generator loss weights select components for the ablation") {
  Rng rng(29);
  Matrix<float> gen(2, 4), embed(2, 4);
  fill_uniform(rng, gen, -1.0, 1.0);
  fill_uniform(rng, embed, -1.0, 1.0);
  Matrix<float> disc(2, 1, 0.3f);
  Matrix<float> logits(2, 2);
  fill_uniform(rng, logits, -1.0, 1.0);
  Matrix<float> probs = softmax_rows(logits);
  std::vector<std::uint32_t> labels = {0, 1};

  GeneratorLossWeights<float> no_cdl{0.0f, 1.0f, 1.0f};
  GeneratorLoss<float> l = generator_loss(gen, embed, disc, probs, labels, no_cdl);
  CHECK(l.total == Catch::Approx(l.bce_term + l.cce_term).margin(1e-7));
  for (float v : l.grad_generated_cdl.data) CHECK(v == 0.0f);

  GeneratorLossWeights<float> no_disc{1.0f, 0.0f, 1.0f};
  GeneratorLoss<float> l2 = generator_loss(gen, embed, disc, probs, labels, no_disc);
  CHECK(l2.total == Catch::Approx(l2.cdl_term + l2.cce_term).margin(1e-7));
}

TEST_CASE("losses stay finite and non-negative on clamped extremes") {
  Matrix<float> p(1, 2);
  p.data = {1.0f, 0.0f};  // exactly saturated; clamp keeps the log finite
  Matrix<float> t(1, 2);
  t.data = {0.0f, 1.0f};  // worst case: confident and wrong
  LossValue<float> l = cce(p, t);
  CHECK(std::isfinite(l.value));
  CHECK(l.value >= 0.0f);

  Matrix<float> zero(1, 1, 0.0f), one_t(1, 1, 1.0f);
  LossValue<float> lb = bce(zero, one_t);
  CHECK(std::isfinite(lb.value));
  CHECK(lb.value >= 0.0f);
}
