#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "fewgen/dataset.hpp"
#include "fewgen/rng.hpp"

using namespace fewgen;

namespace {

FeatureTable tiny_table() {
  FeatureTable t;
  t.dim = 3;
  t.add(0, std::vector<float>{1.0f, 2.0f, 3.0f});
  t.add(1, std::vector<float>{-1.0f, 0.5f, 0.25f});
  t.add(0, std::vector<float>{3.0f, 4.0f, 5.0f});
  t.rebuild_index();
  return t;
}

std::string serialize_features(const FeatureTable& t) {
  std::ostringstream os(std::ios::binary);
  save_features(t, os);
  return os.str();
}

}  // namespace

TEST_CASE("feature table round-trips losslessly and rebuilds its index") {
  FeatureTable t = tiny_table();
  std::istringstream is(serialize_features(t));
  FeatureTable r = load_features(is);
  CHECK(r.dim == 3);
  CHECK(r.labels == t.labels);
  CHECK(r.data == t.data);
  REQUIRE(r.num_classes() == 2);
  CHECK(r.by_class[0] == std::vector<std::uint32_t>{0, 2});
  CHECK(r.by_class[1] == std::vector<std::uint32_t>{1});
}

TEST_CASE("feature file errors are distinct") {
  FeatureTable t = tiny_table();
  std::string bytes = serialize_features(t);

  SECTION("bad magic") {
    bytes[0] = 'Z';
    std::istringstream is(bytes);
    CHECK_THROWS_AS(load_features(is), FormatError);
  }
  SECTION("truncated record") {
    std::istringstream is(bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_features(is), TruncationError);
  }
  SECTION("declared dim 0") {
    bytes[4] = bytes[5] = bytes[6] = bytes[7] = 0;
    std::istringstream is(bytes);
    CHECK_THROWS_AS(load_features(is), ShapeError);
  }
  SECTION("non-dense labels") {
    FeatureTable sparse;
    sparse.dim = 2;
    sparse.add(0, std::vector<float>{1.0f, 2.0f});
    sparse.add(2, std::vector<float>{3.0f, 4.0f});  // label 1 missing
    std::ostringstream os(std::ios::binary);
    save_features(sparse, os);
    std::istringstream is(os.str());
    CHECK_THROWS_AS(load_features(is), DataError);
  }
}

TEST_CASE("semantic table round-trips through FGS1") {
  SemanticTable s;
  s.dim = 2;
  s.vectors = {{0.5f, -0.5f}, {1.5f, 2.5f}, {0.0f, 1.0f}};
  std::ostringstream os(std::ios::binary);
  save_semantics(s, os);
  std::istringstream is(os.str());
  SemanticTable r = load_semantics(is);
  CHECK(r.dim == 2);
  REQUIRE(r.num_classes() == 3);
  CHECK(r.vectors == s.vectors);
}

TEST_CASE("raw semantics parse, validate and average") {
  std::istringstream text(
      "0\t2\t1.0,2.0,3.0\t3.0,4.0,5.0\n"
      "1\t1\t-1.5,0.5,2.25\n");
  RawSemantics raw = load_raw_semantics(text);
  CHECK(raw.dim == 3);
  SemanticTable t = average_semantics(raw);
  REQUIRE(t.num_classes() == 2);
  CHECK(t.vectors[0] == std::vector<float>{2.0f, 3.0f, 4.0f});
  CHECK(t.vectors[1] == std::vector<float>{-1.5f, 0.5f, 2.25f});
}

TEST_CASE("raw semantics reject malformed lines") {
  std::istringstream missing_vec("0\t2\t1.0,2.0\n");
  CHECK_THROWS_AS(load_raw_semantics(missing_vec), FormatError);
  std::istringstream bad_float("0\t1\t1.0,zap\n");
  CHECK_THROWS_AS(load_raw_semantics(bad_float), FormatError);
  std::istringstream zero_k("0\t0\t\n");
  CHECK_THROWS_AS(load_raw_semantics(zero_k), Error);
  std::istringstream ragged("0\t2\t1.0,2.0\t1.0\n");
  CHECK_THROWS_AS(load_raw_semantics(ragged), ShapeError);
}

TEST_CASE("average_semantics special cases") {
  RawSemantics raw;
  raw.dim = 2;
  raw.sentences[0] = {{2.0f, 4.0f}};                          // K = 1: identity
  raw.sentences[1] = {{1.0f, -1.0f}, {-1.0f, 1.0f}};          // v and -v: zero
  raw.sentences[2] = {{3.0f, 3.0f}, {3.0f, 3.0f}, {3.0f, 3.0f}};  // idempotent
  SemanticTable t = average_semantics(raw);
  CHECK(t.vectors[0] == std::vector<float>{2.0f, 4.0f});
  CHECK(t.vectors[1] == std::vector<float>{0.0f, 0.0f});
  CHECK(t.vectors[2] == std::vector<float>{3.0f, 3.0f});
}

TEST_CASE("average_semantics is permutation invariant in sentence order") {
  RawSemantics a, b;
  a.dim = b.dim = 2;
  a.sentences[0] = {{1.0f, 2.0f}, {5.0f, -2.0f}, {0.5f, 0.5f}};
  b.sentences[0] = {{0.5f, 0.5f}, {1.0f, 2.0f}, {5.0f, -2.0f}};
  CHECK(average_semantics(a).vectors[0] == average_semantics(b).vectors[0]);
}

TEST_CASE("true class embeddings are per-class means") {
  FeatureTable t = tiny_table();
  EmbeddingTable e = true_class_embeddings(t);
  REQUIRE(e.vectors.size() == 2);
  CHECK(e.vectors[0] == std::vector<float>{2.0f, 3.0f, 4.0f});  // midpoint
  CHECK(e.vectors[1] == std::vector<float>{-1.0f, 0.5f, 0.25f});  // mean of one
}

TEST_CASE("true class embeddings ignore record order") {
  FeatureTable a = tiny_table();
  FeatureTable b;
  b.dim = 3;
  b.add(0, std::vector<float>{3.0f, 4.0f, 5.0f});
  b.add(0, std::vector<float>{1.0f, 2.0f, 3.0f});
  b.add(1, std::vector<float>{-1.0f, 0.5f, 0.25f});
  b.rebuild_index();
  CHECK(true_class_embeddings(a).vectors == true_class_embeddings(b).vectors);
}
