#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fewgen/checkpoint.hpp"  // binio helpers + endianness assert
#include "fewgen/errors.hpp"

namespace fewgen {

// Labeled visual feature vectors. Labels must be dense 0..n-1 within a split.
struct FeatureTable {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> labels;
  std::vector<float> data;  // labels.size() x dim, row-major
  std::vector<std::vector<std::uint32_t>> by_class;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return by_class.size(); }

  std::span<const float> feature(std::size_t i) const { return {data.data() + i * dim, dim}; }

  void add(std::uint32_t label, std::span<const float> f) {
    if (f.size() != dim)
      throw ShapeError("FeatureTable::add: feature length " + std::to_string(f.size()) +
                       ", table dim " + std::to_string(dim));
    labels.push_back(label);
    data.insert(data.end(), f.begin(), f.end());
  }

  void rebuild_index() {
    std::uint32_t max_label = 0;
    for (std::uint32_t l : labels) max_label = std::max(max_label, l);
    by_class.assign(labels.empty() ? 0 : max_label + 1, {});
    for (std::size_t i = 0; i < labels.size(); ++i)
      by_class[labels[i]].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t c = 0; c < by_class.size(); ++c)
      if (by_class[c].empty())
        throw DataError("FeatureTable: labels are not dense, class " + std::to_string(c) +
                        " has no records");
  }
};

// One class-level semantic vector per class, densely labeled.
struct SemanticTable {
  std::uint32_t dim = 0;
  std::vector<std::vector<float>> vectors;  // indexed by label

  std::size_t num_classes() const { return vectors.size(); }
  bool has(std::uint32_t label) const {
    return label < vectors.size() && !vectors[label].empty();
  }
  std::span<const float> vec(std::uint32_t label) const {
    if (!has(label))
      throw MissingClassError("no semantic vector for class " + std::to_string(label));
    return vectors[label];
  }
};

// Per-class mean feature vectors (the true class embeddings).
struct EmbeddingTable {
  std::uint32_t dim = 0;
  std::vector<std::vector<float>> vectors;

  bool has(std::uint32_t label) const {
    return label < vectors.size() && !vectors[label].empty();
  }
  std::span<const float> vec(std::uint32_t label) const {
    if (!has(label)) throw MissingClassError("no embedding for class " + std::to_string(label));
    return vectors[label];
  }
};

// --- FGF1: labeled visual feature file -------------------------------------
// magic "FGF1", u32 dim, u64 record count, records of {u32 label, dim x f32}

namespace detail {
inline constexpr char kFeatureMagic[4] = {'F', 'G', 'F', '1'};
inline constexpr char kSemanticMagic[4] = {'F', 'G', 'S', '1'};
}  // namespace detail

inline void save_features(const FeatureTable& t, std::ostream& os) {
  binio::write_bytes(os, detail::kFeatureMagic, 4);
  binio::write_pod<std::uint32_t>(os, t.dim);
  binio::write_pod<std::uint64_t>(os, t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    binio::write_pod<std::uint32_t>(os, t.labels[i]);
    binio::write_f32_array(os, t.data.data() + i * t.dim, t.dim);
  }
}

inline void save_features(const FeatureTable& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  save_features(t, os);
  os.flush();
  if (!os) throw IoError("short write to " + path.string());
}

inline FeatureTable load_features(std::istream& is) {
  char magic[4];
  binio::read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, detail::kFeatureMagic, 4) != 0)
    throw FormatError("not a feature file: bad magic");
  FeatureTable t;
  t.dim = binio::read_pod<std::uint32_t>(is, "dim");
  if (t.dim == 0) throw ShapeError("feature file declares dim 0");
  const auto count = binio::read_pod<std::uint64_t>(is, "record count");
  t.labels.reserve(count);
  t.data.reserve(count * t.dim);
  std::vector<float> buf(t.dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    t.labels.push_back(binio::read_pod<std::uint32_t>(is, "record label"));
    binio::read_f32_array(is, buf.data(), t.dim, "record feature");
    t.data.insert(t.data.end(), buf.begin(), buf.end());
  }
  is.peek();
  if (!is.eof()) throw FormatError("trailing bytes after feature records");
  t.rebuild_index();
  return t;
}

inline FeatureTable load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return load_features(is);
}

// --- FGS1: per-class vector file --------------------------------------------
// magic "FGS1", u32 dim, u32 class count, then {u32 label, dim x f32}.
// Used for averaged semantics and for per-class mean tables.

inline void save_semantics(const SemanticTable& t, std::ostream& os) {
  binio::write_bytes(os, detail::kSemanticMagic, 4);
  binio::write_pod<std::uint32_t>(os, t.dim);
  binio::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(t.num_classes()));
  for (std::uint32_t label = 0; label < t.num_classes(); ++label) {
    binio::write_pod<std::uint32_t>(os, label);
    binio::write_f32_array(os, t.vectors[label].data(), t.dim);
  }
}

inline void save_semantics(const SemanticTable& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  save_semantics(t, os);
  os.flush();
  if (!os) throw IoError("short write to " + path.string());
}

inline SemanticTable load_semantics(std::istream& is) {
  char magic[4];
  binio::read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, detail::kSemanticMagic, 4) != 0)
    throw FormatError("not a semantic file: bad magic");
  SemanticTable t;
  t.dim = binio::read_pod<std::uint32_t>(is, "dim");
  if (t.dim == 0) throw ShapeError("semantic file declares dim 0");
  const auto count = binio::read_pod<std::uint32_t>(is, "class count");
  t.vectors.assign(count, {});
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto label = binio::read_pod<std::uint32_t>(is, "class label");
    if (label >= count)
      throw DataError("semantic file labels are not dense: label " + std::to_string(label) +
                      " with " + std::to_string(count) + " classes");
    if (!t.vectors[label].empty())
      throw DataError("semantic file repeats label " + std::to_string(label));
    t.vectors[label].resize(t.dim);
    binio::read_f32_array(is, t.vectors[label].data(), t.dim, "class vector");
  }
  is.peek();
  if (!is.eof()) throw FormatError("trailing bytes after semantic records");
  return t;
}

inline SemanticTable load_semantics(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return load_semantics(is);
}

// --- Raw per-sentence semantics ---------------------------------------------
// Text format, one class per line:
//   label<TAB>K<TAB>v11,v12,...<TAB>v21,...   (K comma-separated vectors)

struct RawSemantics {
  std::uint32_t dim = 0;
  std::map<std::uint32_t, std::vector<std::vector<float>>> sentences;
};

namespace detail {
inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline float parse_float(const std::string& s, std::size_t line_no) {
  float v = 0.0f;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw FormatError("raw semantics line " + std::to_string(line_no) + ": bad float '" + s + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line_no, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("raw semantics line " + std::to_string(line_no) + ": bad " + what + " '" +
                      s + "'");
  return v;
}
}  // namespace detail

inline RawSemantics load_raw_semantics(std::istream& is) {
  RawSemantics raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = detail::split_on(line, '\t');
    if (fields.size() < 3)
      throw FormatError("raw semantics line " + std::to_string(line_no) +
                        ": expected label, K and K vectors");
    const auto label =
        static_cast<std::uint32_t>(detail::parse_uint(fields[0], line_no, "label"));
    const auto k = detail::parse_uint(fields[1], line_no, "sentence count");
    if (k == 0)
      throw DataError("raw semantics line " + std::to_string(line_no) + ": class " +
                      std::to_string(label) + " has zero sentence vectors");
    if (fields.size() != 2 + k)
      throw FormatError("raw semantics line " + std::to_string(line_no) + ": declared " +
                        std::to_string(k) + " vectors, found " + std::to_string(fields.size() - 2));
    if (raw.sentences.count(label))
      throw DataError("raw semantics: duplicate class " + std::to_string(label));
    std::vector<std::vector<float>> vecs;
    for (std::uint64_t i = 0; i < k; ++i) {
      auto comps = detail::split_on(fields[2 + i], ',');
      std::vector<float> v;
      v.reserve(comps.size());
      for (const auto& c : comps) v.push_back(detail::parse_float(c, line_no));
      if (raw.dim == 0) raw.dim = static_cast<std::uint32_t>(v.size());
      if (v.size() != raw.dim)
        throw ShapeError("raw semantics line " + std::to_string(line_no) + ": vector length " +
                         std::to_string(v.size()) + ", expected " + std::to_string(raw.dim));
      vecs.push_back(std::move(v));
    }
    raw.sentences.emplace(label, std::move(vecs));
  }
  if (raw.dim == 0) throw ShapeError("raw semantics: no vectors found");
  return raw;
}

inline RawSemantics load_raw_semantics(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return load_raw_semantics(is);
}

// Arithmetic mean of each class's K sentence vectors.
inline SemanticTable average_semantics(const RawSemantics& raw) {
  SemanticTable t;
  t.dim = raw.dim;
  std::uint32_t max_label = 0;
  for (const auto& [label, vecs] : raw.sentences) max_label = std::max(max_label, label);
  t.vectors.assign(raw.sentences.empty() ? 0 : max_label + 1, {});
  for (const auto& [label, vecs] : raw.sentences) {
    if (vecs.empty())
      throw DataError("average_semantics: class " + std::to_string(label) + " has no vectors");
    std::vector<float> mean(t.dim, 0.0f);
    for (const auto& v : vecs)
      for (std::size_t j = 0; j < t.dim; ++j) mean[j] += v[j];
    for (float& m : mean) m /= static_cast<float>(vecs.size());
    t.vectors[label] = std::move(mean);
  }
  for (std::uint32_t label = 0; label < t.vectors.size(); ++label)
    if (t.vectors[label].empty())
      throw DataError("average_semantics: labels are not dense, class " + std::to_string(label) +
                      " missing");
  return t;
}

// t_k = mean of all features labeled k.
inline EmbeddingTable true_class_embeddings(const FeatureTable& table) {
  EmbeddingTable e;
  e.dim = table.dim;
  e.vectors.assign(table.num_classes(), {});
  for (std::size_t c = 0; c < table.num_classes(); ++c) {
    const auto& members = table.by_class[c];
    if (members.empty())
      throw DataError("true_class_embeddings: class " + std::to_string(c) + " is empty");
    std::vector<float> mean(table.dim, 0.0f);
    for (std::uint32_t idx : members) {
      auto f = table.feature(idx);
      for (std::size_t j = 0; j < table.dim; ++j) mean[j] += f[j];
    }
    for (float& m : mean) m /= static_cast<float>(members.size());
    e.vectors[c] = std::move(mean);
  }
  return e;
}

}  // namespace fewgen
