#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "fewgen/models.hpp"

namespace fewgen {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and table formats are little-endian; big-endian hosts unsupported");

namespace binio {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  write_bytes(os, &v, sizeof(T));
}

inline void write_f32_array(std::ostream& os, const float* p, std::size_t n) {
  write_bytes(os, p, n * sizeof(float));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const char* what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw TruncationError(std::string("unexpected end of file while reading ") + what);
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
  T v;
  read_bytes(is, &v, sizeof(T), what);
  return v;
}

inline void read_f32_array(std::istream& is, float* p, std::size_t n, const char* what) {
  read_bytes(is, p, n * sizeof(float), what);
}

}  // namespace binio

namespace detail {

inline constexpr char kCheckpointMagic[4] = {'F', 'G', 'C', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kFlagNorm = 0x01;
inline constexpr std::uint8_t kFlagAdam = 0x02;
inline constexpr unsigned kActShift = 4;

inline void write_model(std::ostream& os, const Mlp<float>& m, const AdamState<float>* opt) {
  binio::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(m.layers.size()));
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const DenseLayer<float>& layer = m.layers[l];
    binio::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.in_dim()));
    binio::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.out_dim()));
    binio::write_f32_array(os, layer.weight.data.data(), layer.weight.data.size());
    binio::write_f32_array(os, layer.bias.data(), layer.bias.size());
    std::uint8_t flags = static_cast<std::uint8_t>(static_cast<unsigned>(layer.act) << kActShift);
    if (layer.norm) flags |= kFlagNorm;
    if (opt) flags |= kFlagAdam;
    binio::write_pod<std::uint8_t>(os, flags);
    if (layer.norm) {
      const BatchNorm<float>& bn = *layer.norm;
      binio::write_f32_array(os, bn.gamma.data(), bn.gamma.size());
      binio::write_f32_array(os, bn.beta.data(), bn.beta.size());
      binio::write_f32_array(os, bn.running_mean.data(), bn.running_mean.size());
      binio::write_f32_array(os, bn.running_var.data(), bn.running_var.size());
    }
    if (opt) {
      binio::write_f32_array(os, opt->m[l].data(), opt->m[l].size());
      binio::write_f32_array(os, opt->v[l].data(), opt->v[l].size());
      binio::write_pod<std::uint64_t>(os, opt->step);
    }
  }
}

inline void read_model(std::istream& is, Mlp<float>& m, AdamState<float>& opt, float leaky_slope,
                       const char* name) {
  const std::uint32_t layer_count = binio::read_pod<std::uint32_t>(is, "layer count");
  if (layer_count == 0) throw ShapeError(std::string(name) + ": zero layers in checkpoint");
  m.layers.clear();
  opt.m.clear();
  opt.v.clear();
  bool have_step = false;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint32_t in_dim = binio::read_pod<std::uint32_t>(is, "layer in-dim");
    const std::uint32_t out_dim = binio::read_pod<std::uint32_t>(is, "layer out-dim");
    if (in_dim == 0 || out_dim == 0)
      throw ShapeError(std::string(name) + ": zero layer dimension in checkpoint");
    if (!m.layers.empty() && m.layers.back().out_dim() != in_dim)
      throw ShapeError(std::string(name) + ": layer " + std::to_string(l) + " expects " +
                       std::to_string(in_dim) + " inputs but previous layer emits " +
                       std::to_string(m.layers.back().out_dim()));
    DenseLayer<float> layer;
    layer.weight = Matrix<float>(in_dim, out_dim);
    layer.bias.assign(out_dim, 0.0f);
    layer.leaky_slope = leaky_slope;
    binio::read_f32_array(is, layer.weight.data.data(), layer.weight.data.size(), "weights");
    binio::read_f32_array(is, layer.bias.data(), layer.bias.size(), "biases");
    const std::uint8_t flags = binio::read_pod<std::uint8_t>(is, "layer flags");
    const unsigned act = (flags >> kActShift) & 0x7u;
    if (act > 3) throw FormatError(std::string(name) + ": unknown activation code");
    layer.act = static_cast<Activation>(act);
    if (flags & kFlagNorm) {
      BatchNorm<float> bn(out_dim);
      binio::read_f32_array(is, bn.gamma.data(), out_dim, "bn gamma");
      binio::read_f32_array(is, bn.beta.data(), out_dim, "bn beta");
      binio::read_f32_array(is, bn.running_mean.data(), out_dim, "bn running mean");
      binio::read_f32_array(is, bn.running_var.data(), out_dim, "bn running var");
      layer.norm = std::move(bn);
    }
    m.layers.push_back(std::move(layer));
    if (flags & kFlagAdam) {
      const std::size_t n = m.layers.back().param_count();
      std::vector<float> mm(n), vv(n);
      binio::read_f32_array(is, mm.data(), n, "adam m");
      binio::read_f32_array(is, vv.data(), n, "adam v");
      const std::uint64_t step = binio::read_pod<std::uint64_t>(is, "adam step");
      if (have_step && step != opt.step)
        throw FormatError(std::string(name) + ": inconsistent optimizer step across layers");
      opt.step = step;
      have_step = true;
      opt.m.push_back(std::move(mm));
      opt.v.push_back(std::move(vv));
    } else {
      opt.m.emplace_back(m.layers.back().param_count(), 0.0f);
      opt.v.emplace_back(m.layers.back().param_count(), 0.0f);
    }
  }
}

inline ModelDims dims_from_models(const Mlp<float>& gen, const Mlp<float>& disc,
                                  const Mlp<float>& cls, float leaky_slope) {
  ModelDims d;
  d.d_semantic = gen.in_dim();
  d.d_visual = gen.out_dim();
  d.c_train = cls.out_dim();
  d.leaky_slope = leaky_slope;
  d.gen_hidden.clear();
  for (std::size_t l = 0; l + 1 < gen.layers.size(); ++l)
    d.gen_hidden.push_back(gen.layers[l].out_dim());
  d.disc_hidden.clear();
  for (std::size_t l = 0; l + 1 < disc.layers.size(); ++l)
    d.disc_hidden.push_back(disc.layers[l].out_dim());
  d.cls_hidden.clear();
  for (std::size_t l = 0; l + 1 < cls.layers.size(); ++l)
    d.cls_hidden.push_back(cls.layers[l].out_dim());
  d.classifier_sigmoid_output = (cls.layers.back().act == Activation::Sigmoid);
  return d;
}

}  // namespace detail

inline void save_checkpoint(const ModelBundle<float>& b, std::ostream& os) {
  binio::write_bytes(os, detail::kCheckpointMagic, 4);
  binio::write_pod<std::uint16_t>(os, detail::kCheckpointVersion);
  detail::write_model(os, b.generator, &b.gen_opt);
  detail::write_model(os, b.discriminator, &b.disc_opt);
  detail::write_model(os, b.classifier, &b.cls_opt);
}

inline void save_checkpoint(const ModelBundle<float>& b, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  save_checkpoint(b, os);
  os.flush();
  if (!os) throw IoError("short write to " + path.string());
}

inline ModelBundle<float> load_checkpoint(std::istream& is, float leaky_slope = 0.2f) {
  char magic[4];
  binio::read_bytes(is, magic, 4, "magic");
  if (std::memcmp(magic, detail::kCheckpointMagic, 4) != 0)
    throw FormatError("not a checkpoint file: bad magic");
  const auto version = binio::read_pod<std::uint16_t>(is, "version");
  if (version != detail::kCheckpointVersion)
    throw VersionError("unsupported checkpoint version " + std::to_string(version));
  ModelBundle<float> b;
  detail::read_model(is, b.generator, b.gen_opt, leaky_slope, "generator");
  detail::read_model(is, b.discriminator, b.disc_opt, leaky_slope, "discriminator");
  detail::read_model(is, b.classifier, b.cls_opt, leaky_slope, "classifier");
  if (b.discriminator.out_dim() != 1)
    throw ShapeError("discriminator output dim " + std::to_string(b.discriminator.out_dim()) +
                     ", expected 1");
  if (b.discriminator.in_dim() != b.generator.out_dim() ||
      b.classifier.in_dim() != b.generator.out_dim())
    throw ShapeError("model input dims do not chain with the generator output");
  is.peek();
  if (!is.eof()) throw FormatError("trailing bytes after checkpoint payload");
  b.dims = detail::dims_from_models(b.generator, b.discriminator, b.classifier, leaky_slope);
  return b;
}

inline ModelBundle<float> load_checkpoint(const std::filesystem::path& path,
                                          float leaky_slope = 0.2f) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return load_checkpoint(is, leaky_slope);
}

}  // namespace fewgen
