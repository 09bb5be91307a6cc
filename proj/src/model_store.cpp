/**
 * Copyright 2026 The adderptq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "adderptq/model_store.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <type_traits>
#include <variant>

#include "json.hpp"

namespace adderptq {
namespace {

using nlohmann::json;  // std::map-backed: keys serialize sorted, so dumps
                       // of equal content are byte-identical

constexpr char kMagic[8] = {'A', 'D', 'P', 'T', 'Q', 'C', '0', '1'};
constexpr std::int64_t kFormatVersion = 1;
constexpr std::size_t kAlign = 16;

std::size_t aligned(std::size_t n) { return (n + kAlign - 1) / kAlign * kAlign; }

// All payloads are encoded little-endian byte by byte, independent of host
// order, so container fixtures are portable.
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_i32(std::string& out, std::int32_t v) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }

std::int32_t get_i32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<std::int32_t>(v);
}

template <typename T>
T manifest_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: bad or missing field '") + key + "': " + e.what());
  }
}

std::vector<Index> manifest_dims(const json& j, const char* key) {
  const auto raw = manifest_field<std::vector<std::int64_t>>(j, key);
  std::vector<Index> dims;
  dims.reserve(raw.size());
  for (std::int64_t d : raw) {
    if (d < 1) throw ParseError("manifest: non-positive dim in '" + std::string(key) + "'");
    dims.push_back(static_cast<Index>(d));
  }
  return dims;
}

class Writer {
 public:
  void add_f64(const std::string& name, std::vector<Index> dims, const double* data, Index n) {
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(n) * 8);
    for (Index i = 0; i < n; ++i) put_f64(bytes, data[i]);
    add(name, "f64", std::move(dims), std::move(bytes));
  }

  void add_f64(const std::string& name, const TensorF& t) {
    add_f64(name, t.shape().dims(), t.data(), t.size());
  }

  void add_f64(const std::string& name, const std::vector<double>& v) {
    add_f64(name, {static_cast<Index>(v.size())}, v.data(), static_cast<Index>(v.size()));
  }

  void add_i32(const std::string& name, const TensorI& t) {
    std::string bytes;
    bytes.reserve(static_cast<std::size_t>(t.size()) * 4);
    for (Index i = 0; i < t.size(); ++i) put_i32(bytes, t.data()[i]);
    add(name, "i32", t.shape().dims(), std::move(bytes));
  }

  // Assembles magic | u64 manifest length | manifest JSON | padding | blobs.
  void write(const std::string& path, const char* kind, json body) const {
    body["format"] = "adderptq-container";
    body["version"] = kFormatVersion;
    body["kind"] = kind;
    body["blobs"] = table_;
    const std::string manifest = body.dump();

    std::string out(kMagic, sizeof(kMagic));
    put_u64(out, manifest.size());
    out += manifest;
    out.resize(aligned(out.size()), '\0');
    out += region_;

    std::ofstream ofs(path, std::ios::binary | std::ios::trunc);
    if (!ofs) throw IoError("cannot open '" + path + "' for writing");
    ofs.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!ofs.good()) throw IoError("write to '" + path + "' failed");
  }

 private:
  void add(const std::string& name, const char* dtype, std::vector<Index> dims,
           std::string bytes) {
    if (names_.count(name) != 0) throw ConfigError("duplicate blob name '" + name + "'");
    names_.insert(name);
    region_.resize(aligned(region_.size()), '\0');
    json entry;
    entry["name"] = name;
    entry["dtype"] = dtype;
    entry["shape"] = dims;
    entry["offset"] = region_.size();
    entry["nbytes"] = bytes.size();
    table_.push_back(std::move(entry));
    region_ += bytes;
  }

  json table_ = json::array();
  std::string region_;
  std::set<std::string> names_;
};

struct BlobEntry {
  std::string dtype;
  std::vector<Index> dims;
  std::size_t offset = 0;
  std::size_t nbytes = 0;
};

class Reader {
 public:
  explicit Reader(const std::string& path) {
    std::ifstream ifs(path, std::ios::binary);
    if (!ifs) throw IoError("cannot open '" + path + "' for reading");
    std::string raw((std::istreambuf_iterator<char>(ifs)), std::istreambuf_iterator<char>());
    if (!ifs.good() && !ifs.eof()) throw IoError("read from '" + path + "' failed");

    if (raw.size() < sizeof(kMagic) + 8) throw ParseError("truncated container header");
    if (raw.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
      throw ParseError("not a container file (bad magic)");
    }
    const std::uint64_t manifest_len =
        get_u64(reinterpret_cast<const unsigned char*>(raw.data()) + sizeof(kMagic));
    const std::size_t header = sizeof(kMagic) + 8;
    if (manifest_len > raw.size() - header) throw ParseError("truncated manifest");

    try {
      manifest_ = json::parse(raw.substr(header, manifest_len));
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (manifest_field<std::string>(manifest_, "format") != "adderptq-container") {
      throw ParseError("manifest does not declare the container format");
    }
    const auto version = manifest_field<std::int64_t>(manifest_, "version");
    if (version != kFormatVersion) {
      throw ParseError("unsupported container version " + std::to_string(version));
    }

    region_ = raw.substr(std::min(aligned(header + manifest_len), raw.size()));
    for (const json& entry : manifest_field<json>(manifest_, "blobs")) {
      BlobEntry blob;
      const auto name = manifest_field<std::string>(entry, "name");
      blob.dtype = manifest_field<std::string>(entry, "dtype");
      blob.dims = manifest_dims(entry, "shape");
      blob.offset = manifest_field<std::uint64_t>(entry, "offset");
      blob.nbytes = manifest_field<std::uint64_t>(entry, "nbytes");

      std::size_t width = 0;
      if (blob.dtype == "f64") {
        width = 8;
      } else if (blob.dtype == "i32") {
        width = 4;
      } else {
        throw ParseError("blob '" + name + "' has unknown dtype '" + blob.dtype + "'");
      }
      std::size_t numel = 1;
      for (Index d : blob.dims) numel *= static_cast<std::size_t>(d);
      if (numel * width != blob.nbytes) {
        throw ParseError("blob '" + name + "' length does not match its shape");
      }
      if (blob.offset % kAlign != 0 || blob.offset > region_.size() ||
          blob.nbytes > region_.size() - blob.offset) {
        throw ParseError("blob '" + name + "' lies outside the container");
      }
      if (!blobs_.emplace(name, std::move(blob)).second) {
        throw ParseError("duplicate blob name '" + name + "'");
      }
    }
  }

  const json& manifest() const { return manifest_; }

  std::vector<double> f64(const std::string& name, Index expected) const {
    const BlobEntry& blob = find(name, "f64");
    std::vector<double> out(blob.nbytes / 8);
    if (expected >= 0 && static_cast<Index>(out.size()) != expected) {
      throw ParseError("blob '" + name + "' holds " + std::to_string(out.size()) +
                       " values, expected " + std::to_string(expected));
    }
    const auto* p = reinterpret_cast<const unsigned char*>(region_.data()) + blob.offset;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_f64(p + 8 * i);
    return out;
  }

  TensorF tensor_f64(const std::string& name) const {
    const BlobEntry& blob = find(name, "f64");
    const std::vector<double> values = f64(name, -1);
    return TensorF(Shape(blob.dims),
                   Eigen::Map<const ArrayF>(values.data(), static_cast<Index>(values.size())));
  }

  TensorI tensor_i32(const std::string& name) const {
    const BlobEntry& blob = find(name, "i32");
    ArrayI values(static_cast<Index>(blob.nbytes / 4));
    const auto* p = reinterpret_cast<const unsigned char*>(region_.data()) + blob.offset;
    for (Index i = 0; i < values.size(); ++i) values[i] = get_i32(p + 4 * i);
    return TensorI(Shape(blob.dims), values);
  }

 private:
  const BlobEntry& find(const std::string& name, const char* dtype) const {
    const auto it = blobs_.find(name);
    if (it == blobs_.end()) throw ParseError("manifest references missing blob '" + name + "'");
    if (it->second.dtype != dtype) {
      throw ParseError("blob '" + name + "' is " + it->second.dtype + ", expected " + dtype);
    }
    return it->second;
  }

  json manifest_;
  std::string region_;
  std::map<std::string, BlobEntry> blobs_;
};

std::string layer_prefix(std::size_t i) { return "layer" + std::to_string(i) + "/"; }

json fp_layer_manifest(Writer& writer, const LayerDef& layer, std::size_t i) {
  const std::string prefix = layer_prefix(i);
  json entry;
  entry["kind"] = layer_kind_name(layer.kind);
  entry["stride"] = layer.conv.stride;
  entry["pad"] = layer.conv.pad;
  entry["weights"] = prefix + "weights";
  writer.add_f64(prefix + "weights", layer.weights);
  if (!layer.bias.empty()) {
    entry["bias"] = prefix + "bias";
    writer.add_f64(prefix + "bias", layer.bias);
  }
  return entry;
}

LayerDef fp_layer_from_manifest(const Reader& reader, const json& entry) {
  LayerDef layer;
  layer.kind = layer_kind_from_name(manifest_field<std::string>(entry, "kind"));
  layer.conv.stride = static_cast<Index>(manifest_field<std::int64_t>(entry, "stride"));
  layer.conv.pad = static_cast<Index>(manifest_field<std::int64_t>(entry, "pad"));
  layer.weights = reader.tensor_f64(manifest_field<std::string>(entry, "weights"));
  if (entry.contains("bias")) {
    layer.bias = reader.f64(manifest_field<std::string>(entry, "bias"), -1);
  }
  return layer;
}

template <typename Fn>
auto parse_guard(const char* what, Fn fn) -> decltype(fn()) {
  // Any invariant violation surfaced by the validators below means the file
  // content is bad, so it reports as a parse failure rather than leaking the
  // internal error class of whichever check tripped.
  try {
    return fn();
  } catch (const ParseError&) {
    throw;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

const char* container_kind_name(ContainerKind kind) {
  switch (kind) {
    case ContainerKind::kFpModel:
      return "fp_model";
    case ContainerKind::kQuantizedModel:
      return "quantized_model";
    case ContainerKind::kTensorSet:
      return "tensor_set";
  }
  throw ConfigError("unknown container kind");
}

ContainerKind peek_kind(const std::string& path) {
  const Reader reader(path);
  const auto kind = manifest_field<std::string>(reader.manifest(), "kind");
  if (kind == "fp_model") return ContainerKind::kFpModel;
  if (kind == "quantized_model") return ContainerKind::kQuantizedModel;
  if (kind == "tensor_set") return ContainerKind::kTensorSet;
  throw ParseError("unknown container kind '" + kind + "'");
}

void save_model(const FpModel& model, const std::string& path) {
  validate_model(model);
  Writer writer;
  json layers = json::array();
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    layers.push_back(fp_layer_manifest(writer, model.layers[i], i));
  }
  json body;
  body["layers"] = layers;
  writer.write(path, "fp_model", std::move(body));
}

void save_model(const QuantizedModel& model, const std::string& path) {
  validate_quantized_model(model);
  Writer writer;
  writer.add_f64("alpha", std::vector<double>{model.alpha});
  json layers = json::array();
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (const auto* fp = std::get_if<LayerDef>(&model.layers[i])) {
      layers.push_back(fp_layer_manifest(writer, *fp, i));
      continue;
    }
    const auto& ql = std::get<QuantizedLayer>(model.layers[i]);
    const std::string prefix = layer_prefix(i);
    json entry;
    entry["kind"] = "adder_quantized";
    entry["stride"] = ql.conv.stride;
    entry["pad"] = ql.conv.pad;
    entry["weight_shape"] = ql.weight_shape.dims();
    entry["groups"] = ql.plan.groups;
    entry["restore"] = ql.plan.restore;
    entry["clamped"] = ql.plan.clamped;
    entry["act_n"] = ql.act_range.n;

    writer.add_f64(prefix + "group_max", ql.plan.group_max);
    writer.add_f64(prefix + "means", ql.plan.means);
    writer.add_f64(prefix + "objective", std::vector<double>{ql.plan.objective});
    std::vector<double> scales;
    scales.reserve(ql.specs.size());
    for (const QuantSpec& spec : ql.specs) scales.push_back(spec.scale);
    writer.add_f64(prefix + "scales", scales);
    writer.add_f64(prefix + "act", std::vector<double>{ql.act_range.r_x, ql.act_range.alpha});
    writer.add_f64(prefix + "bias_total", ql.bias_total);
    writer.add_f64(prefix + "bias_fold", ql.bias_fold);
    for (std::size_t j = 0; j < ql.w_bar.size(); ++j) {
      writer.add_i32(prefix + "wbar" + std::to_string(j), ql.w_bar[j]);
    }
    layers.push_back(std::move(entry));
  }
  json body;
  body["bits"] = model.bits;
  body["groups"] = model.grouping.g;
  body["feature"] = group_feature_name(model.grouping.feature);
  body["layers"] = layers;
  writer.write(path, "quantized_model", std::move(body));
}

AnyModel load_model(const std::string& path) {
  const Reader reader(path);
  const auto kind = manifest_field<std::string>(reader.manifest(), "kind");

  if (kind == "fp_model") {
    return parse_guard("invalid fp model", [&]() -> AnyModel {
      FpModel model;
      for (const json& entry : manifest_field<json>(reader.manifest(), "layers")) {
        model.layers.push_back(fp_layer_from_manifest(reader, entry));
      }
      validate_model(model);
      return model;
    });
  }

  if (kind != "quantized_model") {
    throw ParseError("container holds a " + kind + ", not a model");
  }
  return parse_guard("invalid quantized model", [&]() -> AnyModel {
    QuantizedModel qm;
    qm.bits = static_cast<int>(manifest_field<std::int64_t>(reader.manifest(), "bits"));
    qm.grouping.g = static_cast<Index>(manifest_field<std::int64_t>(reader.manifest(), "groups"));
    qm.grouping.feature =
        group_feature_from_name(manifest_field<std::string>(reader.manifest(), "feature"));
    qm.alpha = reader.f64("alpha", 1)[0];

    std::size_t i = 0;
    for (const json& entry : manifest_field<json>(reader.manifest(), "layers")) {
      const auto layer_kind = manifest_field<std::string>(entry, "kind");
      if (layer_kind == "vanilla" || layer_kind == "adder") {
        qm.layers.emplace_back(fp_layer_from_manifest(reader, entry));
      } else if (layer_kind == "adder_quantized") {
        const std::string prefix = layer_prefix(i);
        QuantizedLayer ql;
        ql.conv.stride = static_cast<Index>(manifest_field<std::int64_t>(entry, "stride"));
        ql.conv.pad = static_cast<Index>(manifest_field<std::int64_t>(entry, "pad"));
        ql.weight_shape = Shape(manifest_dims(entry, "weight_shape"));

        for (const auto& group : manifest_field<std::vector<std::vector<std::int64_t>>>(
                 entry, "groups")) {
          std::vector<Index> members;
          members.reserve(group.size());
          for (std::int64_t c : group) members.push_back(static_cast<Index>(c));
          ql.plan.groups.push_back(std::move(members));
        }
        for (std::int64_t c : manifest_field<std::vector<std::int64_t>>(entry, "restore")) {
          ql.plan.restore.push_back(static_cast<Index>(c));
        }
        ql.plan.clamped = manifest_field<bool>(entry, "clamped");
        const Index g = ql.plan.num_groups();
        ql.plan.group_max = reader.f64(prefix + "group_max", g);
        ql.plan.means = reader.f64(prefix + "means", g);
        ql.plan.objective = reader.f64(prefix + "objective", 1)[0];

        for (double s : reader.f64(prefix + "scales", g)) ql.specs.push_back({qm.bits, s});
        const std::vector<double> act = reader.f64(prefix + "act", 2);
        ql.act_range.r_x = act[0];
        ql.act_range.alpha = act[1];
        ql.act_range.n = static_cast<Index>(manifest_field<std::int64_t>(entry, "act_n"));
        ql.bias_total = reader.f64(prefix + "bias_total", -1);
        ql.bias_fold = reader.f64(prefix + "bias_fold", -1);
        for (Index j = 0; j < g; ++j) {
          ql.w_bar.push_back(reader.tensor_i32(prefix + "wbar" + std::to_string(j)));
        }
        qm.layers.emplace_back(std::move(ql));
      } else {
        throw ParseError("unknown layer kind '" + layer_kind + "'");
      }
      ++i;
    }
    validate_quantized_model(qm);
    return qm;
  });
}

void save_tensors(const std::vector<NamedTensor>& tensors, const std::string& path) {
  if (tensors.empty()) throw ConfigError("tensor set is empty");
  Writer writer;
  json entries = json::array();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string blob = "t" + std::to_string(i);
    writer.add_f64(blob, tensors[i].second);
    json entry;
    entry["name"] = tensors[i].first;
    entry["blob"] = blob;
    entries.push_back(std::move(entry));
  }
  json body;
  body["tensors"] = entries;
  writer.write(path, "tensor_set", std::move(body));
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
  const Reader reader(path);
  const auto kind = manifest_field<std::string>(reader.manifest(), "kind");
  if (kind != "tensor_set") throw ParseError("container holds a " + kind + ", not a tensor set");
  return parse_guard("invalid tensor set", [&] {
    std::vector<NamedTensor> out;
    for (const json& entry : manifest_field<json>(reader.manifest(), "tensors")) {
      out.emplace_back(manifest_field<std::string>(entry, "name"),
                       reader.tensor_f64(manifest_field<std::string>(entry, "blob")));
    }
    if (out.empty()) throw ParseError("tensor set is empty");
    return out;
  });
}

std::vector<NamedTensor> import_tensor_dir(const std::string& dir) {
  const std::filesystem::path root(dir);
  std::ifstream ifs(root / "manifest.json");
  if (!ifs) throw IoError("cannot open '" + (root / "manifest.json").string() + "'");
  json manifest;
  try {
    ifs >> manifest;
  } catch (const json::exception& e) {
    throw ParseError(std::string("import manifest is not valid JSON: ") + e.what());
  }

  return parse_guard("invalid tensor import", [&] {
    std::vector<NamedTensor> out;
    for (const json& entry : manifest_field<json>(manifest, "tensors")) {
      const auto name = manifest_field<std::string>(entry, "name");
      const auto file = manifest_field<std::string>(entry, "file");
      const Shape shape(manifest_dims(entry, "shape"));

      std::ifstream blob(root / file, std::ios::binary);
      if (!blob) throw IoError("cannot open tensor file '" + (root / file).string() + "'");
      std::string raw((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());
      if (static_cast<Index>(raw.size()) != shape.numel() * 8) {
        throw ParseError("tensor file '" + file + "' length does not match shape " +
                         shape.to_string());
      }
      ArrayF values(shape.numel());
      const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
      for (Index i = 0; i < values.size(); ++i) values[i] = get_f64(p + 8 * i);
      out.emplace_back(name, TensorF(shape, values));
    }
    if (out.empty()) throw ParseError("tensor import lists no tensors");
    return out;
  });
}

std::vector<NamedTensor> load_tensors_any(const std::string& path) {
  if (std::filesystem::is_directory(path)) return import_tensor_dir(path);
  return load_tensors(path);
}

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(const ArrayF& a, const ArrayF& b) {
  if (a.size() != b.size()) return false;
  for (Index i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

bool same_tensor(const TensorF& a, const TensorF& b) {
  return a.shape() == b.shape() && same_bits(a.array(), b.array());
}

bool same_tensor(const TensorI& a, const TensorI& b) {
  return a.shape() == b.shape() && (a.array() == b.array()).all();
}

bool same_layer(const LayerDef& a, const LayerDef& b) {
  return a.kind == b.kind && a.conv.stride == b.conv.stride && a.conv.pad == b.conv.pad &&
         same_tensor(a.weights, b.weights) && same_bits(a.bias, b.bias);
}

bool same_layer(const QuantizedLayer& a, const QuantizedLayer& b) {
  if (a.weight_shape != b.weight_shape || a.conv.stride != b.conv.stride ||
      a.conv.pad != b.conv.pad) {
    return false;
  }
  if (a.plan.groups != b.plan.groups || a.plan.restore != b.plan.restore ||
      a.plan.clamped != b.plan.clamped) {
    return false;
  }
  if (!same_bits(a.plan.group_max, b.plan.group_max) || !same_bits(a.plan.means, b.plan.means) ||
      !same_bits(a.plan.objective, b.plan.objective)) {
    return false;
  }
  if (a.specs.size() != b.specs.size()) return false;
  for (std::size_t j = 0; j < a.specs.size(); ++j) {
    if (a.specs[j].bits != b.specs[j].bits || !same_bits(a.specs[j].scale, b.specs[j].scale)) {
      return false;
    }
  }
  if (a.w_bar.size() != b.w_bar.size()) return false;
  for (std::size_t j = 0; j < a.w_bar.size(); ++j) {
    if (!same_tensor(a.w_bar[j], b.w_bar[j])) return false;
  }
  if (a.act_range.n != b.act_range.n || !same_bits(a.act_range.r_x, b.act_range.r_x) ||
      !same_bits(a.act_range.alpha, b.act_range.alpha)) {
    return false;
  }
  return same_bits(a.bias_total, b.bias_total) && same_bits(a.bias_fold, b.bias_fold);
}

}  // namespace

bool bitwise_equal(const FpModel& a, const FpModel& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (!same_layer(a.layers[i], b.layers[i])) return false;
  }
  return true;
}

bool bitwise_equal(const QuantizedModel& a, const QuantizedModel& b) {
  if (a.bits != b.bits || a.grouping.g != b.grouping.g ||
      a.grouping.feature != b.grouping.feature || !same_bits(a.alpha, b.alpha)) {
    return false;
  }
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const bool ok = std::visit(
        [&](const auto& la) {
          using T = std::decay_t<decltype(la)>;
          const auto* lb = std::get_if<T>(&b.layers[i]);
          return lb != nullptr && same_layer(la, *lb);
        },
        a.layers[i]);
    if (!ok) return false;
  }
  return true;
}

}  // namespace adderptq
