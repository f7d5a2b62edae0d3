// Copyright 2026 The TENet-KWS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Single-file tensor container.
//
//   bytes 0..5   magic "TENET1"
//   bytes 6..9   header length N, uint32 little-endian
//   next N       UTF-8 JSON header (model description + tensor manifest)
//   rest         float32 little-endian tensors, back to back in manifest order
//
// Manifest offsets are relative to the start of the payload.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tenet/error.hpp"
#include "tenet/model.hpp"
#include "tenet/tensor.hpp"

namespace tenet {

inline constexpr std::string_view kContainerMagic = "TENET1";
inline constexpr std::uint32_t kMaxHeaderBytes = 16u << 20;

struct ManifestEntry {
  std::string name;
  std::vector<std::size_t> shape;
  std::string dtype = "float32";
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;

  std::size_t elements() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Parsed container: JSON header fields, manifest and raw payload.
struct Container {
  nlohmann::json header;
  std::vector<ManifestEntry> manifest;
  std::vector<std::uint8_t> payload;

  const ManifestEntry* find(std::string_view name) const {
    for (const auto& e : manifest)
      if (e.name == name) return &e;
    return nullptr;
  }

  std::vector<float> tensor(const ManifestEntry& e) const {
    std::vector<float> out(e.elements());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::uint8_t* p = payload.data() + e.offset + 4 * i;
      const std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                 std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
      out[i] = std::bit_cast<float>(bits);
    }
    return out;
  }
};

/// Writes `bytes` to a sibling temp file and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), Errc::io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), Errc::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, Errc::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

/// Incrementally builds a container image.
class ContainerWriter {
 public:
  explicit ContainerWriter(nlohmann::json header) : header_(std::move(header)) {}

  void add(const std::string& name, std::vector<std::size_t> shape, std::span<const float> values) {
    ManifestEntry e{name, std::move(shape), "float32", payload_.size(), values.size() * 4};
    require(e.elements() == values.size(), Errc::shape_mismatch, "tensor " + name + " shape/size mismatch");
    for (float v : values) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) payload_.push_back(static_cast<char>(bits >> (8 * b)));
    }
    manifest_.push_back(std::move(e));
  }

  std::string bytes() const {
    nlohmann::json header = header_;
    header["tensors"] = nlohmann::json::array();
    for (const auto& e : manifest_)
      header["tensors"].push_back(
          {{"name", e.name}, {"shape", e.shape}, {"dtype", e.dtype}, {"offset", e.offset}, {"nbytes", e.nbytes}});
    const std::string text = header.dump(1);
    std::string out(kContainerMagic);
    const auto len = static_cast<std::uint32_t>(text.size());
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>(len >> (8 * b)));
    out += text;
    out += payload_;
    return out;
  }

  void save(const std::filesystem::path& path) const { atomic_write(path, bytes()); }

 private:
  nlohmann::json header_;
  std::vector<ManifestEntry> manifest_;
  std::string payload_;
};

/// Validates magic, header bound, manifest layout and payload size.
inline Container parse_container(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kContainerMagic.size() &&
              std::memcmp(bytes.data(), kContainerMagic.data(), kContainerMagic.size()) == 0,
          Errc::bad_magic, "file does not start with TENET1");
  const std::size_t prefix = kContainerMagic.size() + 4;
  require(bytes.size() >= prefix, Errc::truncated_payload, "file ends inside the header length");
  const std::uint8_t* p = bytes.data() + kContainerMagic.size();
  const std::uint32_t header_len = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                   std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  require(header_len <= kMaxHeaderBytes, Errc::bad_header,
          "header length " + std::to_string(header_len) + " exceeds bound");
  require(bytes.size() >= prefix + header_len, Errc::truncated_payload, "file ends inside the header");

  Container c;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(prefix),
                                      bytes.begin() + static_cast<std::ptrdiff_t>(prefix + header_len));
    std::uint64_t expected_offset = 0;
    for (const auto& t : c.header.at("tensors")) {
      ManifestEntry e;
      e.name = t.at("name").get<std::string>();
      e.shape = t.at("shape").get<std::vector<std::size_t>>();
      e.dtype = t.at("dtype").get<std::string>();
      e.offset = t.at("offset").get<std::uint64_t>();
      e.nbytes = t.at("nbytes").get<std::uint64_t>();
      require(e.dtype == "float32", Errc::bad_header, "tensor " + e.name + " has dtype " + e.dtype);
      require(e.nbytes == 4 * e.elements(), Errc::bad_header, "tensor " + e.name + " byte count != shape");
      require(e.offset == expected_offset, Errc::bad_header,
              "tensor " + e.name + " offset is not contiguous with its predecessor");
      expected_offset = e.offset + e.nbytes;
      c.manifest.push_back(std::move(e));
    }
    const std::size_t payload_size = bytes.size() - prefix - header_len;
    require(payload_size >= expected_offset, Errc::truncated_payload,
            "payload has " + std::to_string(payload_size) + " bytes, manifest needs " +
                std::to_string(expected_offset));
    require(payload_size == expected_offset, Errc::bad_header, "trailing bytes after payload");
    c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(prefix + header_len), bytes.end());
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::bad_header, ex.what());
  }
  return c;
}

inline Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  return parse_container(bytes);
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline nlohmann::json model_header(const ModelSpec& spec) {
  return {{"format", "tenet-model"},
          {"version", 1},
          {"variant", spec.name},
          {"depthwise_kind", spec.depthwise().to_string()},
          {"strides", spec.strides()},
          {"width", spec.width},
          {"input_channels", spec.input_channels},
          {"num_classes", spec.num_classes},
          {"stem_kernel", spec.stem_kernel},
          {"epsilon", spec.epsilon}};
}

template <typename T>
std::string serialize_model(const Model<T>& model) {
  const Model<float> m = model.template cast<float>();
  ContainerWriter writer(model_header(m.spec));
  m.visit_tensors([&](const std::string& name, const std::vector<std::size_t>& shape,
                      std::span<const float> v, TensorRole) { writer.add(name, shape, v); });
  return writer.bytes();
}

template <typename T>
void save_model(const std::filesystem::path& path, const Model<T>& model) {
  atomic_write(path, serialize_model(model));
}

/// Rebuilds the spec from the header, checks it against the named variant and
/// copies every tensor after verifying its shape.
inline Model<float> model_from_container(const Container& c) {
  ModelSpec spec;
  try {
    const auto& h = c.header;
    require(h.at("format") == "tenet-model", Errc::bad_header, "container does not hold a model");
    spec = make_model_spec(h.at("variant").get<std::string>(), h.at("width").get<std::size_t>(),
                           h.at("strides").get<std::vector<std::size_t>>(),
                           DepthwiseKind::parse(h.at("depthwise_kind").get<std::string>()),
                           h.at("input_channels").get<std::size_t>(), h.at("num_classes").get<std::size_t>());
    spec.stem_kernel = h.at("stem_kernel").get<std::size_t>();
    spec.epsilon = h.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::bad_header, ex.what());
  }

  // a known variant name pins width and stride pattern
  bool known = false;
  for (const auto& v : variant_names())
    known = known || detail::normalize_variant(v) == detail::normalize_variant(spec.name);
  if (known) {
    const ModelSpec expected = variant_spec(spec.name, spec.depthwise());
    require(expected.width == spec.width && expected.strides() == spec.strides() &&
                expected.input_channels == spec.input_channels && expected.num_classes == spec.num_classes,
            Errc::shape_mismatch, "header disagrees with variant " + spec.name);
  }

  Model<float> model = allocate_model<float>(spec);
  std::size_t seen = 0;
  model.visit_tensors([&](const std::string& name, const std::vector<std::size_t>& shape,
                          std::span<float> v, TensorRole) {
    const ManifestEntry* e = c.find(name);
    require(e != nullptr, Errc::shape_mismatch, "tensor " + name + " missing for variant " + spec.name);
    require(e->shape == shape, Errc::shape_mismatch, "tensor " + name + " has the wrong shape");
    const auto values = c.tensor(*e);
    std::copy(values.begin(), values.end(), v.begin());
    ++seen;
  });
  require(seen == c.manifest.size(), Errc::shape_mismatch,
          "container has tensors that variant " + spec.name + " does not use");
  return model;
}

inline Model<float> load_model(const std::filesystem::path& path) {
  return model_from_container(read_container(path));
}

/// Manifest that save_model would write for `model`.
template <typename T>
std::vector<ManifestEntry> model_manifest(const Model<T>& model) {
  std::vector<ManifestEntry> out;
  std::uint64_t offset = 0;
  model.visit_tensors([&](const std::string& name, const std::vector<std::size_t>& shape,
                          std::span<const T> v, TensorRole) {
    out.push_back({name, shape, "float32", offset, 4 * v.size()});
    offset += 4 * v.size();
  });
  return out;
}

// ---------------------------------------------------------------------------
// Feature maps
// ---------------------------------------------------------------------------

inline void save_feature_map(const std::filesystem::path& path, const FeatureMap<float>& features,
                             const std::string& name = "mfcc") {
  ContainerWriter writer({{"format", "tenet-features"}, {"version", 1}});
  writer.add(name, {features.frames(), 1, features.channels()}, features.data());
  writer.save(path);
}

inline FeatureMap<float> load_feature_map(const std::filesystem::path& path, const std::string& name = "mfcc") {
  const Container c = read_container(path);
  const ManifestEntry* e = c.find(name);
  require(e != nullptr, Errc::shape_mismatch, "no tensor named " + name);
  require(e->shape.size() == 3 && e->shape[1] == 1, Errc::shape_mismatch, "feature tensor must be T x 1 x C");
  return FeatureMap<float>(e->shape[0], e->shape[2], c.tensor(*e));
}

}  // namespace tenet
