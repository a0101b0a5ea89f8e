/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "breaker/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "breaker/error.hpp"

namespace breaker {

namespace {

constexpr char kMagic[4] = {'B', 'R', 'K', 'R'};
constexpr unsigned char kVersion = 0x01;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t len) : data_(data), len_(len) {}

  std::size_t remaining() const { return len_ - pos_; }

  const unsigned char* take(std::size_t n) {
    if (remaining() < n) {
      throw CheckpointCorrupt("checkpoint truncated mid-record");
    }
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::uint16_t u16() {
    const unsigned char* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* p = take(4);
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  double f64() {
    const unsigned char* p = take(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    return std::bit_cast<double>(bits);
  }

 private:
  const unsigned char* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_ieee(const void* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int b = 0; b < 8; ++b) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ p[i]) & 0xff] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

ModelDims Checkpoint::dims() const {
  ModelDims dims;
  dims.user_cardinalities = cardinalities;
  dims.n_items = n_items;
  dims.embedding_dim = config.embedding_dim;
  dims.rem_widths = config.rem_widths;
  dims.tower_widths = config.tower_widths;
  dims.clusters = config.clusters;
  dims.alpha = config.alpha;
  return dims;
}

Checkpoint make_checkpoint(const TrainConfig& cfg, const TrainResult& result,
                           const DatasetManifest& manifest) {
  Checkpoint ck;
  ck.config = cfg;
  for (const FeatureInfo& f : manifest.features) {
    ck.cardinalities.push_back(f.cardinality);
  }
  ck.n_items = manifest.n_items;
  ck.step = result.steps;
  for (const auto& [name, t] : result.params) ck.tensors.add(name, t);
  return ck;
}

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ck) {
  nlohmann::ordered_json blob;
  blob["config"] = nlohmann::ordered_json::parse(to_json(ck.config));
  blob["model"] = {{"cardinalities", ck.cardinalities},
                   {"n_items", ck.n_items}};
  blob["step"] = ck.step;
  const std::string blob_text = blob.dump();

  std::string out;
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(blob_text.size()));
  out.append(blob_text);
  for (const auto& [name, t] : ck.tensors) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.append(name);
    out.push_back(static_cast<char>(t.shape.size()));
    for (std::size_t d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values) put_f64(out, v);
  }
  put_u32(out, crc32_ieee(out.data(), out.size()));

  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot open " + file.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("failed writing " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot open " + file.string());
  std::string raw((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  if (raw.size() < 4 + 1 + 4 + 4) {
    throw CheckpointCorrupt("checkpoint too small: " + file.string());
  }
  if (std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw CheckpointCorrupt("bad magic in " + file.string());
  }
  const auto version = static_cast<unsigned char>(raw[4]);
  if (version != kVersion) {
    throw CheckpointVersionError("unsupported checkpoint version " +
                                 std::to_string(version));
  }
  const std::uint32_t stored_crc =
      crc32_ieee(raw.data(), raw.size() - 4);
  Reader tail(reinterpret_cast<const unsigned char*>(raw.data()) + raw.size() - 4,
              4);
  if (tail.u32() != stored_crc) {
    throw CheckpointCorrupt("CRC mismatch in " + file.string());
  }

  Reader r(reinterpret_cast<const unsigned char*>(raw.data()) + 5,
           raw.size() - 5 - 4);
  const std::uint32_t blob_len = r.u32();
  const unsigned char* blob = r.take(blob_len);

  Checkpoint ck;
  try {
    const auto j = nlohmann::ordered_json::parse(blob, blob + blob_len);
    ck.config = train_config_from_json(j.at("config").dump());
    ck.cardinalities =
        j.at("model").at("cardinalities").get<std::vector<std::size_t>>();
    ck.n_items = j.at("model").at("n_items").get<std::size_t>();
    ck.step = j.at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointCorrupt("bad checkpoint metadata: " + std::string(e.what()));
  }

  while (r.remaining() > 0) {
    const std::uint16_t name_len = r.u16();
    const unsigned char* name_bytes = r.take(name_len);
    const std::string name(reinterpret_cast<const char*>(name_bytes), name_len);
    const unsigned char ndim = *r.take(1);
    std::vector<std::size_t> shape(ndim);
    for (unsigned char d = 0; d < ndim; ++d) shape[d] = r.u32();
    const std::size_t count = shape_numel(shape);
    Tensor t(shape);
    for (std::size_t i = 0; i < count; ++i) t[i] = r.f64();
    ck.tensors.add(name, std::move(t));
  }

  // Shape validation against the embedded config.
  BreakerNet net(ck.dims());
  const ParamSet expected = net.zero_params();
  for (const auto& [name, t] : expected) {
    if (!ck.tensors.has(name)) {
      throw CheckpointShapeError("checkpoint is missing tensor " + name);
    }
    const Tensor& got = ck.tensors.at(name);
    if (got.shape != t.shape) {
      throw CheckpointShapeError("tensor " + name + " has shape " +
                                 shape_str(got.shape) + ", config implies " +
                                 shape_str(t.shape));
    }
  }
  for (const auto& [name, t] : ck.tensors) {
    if (!expected.has(name) && name.rfind("adam.", 0) != 0) {
      throw CheckpointShapeError("unexpected tensor " + name +
                                 " in checkpoint");
    }
  }
  return ck;
}

}  // namespace breaker
