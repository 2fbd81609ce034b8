// Copyright 2026 The fsvc Authors
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

#include "fsvc/io/model_file.hpp"

#include <cstring>
#include <stdexcept>

#include "binary_io.hpp"

namespace fsvc::io {
namespace {

constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxEntries = 1u << 20;

}  // namespace

const NamedTensor& ModelFile::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("model has no tensor named '" + name + "'");
}

const std::string* ModelFile::find_meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

void save_model(const std::string& path, const ModelFile& model) {
  detail::Writer w(path);
  w.bytes(kModelMagic, 4);
  w.u16(kModelVersion);
  w.u32(static_cast<std::uint32_t>(model.tensors.size()));
  for (const auto& t : model.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.dims.size()));
    std::uint64_t count = 1;
    for (const auto d : t.dims) {
      w.u32(d);
      count *= d;
    }
    if (count != t.values.size()) {
      throw std::invalid_argument("save_model: tensor '" + t.name +
                                  "' dims do not match value count");
    }
    for (const float v : t.values) w.f32(v);
  }
  w.u32(static_cast<std::uint32_t>(model.metadata.size()));
  for (const auto& [k, v] : model.metadata) {
    w.str(k);
    w.str(v);
  }
  w.finish();
}

ModelFile load_model(const std::string& path) {
  detail::Reader r(path, "fvcm");

  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kModelMagic, 4) != 0) {
    r.fail("bad magic, not a model file");
  }
  const std::uint16_t version = r.u16("version");
  if (version != kModelVersion) {
    r.fail("unsupported version " + std::to_string(version));
  }

  ModelFile model;
  const std::uint32_t n_tensors = r.u32("tensor count");
  if (n_tensors > kMaxEntries) r.fail("implausible tensor count");
  model.tensors.reserve(n_tensors);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    NamedTensor t;
    t.name = r.str(kMaxNameLen, "tensor name");
    const std::uint32_t rank = r.u32("tensor rank");
    if (rank == 0 || rank > kMaxRank) {
      r.fail("tensor '" + t.name + "' has invalid rank " +
             std::to_string(rank));
    }
    std::uint64_t count = 1;
    t.dims.resize(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.dims[d] = r.u32("tensor dim");
      count *= t.dims[d];
      if (count > kMaxEntries * 64ull) {
        r.fail("tensor '" + t.name + "' is implausibly large");
      }
    }
    r.require(count * sizeof(float), "tensor payload");
    t.values.resize(count);
    for (auto& v : t.values) v = r.f32("tensor payload");
    model.tensors.push_back(std::move(t));
  }

  const std::uint32_t n_meta = r.u32("metadata count");
  if (n_meta > kMaxEntries) r.fail("implausible metadata count");
  model.metadata.reserve(n_meta);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = r.str(kMaxNameLen, "metadata key");
    std::string val = r.str(kMaxNameLen, "metadata value");
    model.metadata.emplace_back(std::move(key), std::move(val));
  }
  r.expect_end();
  return model;
}

}  // namespace fsvc::io
