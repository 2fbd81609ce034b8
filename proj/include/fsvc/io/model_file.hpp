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

#ifndef FSVC_IO_MODEL_FILE_HPP_
#define FSVC_IO_MODEL_FILE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fsvc::io {

// FVCM: little-endian named-tensor container.
//   magic "FVCM" | u16 version | u32 n_tensors |
//     { u32 name_len | name | u32 rank | u32 dims[rank] | f32 values } x n |
//   u32 n_meta | { u32 key_len | key | u32 val_len | val } x n_meta
inline constexpr char kModelMagic[4] = {'F', 'V', 'C', 'M'};
inline constexpr std::uint16_t kModelVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

struct ModelFile {
  std::vector<NamedTensor> tensors;
  std::vector<std::pair<std::string, std::string>> metadata;

  const NamedTensor& tensor(const std::string& name) const;
  const std::string* find_meta(const std::string& key) const;
};

void save_model(const std::string& path, const ModelFile& model);

/// Loads and validates an FVCM file. Corruption (bad magic, impossible
/// sizes, truncation, trailing bytes) is rejected with a diagnostic.
ModelFile load_model(const std::string& path);

}  // namespace fsvc::io

#endif  // FSVC_IO_MODEL_FILE_HPP_
