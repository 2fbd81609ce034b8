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

#ifndef FSVC_IO_FEATURE_FILE_HPP_
#define FSVC_IO_FEATURE_FILE_HPP_

#include <string>
#include <utility>

#include "fsvc/core/types.hpp"

namespace fsvc::io {

// FVCF: little-endian binary feature matrix.
//   magic "FVCF" | u16 version | u32 rows | u32 cols |
//   f64 window_ms | f64 hop_ms | rows*cols f32, row-major
inline constexpr char kFeatureMagic[4] = {'F', 'V', 'C', 'F'};
inline constexpr std::uint16_t kFeatureVersion = 1;

/// Saves a T x D matrix with its frame grid. Values are stored as f32.
void save_features(const std::string& path, const Eigen::MatrixXd& matrix,
                   const core::FrameGrid& grid);

/// Loads a feature file. The grid's sample counts are re-derived from the
/// stored window/hop at the pipeline sample rate; n_frames = rows.
/// Malformed headers and truncated payloads are rejected with diagnostics.
std::pair<Eigen::MatrixXd, core::FrameGrid> load_features(const std::string& path);

}  // namespace fsvc::io

#endif  // FSVC_IO_FEATURE_FILE_HPP_
