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

#include "fsvc/io/feature_file.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "binary_io.hpp"

namespace fsvc::io {

void save_features(const std::string& path, const Eigen::MatrixXd& matrix,
                   const core::FrameGrid& grid) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw std::invalid_argument("save_features: empty matrix");
  }
  detail::Writer w(path);
  w.bytes(kFeatureMagic, 4);
  w.u16(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(matrix.rows()));
  w.u32(static_cast<std::uint32_t>(matrix.cols()));
  w.f64(grid.window_ms);
  w.f64(grid.hop_ms);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      w.f32(static_cast<float>(matrix(r, c)));
    }
  }
  w.finish();
}

std::pair<Eigen::MatrixXd, core::FrameGrid> load_features(const std::string& path) {
  detail::Reader r(path, "fvcf");

  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) {
    r.fail("bad magic, not a feature file");
  }
  const std::uint16_t version = r.u16("version");
  if (version != kFeatureVersion) {
    r.fail("unsupported version " + std::to_string(version));
  }
  const std::uint32_t rows = r.u32("rows");
  const std::uint32_t cols = r.u32("cols");
  if (rows == 0 || cols == 0) r.fail("zero rows or cols");
  const double window_ms = r.f64("window_ms");
  const double hop_ms = r.f64("hop_ms");
  if (!std::isfinite(window_ms) || !std::isfinite(hop_ms) || hop_ms <= 0.0 ||
      window_ms < hop_ms) {
    r.fail("invalid frame grid (window_ms=" + std::to_string(window_ms) +
           ", hop_ms=" + std::to_string(hop_ms) + ")");
  }

  const std::uint64_t expected =
      static_cast<std::uint64_t>(rows) * cols * sizeof(float);
  if (r.remaining() != expected) {
    r.fail("payload size mismatch: expected " + std::to_string(expected) +
           " bytes, have " + std::to_string(r.remaining()));
  }

  Eigen::MatrixXd matrix(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      matrix(i, j) = r.f32("payload");
    }
  }
  r.expect_end();

  core::FrameGrid grid;
  grid.window_ms = window_ms;
  grid.hop_ms = hop_ms;
  grid.window_samples =
      static_cast<int>(std::lround(window_ms * core::kPipelineSampleRate / 1000.0));
  grid.hop_samples =
      static_cast<int>(std::lround(hop_ms * core::kPipelineSampleRate / 1000.0));
  grid.n_frames = static_cast<int>(rows);
  return {matrix, grid};
}

}  // namespace fsvc::io
