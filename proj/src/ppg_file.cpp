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

#include <cmath>
#include <stdexcept>
#include <string>

#include "fsvc/io/feature_file.hpp"
#include "fsvc/ppg/extractor.hpp"

namespace fsvc::ppg {

void save_ppg_file(const std::string& path, const core::PpgSequence& ppg) {
  if (ppg.log_post.cols() != ppg.n_classes) {
    throw std::invalid_argument("save_ppg_file: column count " +
                                std::to_string(ppg.log_post.cols()) +
                                " does not match n_classes " +
                                std::to_string(ppg.n_classes));
  }
  io::save_features(path, ppg.log_post, ppg.grid);
}

core::PpgSequence load_ppg_file(const std::string& path) {
  auto [mat, grid] = io::load_features(path);
  // Posterior rows must be a log distribution; the float payload loosens the
  // sum-to-one check a little.
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    const double sum = mat.row(r).array().exp().sum();
    if (std::abs(sum - 1.0) > 1e-3) {
      throw std::runtime_error(path + ": row " + std::to_string(r) +
                               " is not a log posterior (exp sum " +
                               std::to_string(sum) + ")");
    }
  }
  core::PpgSequence out;
  out.log_post = std::move(mat);
  out.n_classes = static_cast<int>(out.log_post.cols());
  out.grid = grid;
  return out;
}

}  // namespace fsvc::ppg
