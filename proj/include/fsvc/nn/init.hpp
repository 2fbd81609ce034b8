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

#ifndef FSVC_NN_INIT_HPP_
#define FSVC_NN_INIT_HPP_

#include <cmath>
#include <random>

#include "fsvc/nn/ops.hpp"

namespace fsvc::nn {

/// Glorot uniform fill: bound sqrt(6 / (fan_in + fan_out)), entries drawn in
/// row-major order so a given seed always produces the same weights.
template <typename S>
void glorot_uniform_fill(Mat<S>& w, std::mt19937_64& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      w(r, c) = static_cast<S>(dist(rng));
    }
  }
}

}  // namespace fsvc::nn

#endif  // FSVC_NN_INIT_HPP_
