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

#include "fsvc/synth/rate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fsvc::synth {

namespace {

// Source position of output frame j under the endpoint-aligned map.
double source_pos(Eigen::Index j, Eigen::Index t_in, Eigen::Index t_out) {
  if (t_out == 1) return 0.0;
  return static_cast<double>(j) * static_cast<double>(t_in - 1) /
         static_cast<double>(t_out - 1);
}

}  // namespace

RateResampled resample_for_rate(const core::PpgSequence& ppg,
                                const core::ProsodyTrack& prosody,
                                double rate) {
  if (!(rate >= kMinRate && rate <= kMaxRate)) {
    throw std::invalid_argument("resample_for_rate: rate " +
                                std::to_string(rate) + " outside [" +
                                std::to_string(kMinRate) + ", " +
                                std::to_string(kMaxRate) + "]");
  }
  const Eigen::Index t_in = ppg.log_post.rows();
  if (t_in < 2) {
    throw std::invalid_argument(
        "resample_for_rate: need at least 2 frames, got " +
        std::to_string(t_in));
  }
  if (prosody.n_frames() != t_in) {
    throw std::invalid_argument(
        "resample_for_rate: prosody has " +
        std::to_string(prosody.n_frames()) + " frames, posteriorgram has " +
        std::to_string(t_in));
  }
  const Eigen::Index t_out =
      std::lround(static_cast<double>(t_in) / rate);

  RateResampled out;
  out.ppg.n_classes = ppg.n_classes;
  out.ppg.grid = ppg.grid;
  out.ppg.grid.n_frames = t_out;
  out.ppg.log_post.resize(t_out, ppg.log_post.cols());
  out.prosody.grid = out.ppg.grid;
  out.prosody.stats = prosody.stats;
  out.prosody.log_f0.resize(t_out);
  out.prosody.pitch_corr.resize(t_out);
  out.prosody.voicing.resize(t_out);

  const Eigen::MatrixXd post = ppg.log_post.array().exp();
  for (Eigen::Index j = 0; j < t_out; ++j) {
    const double s = source_pos(j, t_in, t_out);
    const auto lo = static_cast<Eigen::Index>(std::floor(s));
    const Eigen::Index hi = std::min(lo + 1, t_in - 1);
    const double w = s - static_cast<double>(lo);

    Eigen::RowVectorXd p =
        (1.0 - w) * post.row(lo) + w * post.row(hi);
    p /= p.sum();
    out.ppg.log_post.row(j) = p.array().log().matrix();

    out.prosody.log_f0[j] =
        (1.0 - w) * prosody.log_f0[lo] + w * prosody.log_f0[hi];
    out.prosody.pitch_corr[j] =
        (1.0 - w) * prosody.pitch_corr[lo] + w * prosody.pitch_corr[hi];
    out.prosody.voicing[j] = prosody.voicing[static_cast<Eigen::Index>(
        std::lround(std::min(s, static_cast<double>(t_in - 1))))];
  }
  return out;
}

}  // namespace fsvc::synth
