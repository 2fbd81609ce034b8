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

#ifndef FSVC_CORE_TYPES_HPP_
#define FSVC_CORE_TYPES_HPP_

#include <Eigen/Dense>
#include <optional>

namespace fsvc::core {

/// The only sample rate the pipeline accepts.
inline constexpr int kPipelineSampleRate = 16000;

/// Mono PCM audio, samples normalized to [-1, 1].
struct AudioSignal {
  Eigen::VectorXd samples;
  int sample_rate_hz = kPipelineSampleRate;

  Eigen::Index size() const { return samples.size(); }
};

/// Frame layout shared by every per-frame feature sequence.
struct FrameGrid {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int window_samples = 0;
  int hop_samples = 0;
  int n_frames = 0;

  bool compatible_with(const FrameGrid& other) const {
    return window_samples == other.window_samples &&
           hop_samples == other.hop_samples && n_frames == other.n_frames;
  }
};

/// 13 static MFCCs + 13 deltas + 13 delta-deltas per frame.
struct MfccSequence {
  static constexpr int kDim = 39;
  Eigen::MatrixXd frames;  // T x 39
  FrameGrid grid;
};

/// Mean and population standard deviation of log-F0 over voiced frames.
struct LogF0Stats {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Per-frame pitch track. log_f0 is interpolated through unvoiced spans so
/// every frame carries a finite value; voicing records which frames were
/// actually periodic.
struct ProsodyTrack {
  Eigen::VectorXd log_f0;      // natural log of Hz
  Eigen::VectorXi voicing;     // {0, 1}
  Eigen::VectorXd pitch_corr;  // [0, 1]
  std::optional<LogF0Stats> stats;
  FrameGrid grid;

  Eigen::Index n_frames() const { return log_f0.size(); }
};

/// 18 Bark-scale cepstra + normalized pitch period + pitch correlation.
struct LpcnetFeatureSequence {
  static constexpr int kDim = 20;
  static constexpr int kNumCepstra = 18;
  static constexpr int kPeriodColumn = 18;
  static constexpr int kCorrColumn = 19;
  Eigen::MatrixXd frames;  // T x 20
  FrameGrid grid;
};

/// Log-scale posteriors over K phonetic classes; exp of each row sums to 1.
struct PpgSequence {
  Eigen::MatrixXd log_post;  // T x K
  int n_classes = 0;
  FrameGrid grid;
};

}  // namespace fsvc::core

#endif  // FSVC_CORE_TYPES_HPP_
