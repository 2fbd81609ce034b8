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

#ifndef FSVC_SYNTH_RATE_HPP_
#define FSVC_SYNTH_RATE_HPP_

#include "fsvc/core/types.hpp"

namespace fsvc::synth {

inline constexpr double kMinRate = 0.5;
inline constexpr double kMaxRate = 2.0;

struct RateResampled {
  core::PpgSequence ppg;
  core::ProsodyTrack prosody;
};

/// Retimes aligned posteriorgram and prosody tracks to round(T / rate)
/// frames. Sample positions map endpoint to endpoint; posteriors are
/// interpolated in probability space and renormalized, log-F0 and pitch
/// correlation linearly, voicing by nearest neighbor. rate > 1 speeds
/// speech up, rate < 1 slows it down.
RateResampled resample_for_rate(const core::PpgSequence& ppg,
                                const core::ProsodyTrack& prosody,
                                double rate);

}  // namespace fsvc::synth

#endif  // FSVC_SYNTH_RATE_HPP_
