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

#ifndef FSVC_PIPELINE_PROFILE_HPP_
#define FSVC_PIPELINE_PROFILE_HPP_

#include <map>
#include <string>

#include "fsvc/core/types.hpp"

namespace fsvc::pipeline {

/// Per-target-speaker bundle: what a conversion needs besides the source
/// utterance. Checkpoint and extractor paths are stored as written; relative
/// paths resolve against the profile file's directory on load.
struct SpeakerProfile {
  std::string speaker;
  core::LogF0Stats log_f0;            // over voiced frames of the training corpus
  std::string checkpoint_path;        // synthesizer weights
  std::string ppg_model_path;         // extractor weights, may be empty
  std::map<std::string, std::string> metadata;
};

void save_profile(const std::string& path, const SpeakerProfile& profile);

/// Loads and validates: std > 1e-8, checkpoint path present. Relative
/// checkpoint/extractor paths are rewritten relative to the profile.
SpeakerProfile load_profile(const std::string& path);

}  // namespace fsvc::pipeline

#endif  // FSVC_PIPELINE_PROFILE_HPP_
