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

#ifndef FSVC_PIPELINE_CONFIG_HPP_
#define FSVC_PIPELINE_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "fsvc/synth/model.hpp"

namespace fsvc::pipeline {

/// All tunables of the pipeline in one flat document. The file format is
/// `key = value` per line with `#` comments; unknown keys are rejected.
struct PipelineConfig {
  double window_ms = 25.0;
  double hop_ms = 10.0;

  int ppg_classes = 64;
  int ppg_hidden = 128;
  int ppg_epochs = 30;
  int ppg_batch_size = 32;
  double ppg_learning_rate = 1e-3;
  int ppg_kmeans_iters = 20;

  int synth_model_dim = 64;
  int synth_blocks = 2;
  int synth_heads = 2;
  int synth_conv_kernel = 3;
  int synth_epochs = 200;
  int synth_batch_size = 32;
  double synth_learning_rate = 1e-3;

  int vocoder_order = 16;

  double rate = 1.0;
  std::uint64_t seed = 0;

  synth::SynthesizerConfig synthesizer_config() const {
    synth::SynthesizerConfig cfg;
    cfg.n_classes = ppg_classes;
    cfg.model_dim = synth_model_dim;
    cfg.n_blocks = synth_blocks;
    cfg.n_heads = synth_heads;
    cfg.conv_kernel = synth_conv_kernel;
    return cfg;
  }

  /// Throws on any value a module precondition would reject.
  void validate() const;
};

/// Parses and validates a config file; every key is optional and defaults
/// as above. Unknown or duplicate keys and malformed values throw with the
/// offending line.
PipelineConfig load_config(const std::string& path);

/// The parseable key set, one "key = value" line each, with the defaults.
std::string default_config_text();

}  // namespace fsvc::pipeline

#endif  // FSVC_PIPELINE_CONFIG_HPP_
