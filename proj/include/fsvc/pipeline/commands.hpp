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

// The six pipeline commands behind the fsvc binary. Each throws on failure;
// the CLI wrapper turns exceptions into the machine-parseable error line.

#ifndef FSVC_PIPELINE_COMMANDS_HPP_
#define FSVC_PIPELINE_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "fsvc/pipeline/config.hpp"

namespace fsvc::pipeline {

inline constexpr char kErrorPrefix[] = "FSVC_ERROR: ";

struct ExtractArgs {
  std::string wav_in;
  std::string mfcc_out;     // each output is optional, at least one required
  std::string ppg_out;      // requires ppg_model
  std::string prosody_out;  // columns: log_f0, voicing, pitch_corr
  std::string feat_out;
  std::string ppg_model;
};
void cmd_extract(const PipelineConfig& cfg, const ExtractArgs& args,
                 std::ostream& log);

struct TrainPpgArgs {
  std::string corpus_dir;
  std::string model_out;
};
/// Trains the posteriorgram extractor on a wav corpus. Frames are
/// pseudo-labeled by seeded k-means over the MFCC space so the pipeline
/// needs no external transcription.
void cmd_train_ppg(const PipelineConfig& cfg, const TrainPpgArgs& args,
                   std::ostream& log);

struct TrainSynthArgs {
  std::string corpus_dir;
  std::string profile_out;
  std::string ppg_model;  // empty: train an extractor on this corpus first
  std::string init_from;  // optional checkpoint to fine-tune from
  std::string speaker;    // defaults to the corpus directory name
};
void cmd_train_synth(const PipelineConfig& cfg, const TrainSynthArgs& args,
                     std::ostream& log);

struct ConvertArgs {
  std::string wav_in;
  std::string profile;
  std::string wav_out;
  std::string ppg_model;  // optional override of the profile's extractor
  std::string feat_out;   // optional dump of the predicted features
};
/// Source wav to target-speaker wav. Rate and vocoder seed come from cfg.
void cmd_convert(const PipelineConfig& cfg, const ConvertArgs& args,
                 std::ostream& log);

struct VocodeArgs {
  std::string feat_in;
  std::string wav_out;
};
void cmd_vocode(const PipelineConfig& cfg, const VocodeArgs& args,
                std::ostream& log);

struct BenchArgs {
  std::string profile;
  std::vector<int> lengths;
  int repeats = 3;
};
/// Writes the CSV report (mode,T,median_ms,p90_ms,speedup) to `csv`.
void cmd_bench(const PipelineConfig& cfg, const BenchArgs& args,
               std::ostream& csv, std::ostream& log);

/// Seeded k-means pseudo-labeling over feature rows; deterministic,
/// ties broken toward the lowest cluster index.
Eigen::VectorXi kmeans_labels(const Eigen::MatrixXd& x, int k, int iters,
                              std::uint64_t seed);

}  // namespace fsvc::pipeline

#endif  // FSVC_PIPELINE_COMMANDS_HPP_
