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

// fsvc: train and run the voice-conversion pipeline.
//
//   fsvc extract --in utt.wav --mfcc-out utt.mfcc.fvcf
//   fsvc train-ppg --corpus dir/ --out ppg.fvcm
//   fsvc train-synth --corpus dir/ --profile-out spk.json [--ppg-model m]
//   fsvc convert --in src.wav --profile spk.json --out conv.wav --rate 1.2
//   fsvc vocode --in feats.fvcf --out resynth.wav
//   fsvc bench --profile spk.json --lengths 64,512 --repeats 3
//
// Exit code 0 on success; on failure one line starting with FSVC_ERROR:
// goes to stderr and the exit code is nonzero.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsvc/pipeline/commands.hpp"
#include "fsvc/pipeline/config.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  double rate = -1.0;        // <0: keep config value
  std::int64_t seed = -1;    // <0: keep config value
};

void add_global_flags(CLI::App* cmd, GlobalFlags& g) {
  cmd->add_option("--config", g.config_path, "pipeline config file");
  cmd->add_option("--rate", g.rate, "speech rate in [0.5, 2.0]");
  cmd->add_option("--seed", g.seed, "seed for training and vocoding");
}

fsvc::pipeline::PipelineConfig resolve_config(const GlobalFlags& g) {
  fsvc::pipeline::PipelineConfig cfg =
      g.config_path.empty() ? fsvc::pipeline::PipelineConfig()
                            : fsvc::pipeline::load_config(g.config_path);
  if (g.rate >= 0.0) cfg.rate = g.rate;
  if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fsvc voice conversion pipeline"};
  app.require_subcommand(1);

  GlobalFlags extract_g, train_ppg_g, train_synth_g, convert_g, vocode_g,
      bench_g;

  auto* extract = app.add_subcommand("extract", "wav to feature files");
  fsvc::pipeline::ExtractArgs extract_args;
  extract->add_option("--in", extract_args.wav_in, "input wav")->required();
  extract->add_option("--mfcc-out", extract_args.mfcc_out, "MFCC output");
  extract->add_option("--ppg-out", extract_args.ppg_out,
                      "posteriorgram output (needs --ppg-model)");
  extract->add_option("--prosody-out", extract_args.prosody_out,
                      "log-F0/voicing/pitch-corr output");
  extract->add_option("--feat-out", extract_args.feat_out,
                      "20-dim vocoder feature output");
  extract->add_option("--ppg-model", extract_args.ppg_model,
                      "trained extractor model");
  add_global_flags(extract, extract_g);

  auto* train_ppg =
      app.add_subcommand("train-ppg", "train the posteriorgram extractor");
  fsvc::pipeline::TrainPpgArgs train_ppg_args;
  train_ppg->add_option("--corpus", train_ppg_args.corpus_dir, "wav directory")
      ->required();
  train_ppg->add_option("--out", train_ppg_args.model_out, "model output path")
      ->required();
  add_global_flags(train_ppg, train_ppg_g);

  auto* train_synth =
      app.add_subcommand("train-synth", "train a target-speaker synthesizer");
  fsvc::pipeline::TrainSynthArgs train_synth_args;
  train_synth
      ->add_option("--corpus", train_synth_args.corpus_dir, "wav directory")
      ->required();
  train_synth
      ->add_option("--profile-out", train_synth_args.profile_out,
                   "speaker profile output path")
      ->required();
  train_synth->add_option("--ppg-model", train_synth_args.ppg_model,
                          "extractor model (trained on the corpus if absent)");
  train_synth->add_option("--init-from", train_synth_args.init_from,
                          "checkpoint to fine-tune from");
  train_synth->add_option("--speaker", train_synth_args.speaker,
                          "speaker id (defaults to corpus directory name)");
  add_global_flags(train_synth, train_synth_g);

  auto* convert =
      app.add_subcommand("convert", "convert an utterance to a target speaker");
  fsvc::pipeline::ConvertArgs convert_args;
  convert->add_option("--in", convert_args.wav_in, "source wav")->required();
  convert->add_option("--profile", convert_args.profile, "target profile")
      ->required();
  convert->add_option("--out", convert_args.wav_out, "output wav")->required();
  convert->add_option("--ppg-model", convert_args.ppg_model,
                      "override the profile's extractor");
  convert->add_option("--feat-out", convert_args.feat_out,
                      "also dump predicted features");
  add_global_flags(convert, convert_g);

  auto* vocode = app.add_subcommand("vocode", "feature file to wav");
  fsvc::pipeline::VocodeArgs vocode_args;
  vocode->add_option("--in", vocode_args.feat_in, "20-dim feature file")
      ->required();
  vocode->add_option("--out", vocode_args.wav_out, "output wav")->required();
  add_global_flags(vocode, vocode_g);

  auto* bench = app.add_subcommand(
      "bench", "parallel vs autoregressive-emulation timings");
  fsvc::pipeline::BenchArgs bench_args;
  std::string bench_out;
  bench->add_option("--profile", bench_args.profile, "speaker profile")
      ->required();
  bench
      ->add_option("--lengths", bench_args.lengths,
                   "frame counts to benchmark (comma separated)")
      ->delimiter(',');
  bench->add_option("--repeats", bench_args.repeats, "repeats per timing");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");
  add_global_flags(bench, bench_g);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) {
      fsvc::pipeline::cmd_extract(resolve_config(extract_g), extract_args,
                                  std::cout);
    } else if (train_ppg->parsed()) {
      fsvc::pipeline::cmd_train_ppg(resolve_config(train_ppg_g),
                                    train_ppg_args, std::cout);
    } else if (train_synth->parsed()) {
      fsvc::pipeline::cmd_train_synth(resolve_config(train_synth_g),
                                      train_synth_args, std::cout);
    } else if (convert->parsed()) {
      fsvc::pipeline::cmd_convert(resolve_config(convert_g), convert_args,
                                  std::cout);
    } else if (vocode->parsed()) {
      fsvc::pipeline::cmd_vocode(resolve_config(vocode_g), vocode_args,
                                 std::cout);
    } else if (bench->parsed()) {
      if (bench_out.empty()) {
        fsvc::pipeline::cmd_bench(resolve_config(bench_g), bench_args,
                                  std::cout, std::cerr);
      } else {
        std::ofstream csv(bench_out, std::ios::trunc);
        if (!csv) {
          throw std::runtime_error("bench: cannot open " + bench_out);
        }
        fsvc::pipeline::cmd_bench(resolve_config(bench_g), bench_args, csv,
                                  std::cout);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << fsvc::pipeline::kErrorPrefix << e.what() << std::endl;
    return 1;
  }
  return 0;
}
