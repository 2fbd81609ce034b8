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

#include "fsvc/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>

#include "fsvc/dsp/frontend.hpp"
#include "fsvc/io/feature_file.hpp"
#include "fsvc/io/wav.hpp"
#include "fsvc/pipeline/profile.hpp"
#include "fsvc/ppg/extractor.hpp"
#include "fsvc/synth/benchmark.hpp"
#include "fsvc/synth/model.hpp"
#include "fsvc/synth/rate.hpp"
#include "fsvc/vocoder/lpc.hpp"

namespace fsvc::pipeline {

namespace fs = std::filesystem;

namespace {

struct UtteranceFeatures {
  core::MfccSequence mfcc;
  core::ProsodyTrack prosody;  // raw log-F0, not normalized
  core::LpcnetFeatureSequence feats;
};

UtteranceFeatures analyze(const PipelineConfig& cfg, const std::string& path) {
  const core::AudioSignal signal = io::read_wav(path);
  auto [grid, frames] = dsp::frame_signal(signal, cfg.window_ms, cfg.hop_ms);
  UtteranceFeatures out;
  out.mfcc = dsp::compute_mfcc(frames, grid);
  out.prosody = dsp::estimate_f0(signal, grid);
  out.feats = dsp::compute_bark_features(frames, grid, out.prosody);
  return out;
}

std::vector<std::string> list_wavs(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("corpus " + dir + ": not a directory");
  }
  std::vector<std::string> wavs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      wavs.push_back(entry.path().string());
    }
  }
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) {
    throw std::runtime_error("corpus " + dir + ": no .wav files");
  }
  return wavs;
}

// Prosody conditioning matrix: normalized log-F0 and the voicing flag.
Eigen::MatrixXf prosody_matrix(const core::ProsodyTrack& track) {
  Eigen::MatrixXf m(track.n_frames(), 2);
  for (Eigen::Index t = 0; t < track.n_frames(); ++t) {
    m(t, 0) = static_cast<float>(track.log_f0[t]);
    m(t, 1) = static_cast<float>(track.voicing[t]);
  }
  return m;
}

Eigen::MatrixXd stack_mfcc(const std::vector<UtteranceFeatures>& utts) {
  Eigen::Index total = 0;
  for (const auto& u : utts) total += u.mfcc.frames.rows();
  Eigen::MatrixXd all(total, core::MfccSequence::kDim);
  Eigen::Index at = 0;
  for (const auto& u : utts) {
    all.middleRows(at, u.mfcc.frames.rows()) = u.mfcc.frames;
    at += u.mfcc.frames.rows();
  }
  return all;
}

// Trains the k-means-pseudo-labeled extractor used by train-ppg, and by
// train-synth when no extractor is supplied.
ppg::PpgExtractor<float> train_extractor(
    const PipelineConfig& cfg, const std::vector<UtteranceFeatures>& utts,
    std::ostream& log, std::vector<std::pair<std::string, std::string>>* meta) {
  const Eigen::MatrixXd all = stack_mfcc(utts);
  if (all.rows() < cfg.ppg_classes) {
    throw std::runtime_error(
        "ppg training: corpus has " + std::to_string(all.rows()) +
        " frames, fewer than ppg.classes = " + std::to_string(cfg.ppg_classes));
  }
  const Eigen::VectorXi labels =
      kmeans_labels(all, cfg.ppg_classes, cfg.ppg_kmeans_iters, cfg.seed);

  ppg::PpgExtractor<float> extractor(cfg.ppg_classes, cfg.ppg_hidden);
  extractor.init(cfg.seed);
  ppg::PpgTrainOptions opts;
  opts.epochs = cfg.ppg_epochs;
  opts.batch_size = cfg.ppg_batch_size;
  opts.learning_rate = cfg.ppg_learning_rate;
  opts.seed = cfg.seed;
  const std::vector<double> losses =
      extractor.train(all.cast<float>(), labels, opts);
  const double final_loss = losses.empty() ? 0.0 : losses.back();
  log << "ppg: " << all.rows() << " frames, " << cfg.ppg_classes
      << " classes, " << opts.epochs << " epochs, final loss " << final_loss
      << "\n";
  if (meta != nullptr) {
    *meta = {{"seed", std::to_string(cfg.seed)},
             {"epochs", std::to_string(opts.epochs)},
             {"final_loss", std::to_string(final_loss)},
             {"n_frames", std::to_string(all.rows())}};
  }
  return extractor;
}

// Stores `target` relative to the profile when they share a directory, so
// the pair of files can move together.
std::string portable_path(const std::string& profile_path,
                          const std::string& target) {
  const fs::path t = fs::absolute(target);
  if (t.parent_path() == fs::absolute(profile_path).parent_path()) {
    return t.filename().string();
  }
  return t.string();
}

core::LpcnetFeatureSequence features_from_matrix(const Eigen::MatrixXf& m,
                                                 const core::FrameGrid& grid) {
  core::LpcnetFeatureSequence out;
  out.frames = m.cast<double>();
  out.grid = grid;
  out.grid.n_frames = m.rows();
  return out;
}

}  // namespace

Eigen::VectorXi kmeans_labels(const Eigen::MatrixXd& x, int k, int iters,
                              std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (x.rows() < k) {
    throw std::invalid_argument("kmeans: " + std::to_string(x.rows()) +
                                " rows for k = " + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(x.rows());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd centroids(k, x.cols());
  for (int c = 0; c < k; ++c) centroids.row(c) = x.row(order[c]);

  Eigen::VectorXi labels = Eigen::VectorXi::Zero(x.rows());
  for (int iter = 0; iter < iters; ++iter) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      int best = 0;
      double best_d = (x.row(r) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (x.row(r) - centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      labels[r] = best;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      sums.row(labels[r]) += x.row(r);
      counts[labels[r]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
    }
  }
  return labels;
}

void cmd_extract(const PipelineConfig& cfg, const ExtractArgs& args,
                 std::ostream& log) {
  if (args.mfcc_out.empty() && args.ppg_out.empty() &&
      args.prosody_out.empty() && args.feat_out.empty()) {
    throw std::runtime_error("extract: no outputs requested");
  }
  if (!args.ppg_out.empty() && args.ppg_model.empty()) {
    throw std::runtime_error(
        "extract: posteriorgram output requires --ppg-model");
  }
  const UtteranceFeatures u = analyze(cfg, args.wav_in);
  if (!args.mfcc_out.empty()) {
    io::save_features(args.mfcc_out, u.mfcc.frames, u.mfcc.grid);
  }
  if (!args.prosody_out.empty()) {
    Eigen::MatrixXd m(u.prosody.n_frames(), 3);
    for (Eigen::Index t = 0; t < u.prosody.n_frames(); ++t) {
      m(t, 0) = u.prosody.log_f0[t];
      m(t, 1) = u.prosody.voicing[t];
      m(t, 2) = u.prosody.pitch_corr[t];
    }
    io::save_features(args.prosody_out, m, u.prosody.grid);
  }
  if (!args.feat_out.empty()) {
    io::save_features(args.feat_out, u.feats.frames, u.feats.grid);
  }
  if (!args.ppg_out.empty()) {
    const auto extractor = ppg::PpgExtractor<float>::load(args.ppg_model);
    ppg::save_ppg_file(args.ppg_out, extractor.extract(u.mfcc));
  }
  log << "extract: " << u.mfcc.frames.rows() << " frames from " << args.wav_in
      << "\n";
}

void cmd_train_ppg(const PipelineConfig& cfg, const TrainPpgArgs& args,
                   std::ostream& log) {
  const std::vector<std::string> wavs = list_wavs(args.corpus_dir);
  std::vector<UtteranceFeatures> utts;
  utts.reserve(wavs.size());
  for (const auto& w : wavs) utts.push_back(analyze(cfg, w));
  std::vector<std::pair<std::string, std::string>> meta;
  const auto extractor = train_extractor(cfg, utts, log, &meta);
  extractor.save(args.model_out, meta);
  log << "ppg model written to " << args.model_out << "\n";
}

void cmd_train_synth(const PipelineConfig& cfg, const TrainSynthArgs& args,
                     std::ostream& log) {
  const std::vector<std::string> wavs = list_wavs(args.corpus_dir);

  std::vector<UtteranceFeatures> utts;
  std::vector<std::string> kept;
  for (const auto& w : wavs) {
    UtteranceFeatures u = analyze(cfg, w);
    if (u.prosody.voicing.sum() < 2) {
      log << "warning: skipping " << w << ": no voiced frames\n";
      continue;
    }
    utts.push_back(std::move(u));
    kept.push_back(w);
  }
  if (utts.empty()) {
    throw std::runtime_error("corpus " + args.corpus_dir +
                             ": no usable utterances (all unvoiced)");
  }

  // Target-speaker log-F0 statistics over all voiced frames of the corpus.
  double sum = 0.0;
  long n_voiced = 0;
  for (const auto& u : utts) {
    for (Eigen::Index t = 0; t < u.prosody.n_frames(); ++t) {
      if (u.prosody.voicing[t] == 1) {
        sum += u.prosody.log_f0[t];
        ++n_voiced;
      }
    }
  }
  core::LogF0Stats stats;
  stats.mean = sum / static_cast<double>(n_voiced);
  double var = 0.0;
  for (const auto& u : utts) {
    for (Eigen::Index t = 0; t < u.prosody.n_frames(); ++t) {
      if (u.prosody.voicing[t] == 1) {
        const double d = u.prosody.log_f0[t] - stats.mean;
        var += d * d;
      }
    }
  }
  stats.std_dev = std::sqrt(var / static_cast<double>(n_voiced));
  if (!(stats.std_dev > 1e-8)) {
    throw std::runtime_error("corpus " + args.corpus_dir +
                             ": degenerate log-F0 std " +
                             std::to_string(stats.std_dev));
  }

  // Extractor: supplied, or trained here on the same corpus.
  std::string ppg_model_path = args.ppg_model;
  std::optional<ppg::PpgExtractor<float>> extractor;
  if (ppg_model_path.empty()) {
    std::vector<std::pair<std::string, std::string>> meta;
    extractor = train_extractor(cfg, utts, log, &meta);
    ppg_model_path =
        (fs::path(args.profile_out).parent_path() /
         (fs::path(args.profile_out).stem().string() + ".ppg.fvcm"))
            .string();
    extractor->save(ppg_model_path, meta);
    log << "ppg model written to " << ppg_model_path << "\n";
  } else {
    extractor = ppg::PpgExtractor<float>::load(ppg_model_path);
  }

  std::vector<synth::SynthExample<float>> dataset;
  dataset.reserve(utts.size());
  for (const auto& u : utts) {
    synth::SynthExample<float> ex;
    ex.log_ppg = extractor->extract(u.mfcc).log_post.cast<float>();
    const core::ProsodyTrack norm = dsp::normalize_log_f0(u.prosody, stats);
    ex.prosody = prosody_matrix(norm);
    ex.target = u.feats.frames.cast<float>();
    dataset.push_back(std::move(ex));
  }

  synth::SynthesizerConfig synth_cfg = cfg.synthesizer_config();
  synth_cfg.n_classes = extractor->n_classes();
  synth::Synthesizer<float> model = [&] {
    if (!args.init_from.empty()) {
      auto m = synth::Synthesizer<float>::load(args.init_from);
      if (m.config().n_classes != extractor->n_classes()) {
        throw std::runtime_error(
            "init_from checkpoint expects " +
            std::to_string(m.config().n_classes) +
            " classes, extractor has " +
            std::to_string(extractor->n_classes()));
      }
      return m;
    }
    synth::Synthesizer<float> m(synth_cfg);
    m.init(cfg.seed);
    return m;
  }();

  synth::SynthTrainOptions opts;
  opts.epochs = cfg.synth_epochs;
  opts.batch_size = cfg.synth_batch_size;
  opts.learning_rate = cfg.synth_learning_rate;
  opts.seed = cfg.seed;
  const std::vector<double> losses = model.train(dataset, opts);
  const double final_loss = losses.empty() ? 0.0 : losses.back();
  if (!losses.empty()) {
    log << "synth: " << dataset.size() << " utterances, " << losses.size()
        << " epochs, loss " << losses.front() << " -> " << final_loss << "\n";
  }

  const std::string checkpoint_path =
      (fs::path(args.profile_out).parent_path() /
       (fs::path(args.profile_out).stem().string() + ".synth.fvcm"))
          .string();
  model.save(checkpoint_path,
             {{"seed", std::to_string(cfg.seed)},
              {"epochs", std::to_string(cfg.synth_epochs)},
              {"final_loss", std::to_string(final_loss)}});

  SpeakerProfile profile;
  profile.speaker = args.speaker.empty()
                        ? fs::path(args.corpus_dir).filename().string()
                        : args.speaker;
  profile.log_f0 = stats;
  profile.checkpoint_path = portable_path(args.profile_out, checkpoint_path);
  profile.ppg_model_path = portable_path(args.profile_out, ppg_model_path);
  profile.metadata = {{"corpus_size", std::to_string(kept.size())},
                      {"seed", std::to_string(cfg.seed)},
                      {"epochs", std::to_string(cfg.synth_epochs)},
                      {"final_loss", std::to_string(final_loss)}};
  save_profile(args.profile_out, profile);
  log << "profile written to " << args.profile_out << "\n";
}

void cmd_convert(const PipelineConfig& cfg, const ConvertArgs& args,
                 std::ostream& log) {
  const SpeakerProfile profile = load_profile(args.profile);
  const std::string ppg_model_path =
      !args.ppg_model.empty() ? args.ppg_model : profile.ppg_model_path;
  if (ppg_model_path.empty()) {
    throw std::runtime_error(
        "convert: profile names no extractor and --ppg-model not given");
  }
  const auto extractor = ppg::PpgExtractor<float>::load(ppg_model_path);
  const auto model = synth::Synthesizer<float>::load(profile.checkpoint_path);
  if (model.config().n_classes != extractor.n_classes()) {
    throw std::runtime_error(
        "convert: checkpoint expects " +
        std::to_string(model.config().n_classes) + " classes, extractor has " +
        std::to_string(extractor.n_classes()));
  }

  const UtteranceFeatures u = analyze(cfg, args.wav_in);
  // Source-utterance normalization: the contour keeps its shape in the
  // zero-mean/unit-variance space the synthesizer was trained in.
  core::ProsodyTrack track = dsp::normalize_log_f0(u.prosody, std::nullopt);
  core::PpgSequence ppg_seq = extractor.extract(u.mfcc);

  if (cfg.rate != 1.0) {
    synth::RateResampled r = synth::resample_for_rate(ppg_seq, track, cfg.rate);
    ppg_seq = std::move(r.ppg);
    track = std::move(r.prosody);
  }

  const Eigen::MatrixXf feats_f = model.forward(
      ppg_seq.log_post.cast<float>().eval(), prosody_matrix(track));
  const core::LpcnetFeatureSequence feats =
      features_from_matrix(feats_f, ppg_seq.grid);
  if (!args.feat_out.empty()) {
    io::save_features(args.feat_out, feats.frames, feats.grid);
  }

  const vocoder::SynthesisResult synth_out =
      vocoder::lpc_synthesize(feats, cfg.seed, cfg.vocoder_order);
  if (synth_out.unstable_frames > 0) {
    log << "warning: " << synth_out.unstable_frames << " unstable frames\n";
  }
  io::write_wav(synth_out.audio, args.wav_out);
  log << "convert: " << u.mfcc.frames.rows() << " -> "
      << feats.frames.rows() << " frames, "
      << synth_out.audio.samples.size() << " samples to " << args.wav_out
      << "\n";
}

void cmd_vocode(const PipelineConfig& cfg, const VocodeArgs& args,
                std::ostream& log) {
  auto [mat, grid] = io::load_features(args.feat_in);
  if (mat.cols() != core::LpcnetFeatureSequence::kDim) {
    throw std::runtime_error(
        args.feat_in + ": expected " +
        std::to_string(core::LpcnetFeatureSequence::kDim) +
        " feature columns, found " + std::to_string(mat.cols()));
  }
  core::LpcnetFeatureSequence feats;
  feats.frames = std::move(mat);
  feats.grid = grid;
  const vocoder::SynthesisResult out =
      vocoder::lpc_synthesize(feats, cfg.seed, cfg.vocoder_order);
  if (out.unstable_frames > 0) {
    log << "warning: " << out.unstable_frames << " unstable frames\n";
  }
  io::write_wav(out.audio, args.wav_out);
  log << "vocode: " << feats.frames.rows() << " frames, "
      << out.audio.samples.size() << " samples to " << args.wav_out << "\n";
}

void cmd_bench(const PipelineConfig& cfg, const BenchArgs& args,
               std::ostream& csv, std::ostream& log) {
  const SpeakerProfile profile = load_profile(args.profile);
  const auto model = synth::Synthesizer<float>::load(profile.checkpoint_path);

  csv << "mode,T,median_ms,p90_ms,speedup\n";
  const std::vector<synth::BenchmarkRow> rows = synth::benchmark_inference(
      model, args.lengths, args.repeats, cfg.seed);
  // rows come in (parallel, ar_emulation) pairs per length
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const auto& par = rows[i];
    const auto& ar = rows[i + 1];
    const double speedup = ar.median_ms / par.median_ms;
    for (const auto* r : {&par, &ar}) {
      csv << r->mode << "," << r->t_len << "," << r->median_ms << ","
          << r->p90_ms << "," << speedup << "\n";
    }
    log << "T=" << par.t_len << ": parallel " << par.median_ms << " ms, ar "
        << ar.median_ms << " ms, speedup " << speedup << "\n";
  }
}

}  // namespace fsvc::pipeline
