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

#include "fsvc/dsp/frontend.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsvc::dsp {
namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular filterbank with band apexes at `points[1..n]`, band i spanning
// points[i]..points[i+2], evaluated on a given frequency axis.
Eigen::MatrixXd triangular_bank(const Eigen::VectorXd& points_hz, int n_bands,
                                int n_bins, double bin_hz, bool normalize) {
  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(n_bins, n_bands);
  for (int b = 0; b < n_bands; ++b) {
    const double lo = points_hz[b];
    const double mid = points_hz[b + 1];
    const double hi = points_hz[b + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f >= lo && f <= mid && mid > lo) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f <= hi && hi > mid) {
        w = (hi - f) / (hi - mid);
      }
      bank(k, b) = w;
    }
    if (normalize) {
      const double sum = bank.col(b).sum();
      if (sum > 0.0) bank.col(b) /= sum;
    }
  }
  return bank;
}

// Delta coefficients with the +-2 regression window and edge replication.
Eigen::MatrixXd deltas(const Eigen::MatrixXd& x) {
  const Eigen::Index t_count = x.rows();
  Eigen::MatrixXd d(t_count, x.cols());
  auto clamp_row = [&](Eigen::Index t) {
    return std::min(std::max(t, Eigen::Index{0}), t_count - 1);
  };
  constexpr double kDenom = 10.0;  // 2 * (1^2 + 2^2)
  for (Eigen::Index t = 0; t < t_count; ++t) {
    d.row(t) = (1.0 * (x.row(clamp_row(t + 1)) - x.row(clamp_row(t - 1))) +
                2.0 * (x.row(clamp_row(t + 2)) - x.row(clamp_row(t - 2)))) /
               kDenom;
  }
  return d;
}

struct LagSearch {
  double corr = 0.0;  // normalized autocorrelation at the chosen lag
  double lag = 0.0;   // refined lag in samples
};

// Normalized autocorrelation peak over [lag_min, lag_max] with the smallest
// lag among near-maximal candidates (suppresses period-multiple picks) and
// parabolic refinement.
LagSearch best_lag(const Eigen::VectorXd& seg, int lag_min, int lag_max) {
  const int w = static_cast<int>(seg.size());
  const int n_lags = lag_max - lag_min + 1;
  Eigen::VectorXd corr = Eigen::VectorXd::Zero(n_lags);
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    const int n = w - lag;
    if (n <= 0) break;
    const double num = seg.head(n).dot(seg.tail(n));
    const double e0 = seg.head(n).squaredNorm();
    const double e1 = seg.tail(n).squaredNorm();
    const double denom = std::sqrt(e0 * e1);
    corr[lag - lag_min] = denom > 0.0 ? num / denom : 0.0;
  }

  Eigen::Index max_idx = 0;
  const double max_corr = corr.maxCoeff(&max_idx);
  LagSearch out;
  if (max_corr <= 0.0) {
    out.corr = 0.0;
    out.lag = lag_min;
    return out;
  }

  // Smallest-lag *local peak* near the maximum. Requiring a peak (not just
  // a near-maximal value) keeps the pick off the rising shoulder of a broad
  // maximum while still preferring the fundamental over its multiples.
  Eigen::Index pick = max_idx;
  for (Eigen::Index i = 0; i < n_lags; ++i) {
    if (corr[i] < 0.98 * max_corr) continue;
    const bool left_ok = i == 0 || corr[i] >= corr[i - 1];
    const bool right_ok = i + 1 >= n_lags || corr[i] >= corr[i + 1];
    if (left_ok && right_ok) {
      pick = i;
      break;
    }
  }

  double refined = static_cast<double>(lag_min + pick);
  if (pick > 0 && pick + 1 < n_lags) {
    const double ym = corr[pick - 1], y0 = corr[pick], yp = corr[pick + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (std::abs(denom) > 1e-12) {
      double delta = 0.5 * (ym - yp) / denom;
      delta = std::min(std::max(delta, -0.5), 0.5);
      refined += delta;
    }
  }
  out.corr = std::min(corr[pick], 1.0);
  out.lag = refined;
  return out;
}

}  // namespace

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Eigen::VectorXd hann_window(int n) {
  Eigen::VectorXd w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  }
  return w;
}

Eigen::MatrixXd dct2_orthonormal(int n) {
  Eigen::MatrixXd m(n, n);
  const double scale0 = std::sqrt(1.0 / n);
  const double scale = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      m(k, i) = (k == 0 ? scale0 : scale) *
                std::cos(kPi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
  }
  return m;
}

Eigen::MatrixXd mel_filterbank(int n_filters, int n_fft, int sample_rate_hz) {
  const int n_bins = n_fft / 2 + 1;
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_max = hz_to_mel(nyquist);
  Eigen::VectorXd points(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    points[i] = mel_to_hz(mel_max * i / (n_filters + 1));
  }
  return triangular_bank(points, n_filters, n_bins,
                         static_cast<double>(sample_rate_hz) / n_fft,
                         /*normalize=*/false);
}

double bark_from_hz(double hz) { return 26.81 * hz / (1960.0 + hz) - 0.53; }

double hz_from_bark(double bark) {
  return 1960.0 * (bark + 0.53) / (26.81 - (bark + 0.53));
}

Eigen::MatrixXd bark_filterbank(int n_bands, int n_fft, int sample_rate_hz) {
  const int n_bins = n_fft / 2 + 1;
  const double nyquist = sample_rate_hz / 2.0;
  const double z_lo = bark_from_hz(0.0);
  const double z_hi = bark_from_hz(nyquist);
  Eigen::VectorXd points(n_bands + 2);
  for (int i = 0; i < n_bands + 2; ++i) {
    points[i] = hz_from_bark(z_lo + (z_hi - z_lo) * i / (n_bands + 1));
  }
  return triangular_bank(points, n_bands, n_bins,
                         static_cast<double>(sample_rate_hz) / n_fft,
                         /*normalize=*/true);
}

Eigen::VectorXd bark_band_centers_hz(int n_bands, int sample_rate_hz) {
  const double z_lo = bark_from_hz(0.0);
  const double z_hi = bark_from_hz(sample_rate_hz / 2.0);
  Eigen::VectorXd centers(n_bands);
  for (int b = 0; b < n_bands; ++b) {
    centers[b] = hz_from_bark(z_lo + (z_hi - z_lo) * (b + 1) / (n_bands + 1));
  }
  return centers;
}

Eigen::MatrixXd power_spectrum(const Eigen::MatrixXd& frames, int n_fft) {
  if (frames.cols() > n_fft) {
    throw std::invalid_argument("power_spectrum: n_fft smaller than frame");
  }
  const int n_bins = n_fft / 2 + 1;
  Eigen::MatrixXd spec(frames.rows(), n_bins);
  Eigen::FFT<double> fft;
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(n_fft);
  Eigen::VectorXcd freq(n_fft);
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    padded.head(frames.cols()) = frames.row(t);
    fft.fwd(freq, padded);
    spec.row(t) = freq.head(n_bins).cwiseAbs2();
  }
  return spec;
}

double encode_pitch_period(double period_samples) {
  return (std::log2(period_samples) - 5.0) / 4.0;
}

double decode_pitch_period(double encoded) {
  return std::exp2(4.0 * encoded + 5.0);
}

std::pair<core::FrameGrid, Eigen::MatrixXd> frame_signal(const core::AudioSignal& signal,
                                                   double window_ms,
                                                   double hop_ms) {
  if (signal.samples.size() == 0) {
    throw std::invalid_argument("frame_signal: empty signal");
  }
  if (signal.sample_rate_hz != core::kPipelineSampleRate) {
    throw std::invalid_argument(
        "frame_signal: unsupported sample rate " +
        std::to_string(signal.sample_rate_hz) + " Hz, expected " +
        std::to_string(core::kPipelineSampleRate));
  }
  if (!(hop_ms > 0.0) || window_ms < hop_ms) {
    throw std::invalid_argument("frame_signal: need window_ms >= hop_ms > 0");
  }

  core::FrameGrid grid;
  grid.window_ms = window_ms;
  grid.hop_ms = hop_ms;
  grid.window_samples =
      static_cast<int>(std::lround(window_ms * signal.sample_rate_hz / 1000.0));
  grid.hop_samples =
      static_cast<int>(std::lround(hop_ms * signal.sample_rate_hz / 1000.0));
  if (grid.hop_samples < 1 || grid.window_samples < grid.hop_samples) {
    throw std::invalid_argument("frame_signal: degenerate frame grid");
  }

  const Eigen::Index len = signal.samples.size();
  grid.n_frames =
      len >= grid.window_samples
          ? 1 + static_cast<int>((len - grid.window_samples) / grid.hop_samples)
          : 1;

  const Eigen::VectorXd window = hann_window(grid.window_samples);
  Eigen::MatrixXd frames =
      Eigen::MatrixXd::Zero(grid.n_frames, grid.window_samples);
  for (int t = 0; t < grid.n_frames; ++t) {
    const Eigen::Index start = static_cast<Eigen::Index>(t) * grid.hop_samples;
    const Eigen::Index avail =
        std::min<Eigen::Index>(grid.window_samples, len - start);
    frames.row(t).head(avail) = signal.samples.segment(start, avail);
  }
  frames.array().rowwise() *= window.transpose().array();
  return {grid, frames};
}

core::MfccSequence compute_mfcc(const Eigen::MatrixXd& frames,
                          const core::FrameGrid& grid) {
  if (frames.rows() != grid.n_frames || frames.cols() != grid.window_samples) {
    throw std::invalid_argument("compute_mfcc: frames do not match grid");
  }
  const int n_fft = next_pow2(grid.window_samples);
  const Eigen::MatrixXd spec = power_spectrum(frames, n_fft);
  const Eigen::MatrixXd bank =
      mel_filterbank(kNumMelFilters, n_fft, core::kPipelineSampleRate);
  const Eigen::MatrixXd log_energy =
      (spec * bank).cwiseMax(kEnergyFloor).array().log();
  const Eigen::MatrixXd dct = dct2_orthonormal(kNumMelFilters);
  // coefficients 0..12 of the orthonormal DCT-II
  const Eigen::MatrixXd statics =
      log_energy * dct.topRows(kNumStaticMfcc).transpose();
  const Eigen::MatrixXd d1 = deltas(statics);
  const Eigen::MatrixXd d2 = deltas(d1);

  core::MfccSequence out;
  out.grid = grid;
  out.frames.resize(grid.n_frames, core::MfccSequence::kDim);
  out.frames << statics, d1, d2;
  return out;
}

core::ProsodyTrack estimate_f0(const core::AudioSignal& signal, const core::FrameGrid& grid) {
  if (signal.sample_rate_hz != core::kPipelineSampleRate) {
    throw std::invalid_argument("estimate_f0: unsupported sample rate");
  }
  const int sr = signal.sample_rate_hz;
  const int lag_min = static_cast<int>(std::floor(sr / kF0MaxHz));
  const int lag_max = static_cast<int>(std::ceil(sr / kF0MinHz));
  const int analysis =
      static_cast<int>(std::lround(kF0AnalysisMs * sr / 1000.0));
  const Eigen::Index len = signal.samples.size();

  core::ProsodyTrack track;
  track.grid = grid;
  track.log_f0.resize(grid.n_frames);
  track.voicing = Eigen::VectorXi::Zero(grid.n_frames);
  track.pitch_corr = Eigen::VectorXd::Zero(grid.n_frames);

  Eigen::VectorXd raw_f0 = Eigen::VectorXd::Zero(grid.n_frames);
  Eigen::VectorXd seg(analysis);
  for (int t = 0; t < grid.n_frames; ++t) {
    const Eigen::Index frame_start =
        static_cast<Eigen::Index>(t) * grid.hop_samples;
    const Eigen::Index center = frame_start + grid.window_samples / 2;

    seg.setZero();
    const Eigen::Index seg_start = center - analysis / 2;
    for (int i = 0; i < analysis; ++i) {
      const Eigen::Index idx = seg_start + i;
      if (idx >= 0 && idx < len) seg[i] = signal.samples[idx];
    }

    double rms = 0.0;
    {
      const Eigen::Index avail =
          std::max<Eigen::Index>(0, std::min<Eigen::Index>(grid.window_samples,
                                                           len - frame_start));
      if (avail > 0) {
        rms = std::sqrt(signal.samples.segment(frame_start, avail).squaredNorm() /
                        grid.window_samples);
      }
    }

    const LagSearch peak = best_lag(seg, lag_min, lag_max);
    track.pitch_corr[t] = std::max(0.0, peak.corr);
    const bool voiced =
        peak.corr >= kVoicingCorrThreshold && rms >= kVoicingRmsThreshold;
    track.voicing[t] = voiced ? 1 : 0;
    if (voiced) raw_f0[t] = sr / peak.lag;
  }

  // Interpolate log-F0 through unvoiced spans; edges take the nearest
  // voiced value, an all-unvoiced track the ln(100) fill.
  std::vector<int> voiced_idx;
  for (int t = 0; t < grid.n_frames; ++t) {
    if (track.voicing[t]) voiced_idx.push_back(t);
  }
  if (voiced_idx.empty()) {
    track.log_f0.setConstant(std::log(kUnvoicedFillHz));
    return track;
  }
  for (int t = 0; t < grid.n_frames; ++t) {
    if (track.voicing[t]) track.log_f0[t] = std::log(raw_f0[t]);
  }
  const int first = voiced_idx.front(), last = voiced_idx.back();
  for (int t = 0; t < first; ++t) track.log_f0[t] = track.log_f0[first];
  for (int t = last + 1; t < grid.n_frames; ++t)
    track.log_f0[t] = track.log_f0[last];
  for (size_t v = 0; v + 1 < voiced_idx.size(); ++v) {
    const int a = voiced_idx[v], b = voiced_idx[v + 1];
    for (int t = a + 1; t < b; ++t) {
      const double alpha = static_cast<double>(t - a) / (b - a);
      track.log_f0[t] =
          (1.0 - alpha) * track.log_f0[a] + alpha * track.log_f0[b];
    }
  }
  return track;
}

core::LpcnetFeatureSequence compute_bark_features(const Eigen::MatrixXd& frames,
                                            const core::FrameGrid& grid,
                                            const core::ProsodyTrack& prosody) {
  if (frames.rows() != grid.n_frames || frames.cols() != grid.window_samples) {
    throw std::invalid_argument("compute_bark_features: frames/grid mismatch");
  }
  if (prosody.n_frames() != grid.n_frames ||
      !prosody.grid.compatible_with(grid)) {
    throw std::invalid_argument(
        "compute_bark_features: prosody grid does not match frame grid");
  }
  const int n_fft = next_pow2(grid.window_samples);
  const Eigen::MatrixXd spec = power_spectrum(frames, n_fft);
  const Eigen::MatrixXd bank =
      bark_filterbank(core::LpcnetFeatureSequence::kNumCepstra, n_fft,
                      core::kPipelineSampleRate);
  const Eigen::MatrixXd log_energy =
      (spec * bank).cwiseMax(kEnergyFloor).array().log();
  const Eigen::MatrixXd dct =
      dct2_orthonormal(core::LpcnetFeatureSequence::kNumCepstra);

  core::LpcnetFeatureSequence out;
  out.grid = grid;
  out.frames.resize(grid.n_frames, core::LpcnetFeatureSequence::kDim);
  out.frames.leftCols(core::LpcnetFeatureSequence::kNumCepstra) =
      log_energy * dct.transpose();
  for (int t = 0; t < grid.n_frames; ++t) {
    const double period = core::kPipelineSampleRate / std::exp(prosody.log_f0[t]);
    out.frames(t, core::LpcnetFeatureSequence::kPeriodColumn) =
        encode_pitch_period(period);
    out.frames(t, core::LpcnetFeatureSequence::kCorrColumn) =
        std::min(std::max(prosody.pitch_corr[t], 0.0), 1.0);
  }
  return out;
}

core::ProsodyTrack normalize_log_f0(const core::ProsodyTrack& track,
                              std::optional<core::LogF0Stats> stats) {
  core::LogF0Stats s;
  if (stats.has_value()) {
    s = *stats;
  } else {
    double sum = 0.0;
    int n = 0;
    for (Eigen::Index t = 0; t < track.n_frames(); ++t) {
      if (track.voicing[t]) {
        sum += track.log_f0[t];
        ++n;
      }
    }
    if (n < 2) {
      throw std::invalid_argument(
          "normalize_log_f0: need at least 2 voiced frames to derive stats");
    }
    s.mean = sum / n;
    double var = 0.0;
    for (Eigen::Index t = 0; t < track.n_frames(); ++t) {
      if (track.voicing[t]) {
        const double d = track.log_f0[t] - s.mean;
        var += d * d;
      }
    }
    s.std_dev = std::sqrt(var / n);
  }
  if (!(s.std_dev >= 1e-8)) {
    throw std::invalid_argument(
        "normalize_log_f0: degenerate log-F0 std " + std::to_string(s.std_dev));
  }
  core::ProsodyTrack out = track;
  out.log_f0 = (track.log_f0.array() - s.mean) / s.std_dev;
  out.stats = s;
  return out;
}

core::ProsodyTrack denormalize_log_f0(const core::ProsodyTrack& track) {
  if (!track.stats.has_value()) {
    throw std::invalid_argument("denormalize_log_f0: track carries no stats");
  }
  core::ProsodyTrack out = track;
  out.log_f0 = track.log_f0.array() * track.stats->std_dev + track.stats->mean;
  out.stats.reset();
  return out;
}

}  // namespace fsvc::dsp
