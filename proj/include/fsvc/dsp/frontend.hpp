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

#ifndef FSVC_DSP_FRONTEND_HPP_
#define FSVC_DSP_FRONTEND_HPP_

#include <optional>
#include <utility>

#include "fsvc/core/types.hpp"

namespace fsvc::dsp {

inline constexpr int kNumMelFilters = 26;
inline constexpr int kNumStaticMfcc = 13;
inline constexpr double kEnergyFloor = 1e-10;
inline constexpr double kF0MinHz = 50.0;
inline constexpr double kF0MaxHz = 500.0;
inline constexpr double kF0AnalysisMs = 40.0;
inline constexpr double kVoicingCorrThreshold = 0.3;
inline constexpr double kVoicingRmsThreshold = 1e-4;
inline constexpr double kUnvoicedFillHz = 100.0;

/// Smallest power of two >= n.
int next_pow2(int n);

/// Symmetric Hann window of length n.
Eigen::VectorXd hann_window(int n);

/// Orthonormal DCT-II matrix M (n x n) with M * M^T = I. Row k holds the
/// k-th basis vector, so coefficients = M * x.
Eigen::MatrixXd dct2_orthonormal(int n);

/// Triangular mel filterbank. Returns (n_fft/2 + 1) x n_filters weights;
/// band energies = power_spectrum * filterbank.
Eigen::MatrixXd mel_filterbank(int n_filters, int n_fft, int sample_rate_hz);

/// Triangular Bark-spaced filterbank covering 0..Nyquist, each band
/// normalized to unit weight sum so a band value approximates the local
/// spectrum level. Returns (n_fft/2 + 1) x n_bands.
Eigen::MatrixXd bark_filterbank(int n_bands, int n_fft, int sample_rate_hz);

/// Center frequencies (Hz) of the Bark bands used by bark_filterbank.
Eigen::VectorXd bark_band_centers_hz(int n_bands, int sample_rate_hz);

double bark_from_hz(double hz);
double hz_from_bark(double bark);

/// |FFT|^2 of each row, zero-padded to n_fft. Returns T x (n_fft/2 + 1).
Eigen::MatrixXd power_spectrum(const Eigen::MatrixXd& frames, int n_fft);

/// Pitch-period encoding used in feature column 18: maps period_samples
/// through (log2(period) - log2(32)) / 4, so 50..500 Hz at 16 kHz lands
/// roughly in [0, 1].
double encode_pitch_period(double period_samples);
double decode_pitch_period(double encoded);

/// Cuts the signal into Hann-windowed frames. Signals shorter than one
/// window are zero-padded to a single frame.
std::pair<core::FrameGrid, Eigen::MatrixXd> frame_signal(const core::AudioSignal& signal,
                                                   double window_ms = 25.0,
                                                   double hop_ms = 10.0);

/// 39-dim MFCCs (13 static + deltas + delta-deltas) from Hann-windowed
/// frames produced by frame_signal.
core::MfccSequence compute_mfcc(const Eigen::MatrixXd& frames, const core::FrameGrid& grid);

/// Normalized-autocorrelation pitch tracker over the 50..500 Hz band on a
/// 40 ms analysis window centered on each frame. log_f0 is linearly
/// interpolated through unvoiced spans; an all-unvoiced track is filled
/// with ln(100).
core::ProsodyTrack estimate_f0(const core::AudioSignal& signal, const core::FrameGrid& grid);

/// 20-dim vocoder features: 18 Bark cepstra + encoded pitch period +
/// pitch correlation. frames and prosody must share the same grid.
core::LpcnetFeatureSequence compute_bark_features(const Eigen::MatrixXd& frames,
                                            const core::FrameGrid& grid,
                                            const core::ProsodyTrack& prosody);

/// Z-scores log_f0 over all frames. With stats absent they are computed
/// from the voiced frames (population std) and stored on the result; with
/// stats given they are applied as-is.
core::ProsodyTrack normalize_log_f0(const core::ProsodyTrack& track,
                              std::optional<core::LogF0Stats> stats = std::nullopt);

/// Inverse of normalize_log_f0 using the stats stored on the track.
core::ProsodyTrack denormalize_log_f0(const core::ProsodyTrack& track);

}  // namespace fsvc::dsp

#endif  // FSVC_DSP_FRONTEND_HPP_
