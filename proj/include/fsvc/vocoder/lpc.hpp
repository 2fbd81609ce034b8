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

// Deterministic source-filter vocoder. Each 20-dim feature row (18 band
// cepstra, pitch period, pitch correlation) becomes a short-term LPC filter
// driven by a mixed pulse/noise excitation; coefficients are interpolated
// per sample so frames join without clicks.

#ifndef FSVC_VOCODER_LPC_HPP_
#define FSVC_VOCODER_LPC_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "fsvc/core/types.hpp"

namespace fsvc::vocoder {

inline constexpr int kLpcOrder = 16;
inline constexpr int kSpectrumFftSize = 512;
inline constexpr int kSpectrumBins = kSpectrumFftSize / 2 + 1;
// r[0] is scaled up by this factor before Levinson so the normal equations
// stay well conditioned on near-deterministic spectra.
inline constexpr double kAutocorrRelativeFloor = 1.0001;

struct LevinsonResult {
  Eigen::VectorXd a;           // prediction coefficients, A(z) = 1 - sum a_i z^-i
  Eigen::VectorXd reflection;  // k_1..k_p
  double prediction_error = 0.0;
  bool stable = false;         // all |k_i| < 1 with positive error energy
};

/// Solves the Yule-Walker equations for order autocorr.size() - 1 by the
/// Levinson-Durbin recursion. autocorr[0] must be positive.
LevinsonResult levinson_durbin(const Eigen::VectorXd& autocorr);

/// Inverse of the orthonormal cepstral transform: 18 log band energies.
Eigen::VectorXd cepstra_to_band_log_energies(const Eigen::VectorXd& cepstra);

/// Expands 18 log band energies to a 257-bin power spectrum by linear
/// interpolation of the log energies between band centers; flat outside.
Eigen::VectorXd band_log_energies_to_spectrum(const Eigen::VectorXd& log_bands);

/// Autocorrelation r[0..max_lag] of the signal whose length-512 DFT power
/// spectrum matches the given 257 bins (direct cosine sum).
Eigen::VectorXd spectrum_to_autocorr(const Eigen::VectorXd& spectrum,
                                     int max_lag);

struct LpcFrame {
  Eigen::VectorXd a;          // prediction coefficients, kLpcOrder by default
  double gain = 0.0;
  double pitch_period = 0.0;  // samples per pulse
  double pitch_corr = 0.0;    // voiced/unvoiced mix in [0, 1]
};

/// Converts every feature row to an LPC frame. A row whose filter comes out
/// unstable keeps the previous frame's filter (zeros for the first frame)
/// and bumps *unstable_count.
std::vector<LpcFrame> features_to_lpc_frames(
    const core::LpcnetFeatureSequence& features, int* unstable_count,
    int order = kLpcOrder);

struct SynthesisResult {
  core::AudioSignal audio;
  int unstable_frames = 0;
};

/// Runs the source-filter loop over explicit frames: excitation is
/// pitch_corr * pulse train + (1 - pitch_corr) * uniform noise, filter and
/// gain interpolate linearly between frame starts (last frame holds), and
/// filter state carries across frames. Output is exactly
/// frames.size() * hop_samples samples.
SynthesisResult synthesize_frames(const std::vector<LpcFrame>& frames,
                                  int hop_samples, std::uint64_t seed);

/// Feature sequence to waveform; bit-identical for identical inputs and seed.
SynthesisResult lpc_synthesize(const core::LpcnetFeatureSequence& features,
                               std::uint64_t seed, int order = kLpcOrder);

}  // namespace fsvc::vocoder

#endif  // FSVC_VOCODER_LPC_HPP_
