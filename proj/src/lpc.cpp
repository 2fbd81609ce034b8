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

#include "fsvc/vocoder/lpc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fsvc/dsp/frontend.hpp"

namespace fsvc::vocoder {

LevinsonResult levinson_durbin(const Eigen::VectorXd& autocorr) {
  if (autocorr.size() < 2) {
    throw std::invalid_argument(
        "levinson_durbin: need autocorr up to at least lag 1");
  }
  if (!(autocorr[0] > 0.0)) {
    throw std::invalid_argument("levinson_durbin: autocorr[0] must be positive");
  }
  const int order = static_cast<int>(autocorr.size()) - 1;
  LevinsonResult out;
  out.a = Eigen::VectorXd::Zero(order);
  out.reflection = Eigen::VectorXd::Zero(order);
  out.stable = true;
  double err = autocorr[0];
  for (int i = 1; i <= order; ++i) {
    double acc = autocorr[i];
    for (int j = 1; j < i; ++j) {
      acc -= out.a[j - 1] * autocorr[i - j];
    }
    if (!(err > 0.0) || !std::isfinite(acc)) {
      out.stable = false;
      break;
    }
    const double k = acc / err;
    out.reflection[i - 1] = k;
    if (!(std::abs(k) < 1.0)) {
      out.stable = false;
      break;
    }
    Eigen::VectorXd prev = out.a;
    out.a[i - 1] = k;
    for (int j = 1; j < i; ++j) {
      out.a[j - 1] = prev[j - 1] - k * prev[i - j - 1];
    }
    err *= 1.0 - k * k;
  }
  out.prediction_error = err;
  return out;
}

Eigen::VectorXd cepstra_to_band_log_energies(const Eigen::VectorXd& cepstra) {
  const int n = core::LpcnetFeatureSequence::kNumCepstra;
  if (cepstra.size() != n) {
    throw std::invalid_argument("cepstra_to_band_log_energies: expected " +
                                std::to_string(n) + " coefficients, got " +
                                std::to_string(cepstra.size()));
  }
  // the forward transform is orthonormal, so its transpose inverts it
  const Eigen::MatrixXd dct = dsp::dct2_orthonormal(n);
  return dct.transpose() * cepstra;
}

Eigen::VectorXd band_log_energies_to_spectrum(const Eigen::VectorXd& log_bands) {
  const int n_bands = core::LpcnetFeatureSequence::kNumCepstra;
  if (log_bands.size() != n_bands) {
    throw std::invalid_argument("band_log_energies_to_spectrum: expected " +
                                std::to_string(n_bands) + " bands");
  }
  const Eigen::VectorXd centers_hz =
      dsp::bark_band_centers_hz(n_bands, core::kPipelineSampleRate);
  const double hz_per_bin =
      static_cast<double>(core::kPipelineSampleRate) / kSpectrumFftSize;
  Eigen::VectorXd spectrum(kSpectrumBins);
  int band = 0;
  for (int k = 0; k < kSpectrumBins; ++k) {
    const double f = k * hz_per_bin;
    double log_e;
    if (f <= centers_hz[0]) {
      log_e = log_bands[0];
    } else if (f >= centers_hz[n_bands - 1]) {
      log_e = log_bands[n_bands - 1];
    } else {
      while (centers_hz[band + 1] < f) ++band;
      const double w =
          (f - centers_hz[band]) / (centers_hz[band + 1] - centers_hz[band]);
      log_e = (1.0 - w) * log_bands[band] + w * log_bands[band + 1];
    }
    spectrum[k] = std::exp(log_e);
  }
  return spectrum;
}

Eigen::VectorXd spectrum_to_autocorr(const Eigen::VectorXd& spectrum,
                                     int max_lag) {
  if (spectrum.size() != kSpectrumBins) {
    throw std::invalid_argument("spectrum_to_autocorr: expected " +
                                std::to_string(kSpectrumBins) + " bins");
  }
  if (max_lag < 0 || max_lag >= kSpectrumFftSize / 2) {
    throw std::invalid_argument("spectrum_to_autocorr: bad max_lag");
  }
  Eigen::VectorXd r(max_lag + 1);
  const double w0 = 2.0 * M_PI / kSpectrumFftSize;
  for (int m = 0; m <= max_lag; ++m) {
    double acc = spectrum[0] + spectrum[kSpectrumBins - 1] * std::cos(M_PI * m);
    for (int k = 1; k < kSpectrumBins - 1; ++k) {
      acc += 2.0 * spectrum[k] * std::cos(w0 * k * m);
    }
    r[m] = acc / kSpectrumFftSize;
  }
  return r;
}

std::vector<LpcFrame> features_to_lpc_frames(
    const core::LpcnetFeatureSequence& features, int* unstable_count,
    int order) {
  if (features.frames.cols() != core::LpcnetFeatureSequence::kDim) {
    throw std::invalid_argument("features_to_lpc_frames: expected " +
                                std::to_string(core::LpcnetFeatureSequence::kDim) +
                                " columns");
  }
  if (order < 1 || order >= kSpectrumFftSize / 2) {
    throw std::invalid_argument("features_to_lpc_frames: bad order " +
                                std::to_string(order));
  }
  if (unstable_count != nullptr) *unstable_count = 0;
  std::vector<LpcFrame> frames;
  frames.reserve(features.frames.rows());
  LpcFrame prev;
  prev.a = Eigen::VectorXd::Zero(order);
  prev.gain = 0.0;
  for (Eigen::Index t = 0; t < features.frames.rows(); ++t) {
    const Eigen::VectorXd row = features.frames.row(t);
    LpcFrame frame;
    frame.pitch_period = dsp::decode_pitch_period(
        row[core::LpcnetFeatureSequence::kPeriodColumn]);
    frame.pitch_corr = std::clamp(
        row[core::LpcnetFeatureSequence::kCorrColumn], 0.0, 1.0);

    const Eigen::VectorXd log_bands = cepstra_to_band_log_energies(
        row.head(core::LpcnetFeatureSequence::kNumCepstra));
    const Eigen::VectorXd spectrum = band_log_energies_to_spectrum(log_bands);
    Eigen::VectorXd r = spectrum_to_autocorr(spectrum, order);
    r[0] *= kAutocorrRelativeFloor;
    const LevinsonResult lev = levinson_durbin(r);
    if (lev.stable && std::isfinite(lev.prediction_error) &&
        lev.prediction_error > 0.0) {
      frame.a = lev.a;
      frame.gain = std::sqrt(lev.prediction_error);
    } else {
      frame.a = prev.a;
      frame.gain = prev.gain;
      if (unstable_count != nullptr) ++(*unstable_count);
    }
    prev = frame;
    frames.push_back(std::move(frame));
  }
  return frames;
}

SynthesisResult synthesize_frames(const std::vector<LpcFrame>& frames,
                                  int hop_samples, std::uint64_t seed) {
  if (frames.empty()) {
    throw std::invalid_argument("synthesize_frames: no frames");
  }
  if (hop_samples < 1) {
    throw std::invalid_argument("synthesize_frames: hop must be >= 1");
  }
  const int order = static_cast<int>(frames.front().a.size());
  if (order < 1) {
    throw std::invalid_argument("synthesize_frames: empty coefficient vector");
  }
  for (const auto& f : frames) {
    if (f.a.size() != order) {
      throw std::invalid_argument("synthesize_frames: frame order mismatch");
    }
  }
  const auto n_frames = static_cast<Eigen::Index>(frames.size());
  const Eigen::Index n_samples = n_frames * hop_samples;

  SynthesisResult out;
  out.audio.sample_rate_hz = core::kPipelineSampleRate;
  out.audio.samples = Eigen::VectorXd::Zero(n_samples);

  std::mt19937 rng(static_cast<std::uint32_t>(seed ^ (seed >> 32)));
  const double noise_bound = std::sqrt(3.0);  // unit-variance uniform noise
  std::uniform_real_distribution<double> noise(-noise_bound, noise_bound);

  Eigen::VectorXd history = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd a(order);
  double pulse_phase = 0.0;
  for (Eigen::Index n = 0; n < n_samples; ++n) {
    const Eigen::Index t = n / hop_samples;
    const Eigen::Index t_next = std::min(t + 1, n_frames - 1);
    const double w = static_cast<double>(n - t * hop_samples) / hop_samples;
    const LpcFrame& f0 = frames[t];
    const LpcFrame& f1 = frames[t_next];

    a = (1.0 - w) * f0.a + w * f1.a;
    const double gain = (1.0 - w) * f0.gain + w * f1.gain;
    const double period =
        std::max(1.0, (1.0 - w) * f0.pitch_period + w * f1.pitch_period);
    const double corr =
        std::clamp((1.0 - w) * f0.pitch_corr + w * f1.pitch_corr, 0.0, 1.0);

    double pulse = 0.0;
    pulse_phase += 1.0;
    if (pulse_phase >= period) {
      pulse_phase -= period;
      pulse = std::sqrt(period);  // unit average power
    }
    const double excitation = corr * pulse + (1.0 - corr) * noise(rng);

    double y = gain * excitation;
    for (int i = 0; i < order; ++i) {
      y += a[i] * history[i];
    }
    for (int i = order - 1; i > 0; --i) {
      history[i] = history[i - 1];
    }
    history[0] = y;
    out.audio.samples[n] = y;
  }
  return out;
}

SynthesisResult lpc_synthesize(const core::LpcnetFeatureSequence& features,
                               std::uint64_t seed, int order) {
  int unstable = 0;
  const std::vector<LpcFrame> frames =
      features_to_lpc_frames(features, &unstable, order);
  SynthesisResult out =
      synthesize_frames(frames, features.grid.hop_samples, seed);
  out.unstable_frames = unstable;
  return out;
}

}  // namespace fsvc::vocoder
