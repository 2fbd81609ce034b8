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

#include <cmath>
#include <random>

#include <doctest.h>

#include "fsvc/dsp/frontend.hpp"
#include "testing/oracles.hpp"
#include "testing/signals.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

using fsvc::core::LpcnetFeatureSequence;
using fsvc::testing::dense_yule_walker;
using fsvc::vocoder::LevinsonResult;
using fsvc::vocoder::LpcFrame;

Eigen::VectorXd random_spectrum(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd s(fsvc::vocoder::kSpectrumBins);
  for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = std::exp(dist(rng));
  return s;
}

LpcnetFeatureSequence features_from_rows(const Eigen::MatrixXd& rows,
                                         int hop_samples = 160) {
  LpcnetFeatureSequence f;
  f.frames = rows;
  f.grid.window_ms = 25.0;
  f.grid.hop_ms = 10.0;
  f.grid.window_samples = 400;
  f.grid.hop_samples = hop_samples;
  f.grid.n_frames = static_cast<int>(rows.rows());
  return f;
}

// One feature row with given log band energies, period, and correlation.
Eigen::RowVectorXd feature_row(const Eigen::VectorXd& log_bands,
                               double period_samples, double corr) {
  Eigen::RowVectorXd row(20);
  row.head(18) = (fsvc::dsp::dct2_orthonormal(18) * log_bands).transpose();
  row[18] = fsvc::dsp::encode_pitch_period(period_samples);
  row[19] = corr;
  return row;
}

}  // namespace

TEST_CASE("levinson solves an AR(1) process exactly") {
  const double rho = 0.9;
  SUBCASE("at its own order") {
    Eigen::VectorXd r(2);
    r << 2.0, 2.0 * rho;
    const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
    CHECK(lev.stable);
    CHECK(lev.a[0] == doctest::Approx(rho).epsilon(1e-12));
    CHECK(lev.reflection[0] == doctest::Approx(rho).epsilon(1e-12));
    CHECK(lev.prediction_error ==
          doctest::Approx(2.0 * (1.0 - rho * rho)).epsilon(1e-12));
  }
  SUBCASE("higher orders leave the extra taps at zero") {
    Eigen::VectorXd r(5);
    for (int m = 0; m < 5; ++m) r[m] = 2.0 * std::pow(rho, m);
    const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
    CHECK(lev.stable);
    CHECK(lev.a[0] == doctest::Approx(rho).epsilon(1e-10));
    for (int i = 1; i < 4; ++i) {
      CHECK(std::abs(lev.a[i]) < 1e-10);
      CHECK(std::abs(lev.reflection[i]) < 1e-10);
    }
  }
}

TEST_CASE("levinson agrees with a dense yule-walker solve to 1e-8") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    const Eigen::VectorXd spectrum = random_spectrum(seed);
    const Eigen::VectorXd r = fsvc::vocoder::spectrum_to_autocorr(spectrum, 16);
    const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
    REQUIRE(lev.stable);

    const Eigen::VectorXd dense = dense_yule_walker(r);
    CHECK((lev.a - dense).norm() / dense.norm() < 1e-8);

    const double dense_err = r[0] - dense.dot(r.tail(16));
    CHECK(lev.prediction_error ==
          doctest::Approx(dense_err).epsilon(1e-8));

    // the recursion's error equals r0 times the reflection attenuations
    double product = r[0];
    for (int i = 0; i < 16; ++i) {
      product *= 1.0 - lev.reflection[i] * lev.reflection[i];
    }
    CHECK(lev.prediction_error == doctest::Approx(product).epsilon(1e-10));
  }
}

TEST_CASE("levinson input validation") {
  Eigen::VectorXd bad(3);
  bad << -1.0, 0.5, 0.2;
  CHECK_THROWS_AS(fsvc::vocoder::levinson_durbin(bad), std::invalid_argument);
  bad << 0.0, 0.5, 0.2;
  CHECK_THROWS_AS(fsvc::vocoder::levinson_durbin(bad), std::invalid_argument);
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(fsvc::vocoder::levinson_durbin(one), std::invalid_argument);
}

TEST_CASE("white spectrum needs no prediction") {
  const Eigen::VectorXd flat =
      Eigen::VectorXd::Constant(fsvc::vocoder::kSpectrumBins, 3.5);
  const Eigen::VectorXd r = fsvc::vocoder::spectrum_to_autocorr(flat, 16);
  CHECK(r[0] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(r.tail(16).cwiseAbs().maxCoeff() < 1e-12);
  const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
  CHECK(lev.stable);
  CHECK(lev.a.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(lev.prediction_error == doctest::Approx(3.5).epsilon(1e-9));
}

TEST_CASE("autocorrelation matches a naive inverse transform") {
  const Eigen::VectorXd spectrum = random_spectrum(77);
  const int n = fsvc::vocoder::kSpectrumFftSize;
  for (int m : {0, 1, 7, 100, 255}) {
    // full-length symmetric spectrum, inverse DFT evaluated directly
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double p =
          k <= n / 2 ? spectrum[k] : spectrum[n - k];
      acc += p * std::cos(2.0 * kPi * k * m / n);
    }
    acc /= n;
    const Eigen::VectorXd r = fsvc::vocoder::spectrum_to_autocorr(spectrum, m);
    CHECK(r[m] == doctest::Approx(acc).epsilon(1e-10));
  }
  CHECK_THROWS_AS(fsvc::vocoder::spectrum_to_autocorr(spectrum, 256),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsvc::vocoder::spectrum_to_autocorr(spectrum.head(10).eval(), 4),
                  std::invalid_argument);
}

TEST_CASE("an AR(2) process is identified from its samples within 0.05") {
  const double a1 = 0.75, a2 = -0.5;
  std::mt19937_64 rng(123);
  std::normal_distribution<double> e(0.0, 1.0);
  const int n = 60000;
  std::vector<double> x(n + 2, 0.0);
  for (int i = 2; i < n + 2; ++i) {
    x[i] = a1 * x[i - 1] + a2 * x[i - 2] + e(rng);
  }
  Eigen::VectorXd r = Eigen::VectorXd::Zero(3);
  for (int m = 0; m <= 2; ++m) {
    double acc = 0.0;
    for (int i = 1002; i + m < n + 2; ++i) acc += x[i] * x[i + m];
    r[m] = acc / (n - 1000);
  }
  const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
  REQUIRE(lev.stable);
  CHECK(lev.a[0] == doctest::Approx(a1).epsilon(0.07));
  CHECK(std::abs(lev.a[0] - a1) < 0.05);
  CHECK(std::abs(lev.a[1] - a2) < 0.05);
}

TEST_CASE("cepstral transform inverts the band energies") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist(-2.0, 1.5);
  Eigen::VectorXd log_bands(18);
  for (int b = 0; b < 18; ++b) log_bands[b] = dist(rng);
  const Eigen::VectorXd cepstra = fsvc::dsp::dct2_orthonormal(18) * log_bands;
  const Eigen::VectorXd back =
      fsvc::vocoder::cepstra_to_band_log_energies(cepstra);
  CHECK((back - log_bands).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(
      fsvc::vocoder::cepstra_to_band_log_energies(cepstra.head(17).eval()),
      std::invalid_argument);
}

TEST_CASE("band energies expand to a bounded interpolated spectrum") {
  SUBCASE("constant bands give a flat spectrum") {
    const Eigen::VectorXd bands = Eigen::VectorXd::Constant(18, -1.0);
    const Eigen::VectorXd s = fsvc::vocoder::band_log_energies_to_spectrum(bands);
    CHECK(s.size() == fsvc::vocoder::kSpectrumBins);
    CHECK((s.array() - std::exp(-1.0)).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("values stay between the extreme bands and edges are flat") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::VectorXd bands(18);
    for (int b = 0; b < 18; ++b) bands[b] = dist(rng);
    const Eigen::VectorXd s = fsvc::vocoder::band_log_energies_to_spectrum(bands);
    CHECK(s.minCoeff() >= std::exp(bands.minCoeff()) - 1e-12);
    CHECK(s.maxCoeff() <= std::exp(bands.maxCoeff()) + 1e-12);
    CHECK(s[0] == doctest::Approx(std::exp(bands[0])));
    CHECK(s[fsvc::vocoder::kSpectrumBins - 1] ==
          doctest::Approx(std::exp(bands[17])));
  }
}

TEST_CASE("random cepstra always yield stable filters") {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> dist(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd log_bands(18);
    for (int b = 0; b < 18; ++b) log_bands[b] = dist(rng);
    const Eigen::VectorXd spectrum =
        fsvc::vocoder::band_log_energies_to_spectrum(log_bands);
    Eigen::VectorXd r = fsvc::vocoder::spectrum_to_autocorr(spectrum, 16);
    r[0] *= fsvc::vocoder::kAutocorrRelativeFloor;
    const LevinsonResult lev = fsvc::vocoder::levinson_durbin(r);
    CHECK(lev.stable);
    CHECK(lev.reflection.cwiseAbs().maxCoeff() < 1.0);
    CHECK(lev.prediction_error > 0.0);
  }
}

TEST_CASE("zero gain synthesizes exact digital silence of exact length") {
  std::vector<LpcFrame> frames(5);
  for (auto& f : frames) {
    f.a = Eigen::VectorXd::Zero(16);
    f.gain = 0.0;
    f.pitch_period = 100.0;
    f.pitch_corr = 0.5;
  }
  const auto out = fsvc::vocoder::synthesize_frames(frames, 160, 7);
  CHECK(out.audio.samples.size() == 5 * 160);
  CHECK(out.audio.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fully voiced excitation is a pulse train at the coded period") {
  std::vector<LpcFrame> frames(4);
  for (auto& f : frames) {
    f.a = Eigen::VectorXd::Zero(8);
    f.gain = 1.0;
    f.pitch_period = 80.0;
    f.pitch_corr = 1.0;
  }
  const auto out = fsvc::vocoder::synthesize_frames(frames, 160, 3);
  REQUIRE(out.audio.samples.size() == 640);
  std::vector<Eigen::Index> hits;
  for (Eigen::Index n = 0; n < 640; ++n) {
    const double v = out.audio.samples[n];
    if (v != 0.0) {
      CHECK(v == doctest::Approx(std::sqrt(80.0)).epsilon(1e-12));
      hits.push_back(n);
    }
  }
  REQUIRE(hits.size() == 8);
  for (std::size_t i = 1; i < hits.size(); ++i) {
    CHECK(hits[i] - hits[i - 1] == 80);
  }
}

TEST_CASE("synthesize_frames input validation") {
  std::vector<LpcFrame> frames(2);
  frames[0].a = Eigen::VectorXd::Zero(8);
  frames[1].a = Eigen::VectorXd::Zero(9);
  CHECK_THROWS_AS(fsvc::vocoder::synthesize_frames(frames, 160, 0),
                  std::invalid_argument);
  frames[1].a = Eigen::VectorXd::Zero(8);
  CHECK_THROWS_AS(fsvc::vocoder::synthesize_frames(frames, 0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsvc::vocoder::synthesize_frames({}, 160, 0),
                  std::invalid_argument);
}

TEST_CASE("feature rows decode period, correlation, and a usable filter") {
  Eigen::MatrixXd rows(2, 20);
  rows.row(0) = feature_row(Eigen::VectorXd::Constant(18, -2.0), 123.0, 0.8);
  rows.row(1) = feature_row(Eigen::VectorXd::Constant(18, -2.0), 64.0, 1.7);
  int unstable = -1;
  const auto frames = fsvc::vocoder::features_to_lpc_frames(
      features_from_rows(rows), &unstable);
  CHECK(unstable == 0);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].pitch_period == doctest::Approx(123.0).epsilon(1e-9));
  CHECK(frames[0].pitch_corr == doctest::Approx(0.8));
  CHECK(frames[1].pitch_corr == 1.0);  // clamped
  CHECK(frames[0].a.size() == 16);
  CHECK(frames[0].gain > 0.0);

  CHECK_THROWS_AS(fsvc::vocoder::features_to_lpc_frames(
                      features_from_rows(rows.leftCols(19).eval()), &unstable),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsvc::vocoder::features_to_lpc_frames(features_from_rows(rows),
                                                        &unstable, 0),
                  std::invalid_argument);
}

TEST_CASE("a frame with an overflowing spectrum reuses the previous filter") {
  Eigen::MatrixXd rows(3, 20);
  rows.row(0) = feature_row(Eigen::VectorXd::Constant(18, -1.0), 100.0, 0.5);
  rows.row(1) = feature_row(Eigen::VectorXd::Constant(18, 1e4), 100.0, 0.5);
  rows.row(2) = feature_row(Eigen::VectorXd::Constant(18, -1.0), 100.0, 0.5);
  int unstable = 0;
  const auto frames = fsvc::vocoder::features_to_lpc_frames(
      features_from_rows(rows), &unstable);
  CHECK(unstable == 1);
  REQUIRE(frames.size() == 3);
  CHECK((frames[1].a - frames[0].a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(frames[1].gain == frames[0].gain);
  CHECK((frames[2].a - frames[0].a).cwiseAbs().maxCoeff() < 1e-12);

  SUBCASE("an unstable first frame falls back to silence coefficients") {
    Eigen::MatrixXd head(1, 20);
    head.row(0) = rows.row(1);
    int count = 0;
    const auto f =
        fsvc::vocoder::features_to_lpc_frames(features_from_rows(head), &count);
    CHECK(count == 1);
    CHECK(f[0].a.cwiseAbs().maxCoeff() == 0.0);
    CHECK(f[0].gain == 0.0);
  }
}

TEST_CASE("synthesis is deterministic in features and seed") {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> dist(-1.5, 0.8);
  Eigen::MatrixXd rows(6, 20);
  for (int t = 0; t < 6; ++t) {
    Eigen::VectorXd bands(18);
    for (int b = 0; b < 18; ++b) bands[b] = dist(rng);
    rows.row(t) = feature_row(bands, 90.0 + t, 0.3);
  }
  const auto features = features_from_rows(rows);
  const auto a = fsvc::vocoder::lpc_synthesize(features, 17);
  const auto b = fsvc::vocoder::lpc_synthesize(features, 17);
  const auto c = fsvc::vocoder::lpc_synthesize(features, 18);
  CHECK(a.audio.samples.size() == 6 * 160);
  CHECK((a.audio.samples - b.audio.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.audio.samples - c.audio.samples).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.unstable_frames == 0);
}

TEST_CASE("copy synthesis preserves the pitch of a 200 Hz harmonic tone") {
  const fsvc::core::AudioSignal sig = fsvc::testing::harmonic_tone(200.0, 0.5);
  auto [grid, frames] = fsvc::dsp::frame_signal(sig);
  const fsvc::core::ProsodyTrack track = fsvc::dsp::estimate_f0(sig, grid);
  const LpcnetFeatureSequence feats =
      fsvc::dsp::compute_bark_features(frames, grid, track);

  const auto out = fsvc::vocoder::lpc_synthesize(feats, 33);
  CHECK(out.unstable_frames == 0);
  CHECK(out.audio.samples.size() ==
        static_cast<Eigen::Index>(grid.n_frames) * grid.hop_samples);
  CHECK(out.audio.samples.allFinite());

  auto [grid2, frames2] = fsvc::dsp::frame_signal(out.audio);
  const fsvc::core::ProsodyTrack back = fsvc::dsp::estimate_f0(out.audio, grid2);
  std::vector<double> voiced_f0;
  for (int t = 2; t < grid2.n_frames - 2; ++t) {
    if (back.voicing[t]) voiced_f0.push_back(std::exp(back.log_f0[t]));
  }
  REQUIRE(voiced_f0.size() > static_cast<std::size_t>(grid2.n_frames) / 2);
  std::sort(voiced_f0.begin(), voiced_f0.end());
  const double median = voiced_f0[voiced_f0.size() / 2];
  CHECK(median == doctest::Approx(200.0).epsilon(0.05));
}
