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

// Wall-clock comparison of the one-shot parallel pass against an emulated
// autoregressive decoder that re-decodes the prefix for every output frame.

#ifndef FSVC_SYNTH_BENCHMARK_HPP_
#define FSVC_SYNTH_BENCHMARK_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsvc/synth/model.hpp"

namespace fsvc::synth {

struct BenchmarkRow {
  std::string mode;  // "parallel" or "ar_emulation"
  int t_len = 0;
  double median_ms = 0.0;
  double p90_ms = 0.0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double p90_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.9 * static_cast<double>(v.size())));
  return v[rank - 1];
}

}  // namespace detail

/// Random but deterministic inputs per length; every timing repeats
/// `repeats` times and the rows report median and 90th percentile.
template <typename S>
std::vector<BenchmarkRow> benchmark_inference(const Synthesizer<S>& model,
                                              const std::vector<int>& lengths,
                                              int repeats,
                                              std::uint64_t seed) {
  if (repeats < 1) {
    throw std::invalid_argument("benchmark: repeats must be >= 1");
  }
  using Clock = std::chrono::steady_clock;
  std::vector<BenchmarkRow> rows;
  for (const int t_len : lengths) {
    if (t_len < 16) {
      throw std::invalid_argument("benchmark: length must be >= 16, got " +
                                  std::to_string(t_len));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    nn::Mat<S> log_ppg(t_len, model.config().n_classes);
    for (Eigen::Index r = 0; r < log_ppg.rows(); ++r) {
      for (Eigen::Index c = 0; c < log_ppg.cols(); ++c) {
        log_ppg(r, c) = static_cast<S>(unit(rng));
      }
    }
    log_ppg = nn::softmax_rows(log_ppg).array().log().matrix();
    nn::Mat<S> prosody(t_len, SynthesizerConfig::kProsodyDim);
    for (Eigen::Index r = 0; r < prosody.rows(); ++r) {
      prosody(r, 0) = static_cast<S>(unit(rng));
      prosody(r, 1) = S(1);
    }

    std::vector<double> parallel_ms, ar_ms;
    volatile double sink = 0.0;  // keep the passes observable
    for (int rep = 0; rep < repeats; ++rep) {
      const auto t0 = Clock::now();
      const nn::Mat<S> y = model.forward(log_ppg, prosody);
      const auto t1 = Clock::now();
      sink = sink + static_cast<double>(y(y.rows() - 1, 0));
      parallel_ms.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    for (int rep = 0; rep < repeats; ++rep) {
      const auto t0 = Clock::now();
      const nn::Mat<S> enc = model.encode(log_ppg);
      for (int t = 0; t < t_len; ++t) {
        const nn::Mat<S> y =
            model.decode(enc.topRows(t + 1), prosody.topRows(t + 1));
        sink = sink + static_cast<double>(y(t, 0));
      }
      const auto t1 = Clock::now();
      ar_ms.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
    }

    rows.push_back({"parallel", t_len, detail::median_of(parallel_ms),
                    detail::p90_of(parallel_ms)});
    rows.push_back({"ar_emulation", t_len, detail::median_of(ar_ms),
                    detail::p90_of(ar_ms)});
  }
  return rows;
}

}  // namespace fsvc::synth

#endif  // FSVC_SYNTH_BENCHMARK_HPP_
