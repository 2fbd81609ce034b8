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

#include "fsvc/io/wav.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "binary_io.hpp"

namespace fsvc::io {
namespace {

struct FmtChunk {
  std::uint16_t audio_format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  bool seen = false;
};

}  // namespace

core::AudioSignal read_wav(const std::string& path) {
  detail::Reader r(path, "wav");

  char tag[4];
  r.bytes(tag, 4, "RIFF tag");
  if (std::memcmp(tag, "RIFF", 4) != 0) r.fail("not a RIFF file");
  r.u32("RIFF size");
  r.bytes(tag, 4, "WAVE tag");
  if (std::memcmp(tag, "WAVE", 4) != 0) r.fail("not a WAVE file");

  FmtChunk fmt;
  std::vector<std::int16_t> pcm;
  bool data_seen = false;

  while (r.remaining() >= 8) {
    r.bytes(tag, 4, "chunk id");
    const std::uint32_t size = r.u32("chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) r.fail("fmt chunk too small");
      fmt.audio_format = r.u16("fmt.audio_format");
      fmt.channels = r.u16("fmt.channels");
      fmt.sample_rate = r.u32("fmt.sample_rate");
      r.u32("fmt.byte_rate");
      r.u16("fmt.block_align");
      fmt.bits_per_sample = r.u16("fmt.bits_per_sample");
      fmt.seen = true;
      // skip any fmt extension
      std::vector<char> skip(size - 16);
      if (!skip.empty()) r.bytes(skip.data(), skip.size(), "fmt extension");
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!fmt.seen) r.fail("data chunk before fmt chunk");
      if (size == 0) r.fail("empty data chunk");
      if (size % 2 != 0) r.fail("data chunk size not sample-aligned");
      pcm.resize(size / 2);
      r.require(size, "data payload");
      for (auto& s : pcm) {
        s = static_cast<std::int16_t>(r.u16("sample"));
      }
      data_seen = true;
    } else {
      // skip unknown chunk (word-aligned)
      const std::uint32_t padded = size + (size % 2);
      r.require(padded, "chunk payload");
      std::vector<char> skip(padded);
      r.bytes(skip.data(), padded, "chunk payload");
    }
  }

  if (!fmt.seen) throw std::runtime_error("wav " + path + ": missing fmt chunk");
  if (!data_seen)
    throw std::runtime_error("wav " + path + ": missing data chunk");
  if (fmt.audio_format != 1) {
    throw std::runtime_error("wav " + path + ": audio_format must be PCM (1), got " +
                             std::to_string(fmt.audio_format));
  }
  if (fmt.channels != 1) {
    throw std::runtime_error("wav " + path + ": channels must be 1 (mono), got " +
                             std::to_string(fmt.channels));
  }
  if (fmt.sample_rate != core::kPipelineSampleRate) {
    throw std::runtime_error(
        "wav " + path + ": sample rate must be " +
        std::to_string(core::kPipelineSampleRate) + " Hz, got " +
        std::to_string(fmt.sample_rate));
  }
  if (fmt.bits_per_sample != 16) {
    throw std::runtime_error("wav " + path + ": bits_per_sample must be 16, got " +
                             std::to_string(fmt.bits_per_sample));
  }

  core::AudioSignal signal;
  signal.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  signal.samples.resize(static_cast<Eigen::Index>(pcm.size()));
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    signal.samples[static_cast<Eigen::Index>(i)] = pcm[i] / 32768.0;
  }
  return signal;
}

void write_wav(const core::AudioSignal& signal, const std::string& path) {
  if (!signal.samples.allFinite()) {
    throw std::invalid_argument("write_wav: non-finite samples");
  }
  if (signal.samples.size() == 0) {
    throw std::invalid_argument("write_wav: empty signal");
  }

  const std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_bytes = n * 2;
  const std::uint32_t sr = static_cast<std::uint32_t>(signal.sample_rate_hz);

  detail::Writer w(path);
  w.bytes("RIFF", 4);
  w.u32(36 + data_bytes);
  w.bytes("WAVE", 4);
  w.bytes("fmt ", 4);
  w.u32(16);
  w.u16(1);   // PCM
  w.u16(1);   // mono
  w.u32(sr);
  w.u32(sr * 2);  // byte rate
  w.u16(2);       // block align
  w.u16(16);      // bits per sample
  w.bytes("data", 4);
  w.u32(data_bytes);
  // Symmetric 1/32768 quantization step: decode is pcm / 32768, so the
  // encode scale must match or a full round trip drifts by more than one
  // step near full scale.
  for (Eigen::Index i = 0; i < signal.samples.size(); ++i) {
    long q = std::lround(signal.samples[i] * 32768.0);
    q = std::min(std::max(q, -32768L), 32767L);
    w.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  w.finish();
}

}  // namespace fsvc::io
