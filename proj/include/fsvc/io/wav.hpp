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

#ifndef FSVC_IO_WAV_HPP_
#define FSVC_IO_WAV_HPP_

#include <string>

#include "fsvc/core/types.hpp"

namespace fsvc::io {

/// Reads a 16 kHz mono 16-bit PCM RIFF/WAVE file, scaling samples to
/// [-1, 1] by 1/32768. Anything else is rejected with a diagnostic naming
/// the offending field.
core::AudioSignal read_wav(const std::string& path);

/// Writes 16-bit PCM mono; samples are clamped to [-1, 1] and scaled by
/// 32767. Non-finite samples are rejected.
void write_wav(const core::AudioSignal& signal, const std::string& path);

}  // namespace fsvc::io

#endif  // FSVC_IO_WAV_HPP_
