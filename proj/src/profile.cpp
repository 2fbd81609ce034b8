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

#include "fsvc/pipeline/profile.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fsvc::pipeline {

namespace {

// Relative paths in a profile are relative to the profile file itself.
std::string resolve_against(const std::string& profile_path,
                            const std::string& stored) {
  if (stored.empty()) return stored;
  const std::filesystem::path p(stored);
  if (p.is_absolute()) return stored;
  return (std::filesystem::path(profile_path).parent_path() / p).string();
}

}  // namespace

void save_profile(const std::string& path, const SpeakerProfile& profile) {
  if (profile.checkpoint_path.empty()) {
    throw std::invalid_argument("save_profile: empty checkpoint path");
  }
  if (!(profile.log_f0.std_dev > 1e-8)) {
    throw std::invalid_argument("save_profile: degenerate log-F0 std " +
                                std::to_string(profile.log_f0.std_dev));
  }
  nlohmann::json j;
  j["speaker"] = profile.speaker;
  j["log_f0_mean"] = profile.log_f0.mean;
  j["log_f0_std"] = profile.log_f0.std_dev;
  j["checkpoint"] = profile.checkpoint_path;
  j["ppg_model"] = profile.ppg_model_path;
  j["metadata"] = profile.metadata;
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("profile " + path + ": cannot open for writing");
  }
  out << j.dump(2) << "\n";
  if (!out.good()) {
    throw std::runtime_error("profile " + path + ": write failed");
  }
}

SpeakerProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("profile " + path + ": cannot open");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("profile " + path + ": invalid JSON: " + e.what());
  }
  SpeakerProfile p;
  try {
    p.speaker = j.at("speaker").get<std::string>();
    p.log_f0.mean = j.at("log_f0_mean").get<double>();
    p.log_f0.std_dev = j.at("log_f0_std").get<double>();
    p.checkpoint_path = j.at("checkpoint").get<std::string>();
    p.ppg_model_path = j.value("ppg_model", std::string());
    if (j.contains("metadata")) {
      p.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("profile " + path + ": missing or mistyped field: " +
                             e.what());
  }
  if (!(p.log_f0.std_dev > 1e-8)) {
    throw std::runtime_error("profile " + path + ": degenerate log-F0 std " +
                             std::to_string(p.log_f0.std_dev));
  }
  if (p.checkpoint_path.empty()) {
    throw std::runtime_error("profile " + path + ": empty checkpoint path");
  }
  p.checkpoint_path = resolve_against(path, p.checkpoint_path);
  p.ppg_model_path = resolve_against(path, p.ppg_model_path);
  if (!std::filesystem::exists(p.checkpoint_path)) {
    throw std::runtime_error("profile " + path + ": checkpoint " +
                             p.checkpoint_path + " does not exist");
  }
  return p;
}

}  // namespace fsvc::pipeline
