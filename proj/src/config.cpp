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

#include "fsvc/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fsvc/synth/rate.hpp"

namespace fsvc::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": '" + value +
                             "' is not an integer");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": '" + value +
                             "' is not a number");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error("config: " + msg);
  };
  require(window_ms > 0.0, "frame.window_ms must be positive");
  require(hop_ms > 0.0, "frame.hop_ms must be positive");
  require(hop_ms <= window_ms, "frame.hop_ms must not exceed frame.window_ms");
  require(ppg_classes >= 1, "ppg.classes must be >= 1");
  require(ppg_hidden >= 1, "ppg.hidden must be >= 1");
  require(ppg_epochs >= 0, "ppg.epochs must be >= 0");
  require(ppg_batch_size >= 1, "ppg.batch_size must be >= 1");
  require(ppg_learning_rate > 0.0, "ppg.learning_rate must be positive");
  require(ppg_kmeans_iters >= 1, "ppg.kmeans_iters must be >= 1");
  require(synth_epochs >= 0, "synth.epochs must be >= 0");
  require(synth_batch_size >= 1, "synth.batch_size must be >= 1");
  require(synth_learning_rate > 0.0, "synth.learning_rate must be positive");
  require(vocoder_order >= 1 && vocoder_order <= 64,
          "vocoder.order must be in [1, 64]");
  require(rate >= synth::kMinRate && rate <= synth::kMaxRate,
          "rate must be in [0.5, 2.0]");
  synthesizer_config().validate();  // covers the synth.* shape keys
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config " + path + ": cannot open");
  }
  PipelineConfig cfg;
  const std::map<std::string, std::function<void(const std::string&,
                                                 const std::string&)>>
      setters = {
          {"frame.window_ms",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.window_ms = parse_real(k, v);
           }},
          {"frame.hop_ms",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.hop_ms = parse_real(k, v);
           }},
          {"ppg.classes",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_classes = static_cast<int>(parse_int(k, v));
           }},
          {"ppg.hidden",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_hidden = static_cast<int>(parse_int(k, v));
           }},
          {"ppg.epochs",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_epochs = static_cast<int>(parse_int(k, v));
           }},
          {"ppg.batch_size",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_batch_size = static_cast<int>(parse_int(k, v));
           }},
          {"ppg.learning_rate",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_learning_rate = parse_real(k, v);
           }},
          {"ppg.kmeans_iters",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.ppg_kmeans_iters = static_cast<int>(parse_int(k, v));
           }},
          {"synth.model_dim",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_model_dim = static_cast<int>(parse_int(k, v));
           }},
          {"synth.blocks",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_blocks = static_cast<int>(parse_int(k, v));
           }},
          {"synth.heads",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_heads = static_cast<int>(parse_int(k, v));
           }},
          {"synth.conv_kernel",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_conv_kernel = static_cast<int>(parse_int(k, v));
           }},
          {"synth.epochs",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_epochs = static_cast<int>(parse_int(k, v));
           }},
          {"synth.batch_size",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_batch_size = static_cast<int>(parse_int(k, v));
           }},
          {"synth.learning_rate",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.synth_learning_rate = parse_real(k, v);
           }},
          {"vocoder.order",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.vocoder_order = static_cast<int>(parse_int(k, v));
           }},
          {"rate",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.rate = parse_real(k, v);
           }},
          {"seed",
           [&cfg](const std::string& k, const std::string& v) {
             cfg.seed = static_cast<std::uint64_t>(parse_int(k, v));
           }},
      };

  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config " + path + " line " +
                               std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw std::runtime_error("config " + path + " line " +
                               std::to_string(line_no) + ": unknown key '" +
                               key + "'");
    }
    if (!seen.insert(key).second) {
      throw std::runtime_error("config " + path + " line " +
                               std::to_string(line_no) + ": duplicate key '" +
                               key + "'");
    }
    it->second(key, value);
  }
  cfg.validate();
  return cfg;
}

std::string default_config_text() {
  const PipelineConfig d;
  std::ostringstream out;
  out << "frame.window_ms = " << d.window_ms << "\n"
      << "frame.hop_ms = " << d.hop_ms << "\n"
      << "ppg.classes = " << d.ppg_classes << "\n"
      << "ppg.hidden = " << d.ppg_hidden << "\n"
      << "ppg.epochs = " << d.ppg_epochs << "\n"
      << "ppg.batch_size = " << d.ppg_batch_size << "\n"
      << "ppg.learning_rate = " << d.ppg_learning_rate << "\n"
      << "ppg.kmeans_iters = " << d.ppg_kmeans_iters << "\n"
      << "synth.model_dim = " << d.synth_model_dim << "\n"
      << "synth.blocks = " << d.synth_blocks << "\n"
      << "synth.heads = " << d.synth_heads << "\n"
      << "synth.conv_kernel = " << d.synth_conv_kernel << "\n"
      << "synth.epochs = " << d.synth_epochs << "\n"
      << "synth.batch_size = " << d.synth_batch_size << "\n"
      << "synth.learning_rate = " << d.synth_learning_rate << "\n"
      << "vocoder.order = " << d.vocoder_order << "\n"
      << "rate = " << d.rate << "\n"
      << "seed = " << d.seed << "\n";
  return out.str();
}

}  // namespace fsvc::pipeline
