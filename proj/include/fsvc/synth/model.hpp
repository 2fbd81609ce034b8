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

// Non-autoregressive synthesizer: log posteriorgrams plus a two-column
// prosody track (normalized log-F0, voicing) in, 20-dim vocoder features
// out. Both the encoder and decoder are stacks of post-norm blocks of
// self-attention followed by a two-layer 1D convolution. Every frame is
// produced in one parallel pass; an autoregressive decoder is only
// emulated for benchmarking.

#ifndef FSVC_SYNTH_MODEL_HPP_
#define FSVC_SYNTH_MODEL_HPP_

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsvc/core/types.hpp"
#include "fsvc/io/model_file.hpp"
#include "fsvc/nn/adam.hpp"
#include "fsvc/nn/init.hpp"
#include "fsvc/nn/model_io.hpp"
#include "fsvc/nn/ops.hpp"

namespace fsvc::synth {

struct SynthesizerConfig {
  int n_classes = 64;   // posteriorgram width fed to the input projection
  int model_dim = 512;
  int n_blocks = 6;
  int n_heads = 4;
  int conv_kernel = 3;

  static constexpr int kProsodyDim = 2;
  static constexpr int kOutDim = core::LpcnetFeatureSequence::kDim;

  int conv_hidden() const { return 4 * model_dim; }

  /// Small configuration that trains and benchmarks on one core.
  static SynthesizerConfig desk() {
    SynthesizerConfig cfg;
    cfg.model_dim = 64;
    cfg.n_blocks = 2;
    cfg.n_heads = 2;
    return cfg;
  }

  void validate() const {
    if (n_classes < 1) throw std::invalid_argument("config: n_classes < 1");
    if (model_dim < 2 || model_dim % 2 != 0) {
      throw std::invalid_argument("config: model_dim must be even and >= 2");
    }
    if (n_blocks < 1) throw std::invalid_argument("config: n_blocks < 1");
    if (n_heads < 1 || model_dim % n_heads != 0) {
      throw std::invalid_argument(
          "config: model_dim must be divisible by n_heads");
    }
    if (conv_kernel < 1 || conv_kernel % 2 == 0) {
      throw std::invalid_argument("config: conv_kernel must be odd");
    }
  }
};

template <typename S>
struct BlockParams {
  nn::AttentionParams<S> attn;
  nn::Vec<S> ln1_gain, ln1_bias;
  std::vector<nn::Mat<S>> conv1_taps;
  nn::Vec<S> conv1_bias;
  std::vector<nn::Mat<S>> conv2_taps;
  nn::Vec<S> conv2_bias;
  nn::Vec<S> ln2_gain, ln2_bias;

  template <typename F>
  void for_each_tensor(F&& f) {
    f(attn.wq);
    f(attn.bq);
    f(attn.wk);
    f(attn.bk);
    f(attn.wv);
    f(attn.bv);
    f(attn.wo);
    f(attn.bo);
    f(ln1_gain);
    f(ln1_bias);
    for (auto& t : conv1_taps) f(t);
    f(conv1_bias);
    for (auto& t : conv2_taps) f(t);
    f(conv2_bias);
    f(ln2_gain);
    f(ln2_bias);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(attn.wq);
    f(attn.bq);
    f(attn.wk);
    f(attn.bk);
    f(attn.wv);
    f(attn.bv);
    f(attn.wo);
    f(attn.bo);
    f(ln1_gain);
    f(ln1_bias);
    for (const auto& t : conv1_taps) f(t);
    f(conv1_bias);
    for (const auto& t : conv2_taps) f(t);
    f(conv2_bias);
    f(ln2_gain);
    f(ln2_bias);
  }

  static BlockParams zeros(const SynthesizerConfig& cfg) {
    const int d = cfg.model_dim;
    const int h = cfg.conv_hidden();
    BlockParams b;
    b.attn.wq = nn::Mat<S>::Zero(d, d);
    b.attn.wk = nn::Mat<S>::Zero(d, d);
    b.attn.wv = nn::Mat<S>::Zero(d, d);
    b.attn.wo = nn::Mat<S>::Zero(d, d);
    b.attn.bq = nn::Vec<S>::Zero(d);
    b.attn.bk = nn::Vec<S>::Zero(d);
    b.attn.bv = nn::Vec<S>::Zero(d);
    b.attn.bo = nn::Vec<S>::Zero(d);
    b.ln1_gain = nn::Vec<S>::Zero(d);
    b.ln1_bias = nn::Vec<S>::Zero(d);
    for (int k = 0; k < cfg.conv_kernel; ++k) {
      b.conv1_taps.push_back(nn::Mat<S>::Zero(d, h));
      b.conv2_taps.push_back(nn::Mat<S>::Zero(h, d));
    }
    b.conv1_bias = nn::Vec<S>::Zero(h);
    b.conv2_bias = nn::Vec<S>::Zero(d);
    b.ln2_gain = nn::Vec<S>::Zero(d);
    b.ln2_bias = nn::Vec<S>::Zero(d);
    return b;
  }
};

template <typename S>
struct SynthParams {
  nn::Mat<S> in_w;
  nn::Vec<S> in_b;
  nn::Vec<S> in_ln_gain, in_ln_bias;
  std::vector<BlockParams<S>> encoder;
  nn::Mat<S> bridge_w;
  nn::Vec<S> bridge_b;
  std::vector<BlockParams<S>> decoder;
  nn::Mat<S> out_w;
  nn::Vec<S> out_b;

  template <typename F>
  void for_each_tensor(F&& f) {
    f(in_w);
    f(in_b);
    f(in_ln_gain);
    f(in_ln_bias);
    for (auto& b : encoder) b.for_each_tensor(f);
    f(bridge_w);
    f(bridge_b);
    for (auto& b : decoder) b.for_each_tensor(f);
    f(out_w);
    f(out_b);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(in_w);
    f(in_b);
    f(in_ln_gain);
    f(in_ln_bias);
    for (const auto& b : encoder) b.for_each_tensor(f);
    f(bridge_w);
    f(bridge_b);
    for (const auto& b : decoder) b.for_each_tensor(f);
    f(out_w);
    f(out_b);
  }

  static SynthParams zeros(const SynthesizerConfig& cfg) {
    const int d = cfg.model_dim;
    SynthParams p;
    p.in_w = nn::Mat<S>::Zero(cfg.n_classes, d);
    p.in_b = nn::Vec<S>::Zero(d);
    p.in_ln_gain = nn::Vec<S>::Zero(d);
    p.in_ln_bias = nn::Vec<S>::Zero(d);
    p.bridge_w = nn::Mat<S>::Zero(d + SynthesizerConfig::kProsodyDim, d);
    p.bridge_b = nn::Vec<S>::Zero(d);
    p.out_w = nn::Mat<S>::Zero(d, SynthesizerConfig::kOutDim);
    p.out_b = nn::Vec<S>::Zero(SynthesizerConfig::kOutDim);
    for (int i = 0; i < cfg.n_blocks; ++i) {
      p.encoder.push_back(BlockParams<S>::zeros(cfg));
      p.decoder.push_back(BlockParams<S>::zeros(cfg));
    }
    return p;
  }

  long param_count() const {
    long n = 0;
    for_each_tensor([&n](const auto& t) { n += t.size(); });
    return n;
  }

  static std::vector<std::string> tensor_names(const SynthesizerConfig& cfg) {
    std::vector<std::string> names = {"in_proj.w", "in_proj.b", "in_ln.gain",
                                      "in_ln.bias"};
    const auto block_names = [&cfg, &names](const std::string& prefix) {
      for (const char* n :
           {".attn.wq", ".attn.bq", ".attn.wk", ".attn.bk", ".attn.wv",
            ".attn.bv", ".attn.wo", ".attn.bo", ".ln1.gain", ".ln1.bias"}) {
        names.push_back(prefix + n);
      }
      for (int k = 0; k < cfg.conv_kernel; ++k) {
        names.push_back(prefix + ".conv1.k" + std::to_string(k));
      }
      names.push_back(prefix + ".conv1.bias");
      for (int k = 0; k < cfg.conv_kernel; ++k) {
        names.push_back(prefix + ".conv2.k" + std::to_string(k));
      }
      names.push_back(prefix + ".conv2.bias");
      names.push_back(prefix + ".ln2.gain");
      names.push_back(prefix + ".ln2.bias");
    };
    for (int i = 0; i < cfg.n_blocks; ++i) {
      block_names("enc" + std::to_string(i));
    }
    names.push_back("bridge.w");
    names.push_back("bridge.b");
    for (int i = 0; i < cfg.n_blocks; ++i) {
      block_names("dec" + std::to_string(i));
    }
    names.push_back("out.w");
    names.push_back("out.b");
    return names;
  }
};

template <typename S>
struct BlockCache {
  nn::Mat<S> x_in;
  nn::AttentionCache<S> attn;
  nn::LayerNormCache<S> ln1;
  nn::Mat<S> y1;          // output of the first sublayer, input to the second
  nn::Mat<S> conv_h_pre;  // first conv output before the ReLU
  nn::Mat<S> conv_h;
  nn::LayerNormCache<S> ln2;
};

template <typename S>
struct ForwardCache {
  nn::Mat<S> ppg_in;
  nn::Mat<S> in_lin;
  nn::LayerNormCache<S> in_ln;
  nn::Mat<S> in_ln_out;  // before the ReLU
  nn::Mat<S> enc_in;
  std::vector<BlockCache<S>> enc;
  nn::Mat<S> enc_out;
  nn::Mat<S> concat;
  nn::Mat<S> dec_in;
  std::vector<BlockCache<S>> dec;
  nn::Mat<S> dec_out;
};

/// One training utterance: aligned posteriorgram, prosody, and target rows.
template <typename S>
struct SynthExample {
  nn::Mat<S> log_ppg;  // T x n_classes
  nn::Mat<S> prosody;  // T x 2
  nn::Mat<S> target;   // T x 20
};

struct SynthTrainOptions {
  int epochs = 1;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

template <typename S>
class Synthesizer {
 public:
  explicit Synthesizer(const SynthesizerConfig& cfg)
      : cfg_(checked(cfg)), params_(SynthParams<S>::zeros(cfg_)) {
    params_.in_ln_gain.setOnes();
    for (auto* blocks : {&params_.encoder, &params_.decoder}) {
      for (auto& b : *blocks) {
        b.ln1_gain.setOnes();
        b.ln2_gain.setOnes();
      }
    }
  }

  const SynthesizerConfig& config() const { return cfg_; }
  SynthParams<S>& params() { return params_; }
  const SynthParams<S>& params() const { return params_; }

  /// Glorot-initializes all weight matrices in a fixed traversal order;
  /// biases stay zero and layer-norm gains stay one.
  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    nn::glorot_uniform_fill(params_.in_w, rng);
    const auto init_block = [&rng](BlockParams<S>& b) {
      nn::glorot_uniform_fill(b.attn.wq, rng);
      nn::glorot_uniform_fill(b.attn.wk, rng);
      nn::glorot_uniform_fill(b.attn.wv, rng);
      nn::glorot_uniform_fill(b.attn.wo, rng);
      for (auto& t : b.conv1_taps) nn::glorot_uniform_fill(t, rng);
      for (auto& t : b.conv2_taps) nn::glorot_uniform_fill(t, rng);
    };
    for (auto& b : params_.encoder) init_block(b);
    nn::glorot_uniform_fill(params_.bridge_w, rng);
    for (auto& b : params_.decoder) init_block(b);
    nn::glorot_uniform_fill(params_.out_w, rng);
  }

  /// Linguistic encoder: posteriorgram rows to model-dim rows, one per frame.
  nn::Mat<S> encode(const nn::Mat<S>& log_ppg, ForwardCache<S>* cache = nullptr) const {
    if (log_ppg.rows() < 1) {
      throw std::invalid_argument("synthesizer: empty input");
    }
    if (log_ppg.cols() != cfg_.n_classes) {
      throw std::invalid_argument(
          "synthesizer: posteriorgram has " + std::to_string(log_ppg.cols()) +
          " classes, model expects " + std::to_string(cfg_.n_classes));
    }
    nn::Mat<S> x = nn::linear(log_ppg, params_.in_w, params_.in_b);
    if (cache != nullptr) {
      cache->ppg_in = log_ppg;
      cache->in_lin = x;
    }
    x = nn::layer_norm(x, params_.in_ln_gain, params_.in_ln_bias,
                       cache != nullptr ? &cache->in_ln : nullptr);
    if (cache != nullptr) cache->in_ln_out = x;
    x = nn::relu(x);
    x += nn::position_encoding<S>(x.rows(), cfg_.model_dim);
    if (cache != nullptr) {
      cache->enc_in = x;
      cache->enc.resize(cfg_.n_blocks);
    }
    for (int i = 0; i < cfg_.n_blocks; ++i) {
      x = block_forward(params_.encoder[i], x,
                        cache != nullptr ? &cache->enc[i] : nullptr);
    }
    if (cache != nullptr) cache->enc_out = x;
    return x;
  }

  /// Prosody-conditioned decoder from encoder output to feature rows.
  nn::Mat<S> decode(const nn::Mat<S>& encoded, const nn::Mat<S>& prosody,
                    ForwardCache<S>* cache = nullptr) const {
    if (encoded.cols() != cfg_.model_dim) {
      throw std::invalid_argument("synthesizer: encoded width mismatch");
    }
    if (prosody.rows() != encoded.rows() ||
        prosody.cols() != SynthesizerConfig::kProsodyDim) {
      throw std::invalid_argument(
          "synthesizer: prosody must be " + std::to_string(encoded.rows()) +
          "x" + std::to_string(SynthesizerConfig::kProsodyDim) + ", got " +
          std::to_string(prosody.rows()) + "x" +
          std::to_string(prosody.cols()));
    }
    nn::Mat<S> concat(encoded.rows(), cfg_.model_dim + SynthesizerConfig::kProsodyDim);
    concat << encoded, prosody;
    nn::Mat<S> x = nn::linear(concat, params_.bridge_w, params_.bridge_b);
    x += nn::position_encoding<S>(x.rows(), cfg_.model_dim);
    if (cache != nullptr) {
      cache->concat = std::move(concat);
      cache->dec_in = x;
      cache->dec.resize(cfg_.n_blocks);
    }
    for (int i = 0; i < cfg_.n_blocks; ++i) {
      x = block_forward(params_.decoder[i], x,
                        cache != nullptr ? &cache->dec[i] : nullptr);
    }
    if (cache != nullptr) cache->dec_out = x;
    return nn::linear(x, params_.out_w, params_.out_b);
  }

  /// Full parallel pass; output has exactly one row per input row.
  nn::Mat<S> forward(const nn::Mat<S>& log_ppg, const nn::Mat<S>& prosody,
                     ForwardCache<S>* cache = nullptr) const {
    return decode(encode(log_ppg, cache), prosody, cache);
  }

  /// Mean squared error against `target` and its gradient in `grads`
  /// (overwritten, shaped like the parameters).
  double loss_and_grads(const nn::Mat<S>& log_ppg, const nn::Mat<S>& prosody,
                        const nn::Mat<S>& target, SynthParams<S>& grads) const {
    ForwardCache<S> cache;
    const nn::Mat<S> pred = forward(log_ppg, prosody, &cache);
    if (target.rows() != pred.rows() || target.cols() != pred.cols()) {
      throw std::invalid_argument("synthesizer: target shape mismatch");
    }
    const S loss = nn::mse_loss(pred, target);
    backward(cache, nn::mse_loss_backward(pred, target), grads);
    return static_cast<double>(loss);
  }

  /// Minibatch Adam over whole utterances: gradients of the per-utterance
  /// mean losses are averaged across each batch before the step. Returns the
  /// mean utterance loss per epoch; epochs == 0 changes nothing.
  std::vector<double> train(const std::vector<SynthExample<S>>& data,
                            const SynthTrainOptions& opts) {
    if (data.empty()) {
      throw std::invalid_argument("synthesizer: empty training set");
    }
    if (opts.batch_size < 1) {
      throw std::invalid_argument("synthesizer: batch_size must be >= 1");
    }
    std::vector<double> epoch_losses;
    if (opts.epochs == 0) return epoch_losses;

    nn::AdamState<S> adam;
    adam.lr = static_cast<S>(opts.learning_rate);
    std::mt19937_64 rng(opts.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) order[i] = i;

    SynthParams<S> grads = SynthParams<S>::zeros(cfg_);
    SynthParams<S> acc = SynthParams<S>::zeros(cfg_);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(opts.batch_size)) {
        const std::size_t n =
            std::min<std::size_t>(opts.batch_size, order.size() - start);
        auto acc_views = nn::flat_views<S>(acc);
        for (auto& view : acc_views) view.setZero();
        for (std::size_t i = 0; i < n; ++i) {
          const auto& ex = data[order[start + i]];
          total += loss_and_grads(ex.log_ppg, ex.prosody, ex.target, grads);
          const auto g_views = nn::const_flat_views<S>(grads);
          for (std::size_t j = 0; j < acc_views.size(); ++j) {
            acc_views[j] += g_views[j] / static_cast<S>(n);
          }
        }
        nn::adam_step(params_, acc, adam);
      }
      epoch_losses.push_back(total / static_cast<double>(data.size()));
    }
    return epoch_losses;
  }

  void save(const std::string& path,
            const std::vector<std::pair<std::string, std::string>>& extra_meta =
                {}) const {
    io::ModelFile mf;
    nn::append_tensors(mf, SynthParams<S>::tensor_names(cfg_), params_);
    mf.metadata = {{"model_type", "synthesizer"},
                   {"n_classes", std::to_string(cfg_.n_classes)},
                   {"model_dim", std::to_string(cfg_.model_dim)},
                   {"n_blocks", std::to_string(cfg_.n_blocks)},
                   {"n_heads", std::to_string(cfg_.n_heads)},
                   {"conv_kernel", std::to_string(cfg_.conv_kernel)}};
    for (const auto& kv : extra_meta) mf.metadata.push_back(kv);
    io::save_model(path, mf);
  }

  static Synthesizer load(const std::string& path) {
    const io::ModelFile mf = io::load_model(path);
    const std::string* type = mf.find_meta("model_type");
    if (type == nullptr || *type != "synthesizer") {
      throw std::runtime_error(path + ": model_type is not synthesizer");
    }
    SynthesizerConfig cfg;
    cfg.n_classes = meta_int(mf, path, "n_classes");
    cfg.model_dim = meta_int(mf, path, "model_dim");
    cfg.n_blocks = meta_int(mf, path, "n_blocks");
    cfg.n_heads = meta_int(mf, path, "n_heads");
    cfg.conv_kernel = meta_int(mf, path, "conv_kernel");
    Synthesizer out(cfg);
    nn::load_tensors(mf, SynthParams<S>::tensor_names(cfg), out.params_);
    return out;
  }

 private:
  static SynthesizerConfig checked(SynthesizerConfig cfg) {
    cfg.validate();
    return cfg;
  }

  static int meta_int(const io::ModelFile& mf, const std::string& path,
                      const std::string& key) {
    const std::string* v = mf.find_meta(key);
    if (v == nullptr) {
      throw std::runtime_error(path + ": missing metadata key " + key);
    }
    return std::stoi(*v);
  }

  nn::Mat<S> block_forward(const BlockParams<S>& b, const nn::Mat<S>& x,
                           BlockCache<S>* cache) const {
    nn::Mat<S> a = nn::multi_head_self_attention(
        x, b.attn, cfg_.n_heads, cache != nullptr ? &cache->attn : nullptr);
    a += x;
    nn::Mat<S> y1 = nn::layer_norm(a, b.ln1_gain, b.ln1_bias,
                                   cache != nullptr ? &cache->ln1 : nullptr);
    nn::Mat<S> h_pre = nn::conv1d(y1, b.conv1_taps, b.conv1_bias);
    nn::Mat<S> h = nn::relu(h_pre);
    nn::Mat<S> c = nn::conv1d(h, b.conv2_taps, b.conv2_bias);
    c += y1;
    nn::Mat<S> y2 = nn::layer_norm(c, b.ln2_gain, b.ln2_bias,
                                   cache != nullptr ? &cache->ln2 : nullptr);
    if (cache != nullptr) {
      cache->x_in = x;
      cache->y1 = std::move(y1);
      cache->conv_h_pre = std::move(h_pre);
      cache->conv_h = std::move(h);
    }
    return y2;
  }

  nn::Mat<S> block_backward(const BlockParams<S>& b, const BlockCache<S>& cache,
                            const nn::Mat<S>& dy, BlockParams<S>& grads) const {
    const auto ln2 = nn::layer_norm_backward(cache.ln2, b.ln2_gain, dy);
    grads.ln2_gain = ln2.dgain;
    grads.ln2_bias = ln2.dbias;

    const auto conv2 =
        nn::conv1d_backward(cache.conv_h, b.conv2_taps, ln2.dx);
    grads.conv2_taps = conv2.dtaps;
    grads.conv2_bias = conv2.dbias;
    const nn::Mat<S> dh_pre = nn::relu_backward(cache.conv_h_pre, conv2.dx);
    const auto conv1 = nn::conv1d_backward(cache.y1, b.conv1_taps, dh_pre);
    grads.conv1_taps = conv1.dtaps;
    grads.conv1_bias = conv1.dbias;

    const nn::Mat<S> dy1 = ln2.dx + conv1.dx;  // residual plus conv path
    const auto ln1 = nn::layer_norm_backward(cache.ln1, b.ln1_gain, dy1);
    grads.ln1_gain = ln1.dgain;
    grads.ln1_bias = ln1.dbias;

    const auto attn = nn::multi_head_self_attention_backward(
        cache.x_in, b.attn, cfg_.n_heads, cache.attn, ln1.dx);
    grads.attn = attn.dparams;
    return ln1.dx + attn.dx;  // residual plus attention path
  }

  void backward(const ForwardCache<S>& cache, const nn::Mat<S>& dpred,
                SynthParams<S>& grads) const {
    const auto out = nn::linear_backward(cache.dec_out, params_.out_w, dpred);
    grads.out_w = out.dw;
    grads.out_b = out.db;

    nn::Mat<S> dx = out.dx;
    for (int i = cfg_.n_blocks - 1; i >= 0; --i) {
      dx = block_backward(params_.decoder[i], cache.dec[i], dx,
                          grads.decoder[i]);
    }
    // position encodings are additive constants, so dx passes through
    const auto bridge =
        nn::linear_backward(cache.concat, params_.bridge_w, dx);
    grads.bridge_w = bridge.dw;
    grads.bridge_b = bridge.db;

    dx = bridge.dx.leftCols(cfg_.model_dim);
    for (int i = cfg_.n_blocks - 1; i >= 0; --i) {
      dx = block_backward(params_.encoder[i], cache.enc[i], dx,
                          grads.encoder[i]);
    }
    dx = nn::relu_backward(cache.in_ln_out, dx);
    const auto in_ln =
        nn::layer_norm_backward(cache.in_ln, params_.in_ln_gain, dx);
    grads.in_ln_gain = in_ln.dgain;
    grads.in_ln_bias = in_ln.dbias;
    const auto in = nn::linear_backward(cache.ppg_in, params_.in_w, in_ln.dx);
    grads.in_w = in.dw;
    grads.in_b = in.db;
  }

  SynthesizerConfig cfg_;
  SynthParams<S> params_;
};

}  // namespace fsvc::synth

#endif  // FSVC_SYNTH_MODEL_HPP_
