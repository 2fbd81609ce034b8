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

// Speaker-independent phonetic posteriorgram extractor: a feed-forward
// classifier over per-frame MFCC vectors whose clamped, renormalized
// log posteriors form the linguistic representation passed downstream.

#ifndef FSVC_PPG_EXTRACTOR_HPP_
#define FSVC_PPG_EXTRACTOR_HPP_

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

namespace fsvc::ppg {

inline constexpr int kDefaultClasses = 64;
inline constexpr int kDefaultHidden = 128;
inline constexpr double kPosteriorFloor = 1e-8;

template <typename S>
struct PpgParams {
  nn::Mat<S> w1;
  nn::Vec<S> b1;
  nn::Mat<S> w2;
  nn::Vec<S> b2;
  nn::Mat<S> w3;
  nn::Vec<S> b3;

  template <typename F>
  void for_each_tensor(F&& f) {
    f(w1);
    f(b1);
    f(w2);
    f(b2);
    f(w3);
    f(b3);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(w1);
    f(b1);
    f(w2);
    f(b2);
    f(w3);
    f(b3);
  }
  static std::vector<std::string> tensor_names() {
    return {"ppg.w1", "ppg.b1", "ppg.w2", "ppg.b2", "ppg.w3", "ppg.b3"};
  }
};

struct PpgTrainOptions {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

template <typename S>
class PpgExtractor {
 public:
  explicit PpgExtractor(int n_classes = kDefaultClasses,
                        int hidden = kDefaultHidden)
      : n_classes_(n_classes), hidden_(hidden) {
    if (n_classes < 1 || hidden < 1) {
      throw std::invalid_argument("PpgExtractor: sizes must be positive");
    }
    params_.w1 = nn::Mat<S>::Zero(core::MfccSequence::kDim, hidden);
    params_.b1 = nn::Vec<S>::Zero(hidden);
    params_.w2 = nn::Mat<S>::Zero(hidden, hidden);
    params_.b2 = nn::Vec<S>::Zero(hidden);
    params_.w3 = nn::Mat<S>::Zero(hidden, n_classes);
    params_.b3 = nn::Vec<S>::Zero(n_classes);
  }

  int n_classes() const { return n_classes_; }
  int hidden() const { return hidden_; }
  PpgParams<S>& params() { return params_; }
  const PpgParams<S>& params() const { return params_; }

  /// Glorot-initializes the weights; biases stay zero.
  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    nn::glorot_uniform_fill(params_.w1, rng);
    nn::glorot_uniform_fill(params_.w2, rng);
    nn::glorot_uniform_fill(params_.w3, rng);
  }

  /// Per-frame class logits, rows aligned with the input rows.
  nn::Mat<S> logits(const nn::Mat<S>& features) const {
    if (features.cols() != core::MfccSequence::kDim) {
      throw std::invalid_argument(
          "PpgExtractor: expected " +
          std::to_string(core::MfccSequence::kDim) + "-dim features, got " +
          std::to_string(features.cols()));
    }
    nn::Mat<S> h1 = nn::linear(features, params_.w1, params_.b1);
    h1 = h1.array().tanh();
    nn::Mat<S> h2 = nn::linear(h1, params_.w2, params_.b2);
    h2 = h2.array().tanh();
    return nn::linear(h2, params_.w3, params_.b3);
  }

  /// Log posteriors with a floor: softmax rows are clamped below at
  /// kPosteriorFloor and renormalized before the log, so exp of every output
  /// row sums to one and no entry is materially below log(1e-8).
  core::PpgSequence extract(const core::MfccSequence& mfcc) const {
    const nn::Mat<S> lg = logits(mfcc.frames.template cast<S>().eval());
    const Eigen::MatrixXd logits_d = lg.template cast<double>();
    core::PpgSequence out;
    out.n_classes = n_classes_;
    out.grid = mfcc.grid;
    out.log_post.resize(logits_d.rows(), logits_d.cols());
    for (Eigen::Index r = 0; r < logits_d.rows(); ++r) {
      const double maxv = logits_d.row(r).maxCoeff();
      Eigen::ArrayXd p = (logits_d.row(r).array() - maxv).exp();
      p /= p.sum();
      p = p.max(kPosteriorFloor);
      p /= p.sum();
      out.log_post.row(r) = p.log().matrix();
    }
    return out;
  }

  /// Minibatch Adam on softmax cross-entropy. Row order is reshuffled every
  /// epoch from the seeded generator. Returns the mean loss per epoch
  /// (weighted by batch size); epochs == 0 returns empty and changes nothing.
  std::vector<double> train(const nn::Mat<S>& features,
                            const Eigen::VectorXi& labels,
                            const PpgTrainOptions& opts) {
    if (features.rows() != labels.size()) {
      throw std::invalid_argument("PpgExtractor::train: label count mismatch");
    }
    if (features.rows() == 0) {
      throw std::invalid_argument("PpgExtractor::train: empty training set");
    }
    if (opts.batch_size < 1) {
      throw std::invalid_argument("PpgExtractor::train: batch_size must be >= 1");
    }
    std::vector<double> epoch_losses;
    if (opts.epochs == 0) return epoch_losses;

    nn::AdamState<S> adam;
    adam.lr = static_cast<S>(opts.learning_rate);
    std::mt19937_64 rng(opts.seed);
    std::vector<Eigen::Index> order(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) order[i] = i;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(opts.batch_size)) {
        const std::size_t n =
            std::min<std::size_t>(opts.batch_size, order.size() - start);
        nn::Mat<S> x(n, features.cols());
        Eigen::VectorXi y(n);
        for (std::size_t i = 0; i < n; ++i) {
          x.row(i) = features.row(order[start + i]);
          y[i] = labels[order[start + i]];
        }
        total += step_batch(x, y, adam) * static_cast<double>(n);
      }
      epoch_losses.push_back(total / static_cast<double>(features.rows()));
    }
    return epoch_losses;
  }

  void save(const std::string& path,
            const std::vector<std::pair<std::string, std::string>>& extra_meta =
                {}) const {
    io::ModelFile mf;
    nn::append_tensors(mf, PpgParams<S>::tensor_names(), params_);
    mf.metadata = {{"model_type", "ppg_extractor"},
                   {"n_classes", std::to_string(n_classes_)},
                   {"hidden", std::to_string(hidden_)},
                   {"input_dim", std::to_string(core::MfccSequence::kDim)}};
    for (const auto& kv : extra_meta) mf.metadata.push_back(kv);
    io::save_model(path, mf);
  }

  static PpgExtractor load(const std::string& path) {
    const io::ModelFile mf = io::load_model(path);
    const std::string* type = mf.find_meta("model_type");
    if (type == nullptr || *type != "ppg_extractor") {
      throw std::runtime_error(path + ": model_type is not ppg_extractor");
    }
    const std::string* classes = mf.find_meta("n_classes");
    const std::string* hidden = mf.find_meta("hidden");
    if (classes == nullptr || hidden == nullptr) {
      throw std::runtime_error(path + ": missing n_classes/hidden metadata");
    }
    PpgExtractor out(std::stoi(*classes), std::stoi(*hidden));
    nn::load_tensors(mf, PpgParams<S>::tensor_names(), out.params_);
    return out;
  }

 private:
  double step_batch(const nn::Mat<S>& x, const Eigen::VectorXi& y,
                    nn::AdamState<S>& adam) {
    nn::Mat<S> a1 = nn::linear(x, params_.w1, params_.b1);
    nn::Mat<S> h1 = a1.array().tanh();
    nn::Mat<S> a2 = nn::linear(h1, params_.w2, params_.b2);
    nn::Mat<S> h2 = a2.array().tanh();
    nn::Mat<S> lg = nn::linear(h2, params_.w3, params_.b3);
    const auto xent = nn::softmax_cross_entropy(lg, y);

    PpgParams<S> grads;
    nn::Mat<S> dlg = nn::softmax_cross_entropy_backward(xent.probs, y);
    auto g3 = nn::linear_backward(h2, params_.w3, dlg);
    grads.w3 = g3.dw;
    grads.b3 = g3.db;
    nn::Mat<S> da2 =
        ((S(1) - h2.array().square()) * g3.dx.array()).matrix();
    auto g2 = nn::linear_backward(h1, params_.w2, da2);
    grads.w2 = g2.dw;
    grads.b2 = g2.db;
    nn::Mat<S> da1 =
        ((S(1) - h1.array().square()) * g2.dx.array()).matrix();
    auto g1 = nn::linear_backward(x, params_.w1, da1);
    grads.w1 = g1.dw;
    grads.b1 = g1.db;

    nn::adam_step(params_, grads, adam);
    return static_cast<double>(xent.loss);
  }

  int n_classes_;
  int hidden_;
  PpgParams<S> params_;
};

/// Saves log posteriors in the framed-feature container.
void save_ppg_file(const std::string& path, const core::PpgSequence& ppg);

/// Loads log posteriors; rejects rows whose exp does not sum to ~1.
core::PpgSequence load_ppg_file(const std::string& path);

}  // namespace fsvc::ppg

#endif  // FSVC_PPG_EXTRACTOR_HPP_
