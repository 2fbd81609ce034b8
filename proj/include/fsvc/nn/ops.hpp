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

// Dense neural-network building blocks with explicit forward and backward
// passes, templated on the scalar type: float for the runtime pipeline,
// double for gradient checks.

#ifndef FSVC_NN_OPS_HPP_
#define FSVC_NN_OPS_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsvc::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

inline constexpr double kLayerNormEps = 1e-5;

// ---------------------------------------------------------------------------
// Linear

template <typename S>
Mat<S> linear(const Mat<S>& x, const Mat<S>& w, const Vec<S>& b) {
  if (x.cols() != w.rows() || w.cols() != b.size()) {
    throw std::invalid_argument("linear: shape mismatch (x " +
                                std::to_string(x.cols()) + " cols, w " +
                                std::to_string(w.rows()) + "x" +
                                std::to_string(w.cols()) + ", b " +
                                std::to_string(b.size()) + ")");
  }
  Mat<S> y = x * w;
  y.rowwise() += b.transpose();
  return y;
}

template <typename S>
struct LinearGrads {
  Mat<S> dx;
  Mat<S> dw;
  Vec<S> db;
};

template <typename S>
LinearGrads<S> linear_backward(const Mat<S>& x, const Mat<S>& w,
                               const Mat<S>& dy) {
  if (dy.rows() != x.rows() || dy.cols() != w.cols()) {
    throw std::invalid_argument("linear_backward: shape mismatch");
  }
  LinearGrads<S> g;
  g.dx = dy * w.transpose();
  g.dw = x.transpose() * dy;
  g.db = dy.colwise().sum().transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Row-wise layer normalization

template <typename S>
struct LayerNormCache {
  Mat<S> xhat;      // normalized rows before gain/bias
  Vec<S> inv_std;   // per-row 1 / sqrt(var + eps)
};

template <typename S>
Mat<S> layer_norm(const Mat<S>& x, const Vec<S>& gain, const Vec<S>& bias,
                  LayerNormCache<S>* cache = nullptr) {
  if (x.cols() < 2) {
    throw std::invalid_argument("layer_norm: need at least 2 columns");
  }
  if (gain.size() != x.cols() || bias.size() != x.cols()) {
    throw std::invalid_argument("layer_norm: gain/bias size mismatch");
  }
  const auto n = static_cast<S>(x.cols());
  Mat<S> xhat(x.rows(), x.cols());
  Vec<S> inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().sum() / n;
    const S is = S(1) / std::sqrt(var + static_cast<S>(kLayerNormEps));
    xhat.row(r) = (x.row(r).array() - mean) * is;
    inv_std[r] = is;
  }
  Mat<S> y = xhat.array().rowwise() * gain.transpose().array();
  y.rowwise() += bias.transpose();
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename S>
struct LayerNormGrads {
  Mat<S> dx;
  Vec<S> dgain;
  Vec<S> dbias;
};

template <typename S>
LayerNormGrads<S> layer_norm_backward(const LayerNormCache<S>& cache,
                                      const Vec<S>& gain, const Mat<S>& dy) {
  const Eigen::Index rows = cache.xhat.rows();
  const Eigen::Index cols = cache.xhat.cols();
  if (dy.rows() != rows || dy.cols() != cols) {
    throw std::invalid_argument("layer_norm_backward: shape mismatch");
  }
  LayerNormGrads<S> g;
  g.dx.resize(rows, cols);
  g.dgain = (dy.array() * cache.xhat.array()).colwise().sum().transpose();
  g.dbias = dy.colwise().sum().transpose();
  const auto n = static_cast<S>(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto dxhat =
        (dy.row(r).array() * gain.transpose().array()).eval();
    const S mean_dxhat = dxhat.mean();
    const S mean_proj = (dxhat * cache.xhat.row(r).array()).mean();
    g.dx.row(r) = cache.inv_std[r] *
                  (dxhat - mean_dxhat - cache.xhat.row(r).array() * mean_proj);
    (void)n;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Activations and row softmax

template <typename S>
Mat<S> relu(const Mat<S>& x) {
  return x.cwiseMax(S(0));
}

template <typename S>
Mat<S> relu_backward(const Mat<S>& x, const Mat<S>& dy) {
  return (x.array() > S(0)).template cast<S>() * dy.array();
}

template <typename S>
Mat<S> softmax_rows(const Mat<S>& x) {
  Mat<S> p(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S maxv = x.row(r).maxCoeff();
    p.row(r) = (x.row(r).array() - maxv).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

/// Backward through softmax given its output p: dx = p .* (dy - rowsum(dy .* p)).
template <typename S>
Mat<S> softmax_rows_backward(const Mat<S>& p, const Mat<S>& dy) {
  Mat<S> dx(p.rows(), p.cols());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const S dot = dy.row(r).dot(p.row(r));
    dx.row(r) = p.row(r).array() * (dy.row(r).array() - dot);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// 1D convolution along the time axis (same zero padding, odd kernel)

template <typename S>
Mat<S> conv1d(const Mat<S>& x, const std::vector<Mat<S>>& taps,
              const Vec<S>& bias) {
  const int kernel = static_cast<int>(taps.size());
  if (kernel == 0 || kernel % 2 == 0) {
    throw std::invalid_argument("conv1d: kernel size must be odd, got " +
                                std::to_string(kernel));
  }
  const Eigen::Index d_in = x.cols();
  const Eigen::Index d_out = taps[0].cols();
  for (const auto& t : taps) {
    if (t.rows() != d_in || t.cols() != d_out) {
      throw std::invalid_argument("conv1d: tap shape mismatch");
    }
  }
  if (bias.size() != d_out) {
    throw std::invalid_argument("conv1d: bias size mismatch");
  }
  const Eigen::Index t_len = x.rows();
  const int off = (kernel - 1) / 2;
  Mat<S> y = Mat<S>::Zero(t_len, d_out);
  y.rowwise() += bias.transpose();
  for (int k = 0; k < kernel; ++k) {
    const int shift = k - off;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(t_len, t_len - shift);
    if (t1 > t0) {
      y.middleRows(t0, t1 - t0).noalias() +=
          x.middleRows(t0 + shift, t1 - t0) * taps[k];
    }
  }
  return y;
}

template <typename S>
struct Conv1dGrads {
  Mat<S> dx;
  std::vector<Mat<S>> dtaps;
  Vec<S> dbias;
};

template <typename S>
Conv1dGrads<S> conv1d_backward(const Mat<S>& x, const std::vector<Mat<S>>& taps,
                               const Mat<S>& dy) {
  const int kernel = static_cast<int>(taps.size());
  const Eigen::Index t_len = x.rows();
  const int off = (kernel - 1) / 2;
  Conv1dGrads<S> g;
  g.dx = Mat<S>::Zero(x.rows(), x.cols());
  g.dbias = dy.colwise().sum().transpose();
  g.dtaps.reserve(kernel);
  for (int k = 0; k < kernel; ++k) {
    g.dtaps.push_back(Mat<S>::Zero(taps[k].rows(), taps[k].cols()));
    const int shift = k - off;
    const Eigen::Index t0 = std::max<Eigen::Index>(0, -shift);
    const Eigen::Index t1 = std::min<Eigen::Index>(t_len, t_len - shift);
    if (t1 > t0) {
      g.dtaps[k].noalias() = x.middleRows(t0 + shift, t1 - t0).transpose() *
                             dy.middleRows(t0, t1 - t0);
      g.dx.middleRows(t0 + shift, t1 - t0).noalias() +=
          dy.middleRows(t0, t1 - t0) * taps[k].transpose();
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Multi-head self-attention (full, non-causal)

template <typename S>
struct AttentionParams {
  Mat<S> wq, wk, wv, wo;  // D x D
  Vec<S> bq, bk, bv, bo;  // D
};

template <typename S>
struct AttentionCache {
  Mat<S> q, k, v;                 // T x D projections
  std::vector<Mat<S>> weights;    // per head, T x T softmax rows
  Mat<S> concat;                  // T x D heads side by side
};

template <typename S>
Mat<S> multi_head_self_attention(const Mat<S>& x, const AttentionParams<S>& p,
                                 int n_heads,
                                 AttentionCache<S>* cache = nullptr) {
  const Eigen::Index d = x.cols();
  if (n_heads <= 0 || d % n_heads != 0) {
    throw std::invalid_argument("attention: model dim " + std::to_string(d) +
                                " not divisible by " +
                                std::to_string(n_heads) + " heads");
  }
  const Eigen::Index dh = d / n_heads;
  const S inv_scale = S(1) / std::sqrt(static_cast<S>(dh));

  Mat<S> q = linear(x, p.wq, p.bq);
  Mat<S> k = linear(x, p.wk, p.bk);
  Mat<S> v = linear(x, p.wv, p.bv);

  Mat<S> concat(x.rows(), d);
  std::vector<Mat<S>> weights;
  weights.reserve(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    const auto qh = q.middleCols(h * dh, dh);
    const auto kh = k.middleCols(h * dh, dh);
    const auto vh = v.middleCols(h * dh, dh);
    Mat<S> scores = qh * kh.transpose() * inv_scale;
    Mat<S> a = softmax_rows(scores);
    concat.middleCols(h * dh, dh).noalias() = a * vh;
    weights.push_back(std::move(a));
  }
  Mat<S> y = linear(concat, p.wo, p.bo);
  if (cache != nullptr) {
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->weights = std::move(weights);
    cache->concat = std::move(concat);
  }
  return y;
}

template <typename S>
struct AttentionGrads {
  Mat<S> dx;
  AttentionParams<S> dparams;
};

template <typename S>
AttentionGrads<S> multi_head_self_attention_backward(
    const Mat<S>& x, const AttentionParams<S>& p, int n_heads,
    const AttentionCache<S>& cache, const Mat<S>& dy) {
  const Eigen::Index d = x.cols();
  const Eigen::Index dh = d / n_heads;
  const S inv_scale = S(1) / std::sqrt(static_cast<S>(dh));

  AttentionGrads<S> g;
  const LinearGrads<S> out = linear_backward(cache.concat, p.wo, dy);
  g.dparams.wo = out.dw;
  g.dparams.bo = out.db;

  Mat<S> dq = Mat<S>::Zero(x.rows(), d);
  Mat<S> dk = Mat<S>::Zero(x.rows(), d);
  Mat<S> dv = Mat<S>::Zero(x.rows(), d);
  for (int h = 0; h < n_heads; ++h) {
    const auto qh = cache.q.middleCols(h * dh, dh);
    const auto kh = cache.k.middleCols(h * dh, dh);
    const auto vh = cache.v.middleCols(h * dh, dh);
    const auto dch = out.dx.middleCols(h * dh, dh);
    const Mat<S>& a = cache.weights[h];

    Mat<S> da = dch * vh.transpose();
    dv.middleCols(h * dh, dh).noalias() = a.transpose() * dch;
    Mat<S> ds = softmax_rows_backward(a, da) * inv_scale;
    dq.middleCols(h * dh, dh).noalias() = ds * kh;
    dk.middleCols(h * dh, dh).noalias() = ds.transpose() * qh;
  }

  const LinearGrads<S> gq = linear_backward(x, p.wq, dq);
  const LinearGrads<S> gk = linear_backward(x, p.wk, dk);
  const LinearGrads<S> gv = linear_backward(x, p.wv, dv);
  g.dparams.wq = gq.dw;
  g.dparams.bq = gq.db;
  g.dparams.wk = gk.dw;
  g.dparams.bk = gk.db;
  g.dparams.wv = gv.dw;
  g.dparams.bv = gv.db;
  g.dx = gq.dx + gk.dx + gv.dx;
  return g;
}

// ---------------------------------------------------------------------------
// Sinusoidal position encodings

template <typename S>
Mat<S> position_encoding(Eigen::Index t_len, Eigen::Index dim) {
  if (dim % 2 != 0) {
    throw std::invalid_argument("position_encoding: dim must be even, got " +
                                std::to_string(dim));
  }
  Mat<S> pe(t_len, dim);
  for (Eigen::Index i = 0; i < dim / 2; ++i) {
    const double rate = std::pow(10000.0, 2.0 * static_cast<double>(i) /
                                              static_cast<double>(dim));
    for (Eigen::Index t = 0; t < t_len; ++t) {
      pe(t, 2 * i) = static_cast<S>(std::sin(t / rate));
      pe(t, 2 * i + 1) = static_cast<S>(std::cos(t / rate));
    }
  }
  return pe;
}

// ---------------------------------------------------------------------------
// Losses

template <typename S>
struct SoftmaxXentResult {
  S loss = S(0);
  Mat<S> probs;
};

/// Mean cross-entropy of softmax(logits) against integer labels.
template <typename S>
SoftmaxXentResult<S> softmax_cross_entropy(const Mat<S>& logits,
                                           const Eigen::VectorXi& labels) {
  if (labels.size() != logits.rows()) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  SoftmaxXentResult<S> out;
  out.probs = softmax_rows(logits);
  S total = S(0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || y >= logits.cols()) {
      throw std::invalid_argument("softmax_cross_entropy: label " +
                                  std::to_string(y) + " out of range");
    }
    // recompute the log-sum-exp path for a numerically clean log prob
    const S maxv = logits.row(r).maxCoeff();
    const S lse =
        std::log((logits.row(r).array() - maxv).exp().sum()) + maxv;
    total += lse - logits(r, y);
  }
  out.loss = total / static_cast<S>(logits.rows());
  return out;
}

template <typename S>
Mat<S> softmax_cross_entropy_backward(const Mat<S>& probs,
                                      const Eigen::VectorXi& labels) {
  Mat<S> d = probs;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    d(r, labels[r]) -= S(1);
  }
  return d / static_cast<S>(probs.rows());
}

/// Mean squared error over all entries.
template <typename S>
S mse_loss(const Mat<S>& pred, const Mat<S>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("mse_loss: shape mismatch");
  }
  return (pred - target).squaredNorm() / static_cast<S>(pred.size());
}

template <typename S>
Mat<S> mse_loss_backward(const Mat<S>& pred, const Mat<S>& target) {
  return S(2) * (pred - target) / static_cast<S>(pred.size());
}

}  // namespace fsvc::nn

#endif  // FSVC_NN_OPS_HPP_
