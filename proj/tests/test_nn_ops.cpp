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

#include "fsvc/nn/ops.hpp"

#include <random>

#include <doctest.h>

#include "fsvc/nn/adam.hpp"
#include "fsvc/nn/init.hpp"
#include "testing/gradcheck.hpp"

namespace {

using fsvc::nn::Mat;
using fsvc::nn::Vec;
using fsvc::testing::flatten;
using fsvc::testing::numeric_gradient;
using fsvc::testing::relative_error;

Mat<double> rand_mat(Eigen::Index rows, Eigen::Index cols,
                     std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Vec<double> rand_vec(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec<double> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

// Two-tensor parameter struct for exercising the flat-view optimizer.
struct PairParams {
  Mat<double> w;
  Vec<double> b;
  template <typename F>
  void for_each_tensor(F&& f) {
    f(w);
    f(b);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(w);
    f(b);
  }
};

}  // namespace

TEST_CASE("linear forward identities") {
  std::mt19937_64 rng(3);
  const Mat<double> x = rand_mat(4, 5, rng);
  const Vec<double> b = rand_vec(5, rng);
  const Mat<double> y = fsvc::nn::linear(x, Mat<double>::Identity(5, 5).eval(), b);
  for (int r = 0; r < 4; ++r) {
    CHECK((y.row(r) - x.row(r) - b.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(
      fsvc::nn::linear(x, Mat<double>::Identity(4, 4).eval(), b),
      std::invalid_argument);
}

TEST_CASE("linear gradients match finite differences to 1e-6") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Mat<double> x = rand_mat(5, 4, rng);
    Mat<double> w = rand_mat(4, 6, rng);
    Vec<double> b = rand_vec(6, rng);
    const Mat<double> proj = rand_mat(5, 6, rng);

    auto loss = [&] {
      return (fsvc::nn::linear(x, w, b).array() * proj.array()).sum();
    };
    const auto g = fsvc::nn::linear_backward(x, w, proj);

    CHECK(relative_error(flatten(g.dx), numeric_gradient(x, loss)) < 1e-6);
    CHECK(relative_error(flatten(g.dw), numeric_gradient(w, loss)) < 1e-6);
    CHECK(relative_error(g.db, numeric_gradient(b, loss)) < 1e-6);
  }
}

TEST_CASE("layer norm centers and scales each row") {
  std::mt19937_64 rng(17);
  const Mat<double> x = rand_mat(6, 10, rng);
  const Vec<double> ones = Vec<double>::Ones(10);
  const Vec<double> zeros = Vec<double>::Zero(10);
  const Mat<double> y = fsvc::nn::layer_norm(x, ones, zeros);
  for (int r = 0; r < 6; ++r) {
    CHECK(y.row(r).mean() == doctest::Approx(0.0).epsilon(1e-10));
    const double var = (y.row(r).array() - y.row(r).mean()).square().mean();
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }

  SUBCASE("constant row collapses to the bias") {
    Mat<double> flat = Mat<double>::Constant(1, 10, 4.2);
    const Vec<double> bias = rand_vec(10, rng);
    const Mat<double> out = fsvc::nn::layer_norm(flat, ones, bias);
    CHECK((out.row(0).transpose() - bias).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("single column is rejected") {
    Mat<double> thin = Mat<double>::Ones(3, 1);
    CHECK_THROWS_AS(
        fsvc::nn::layer_norm(thin, Vec<double>::Ones(1).eval(),
                             Vec<double>::Zero(1).eval()),
        std::invalid_argument);
  }
}

TEST_CASE("layer norm gradients match finite differences to 1e-4") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Mat<double> x = rand_mat(5, 8, rng);
    Vec<double> gain = rand_vec(8, rng);
    Vec<double> bias = rand_vec(8, rng);
    const Mat<double> proj = rand_mat(5, 8, rng);

    auto loss = [&] {
      return (fsvc::nn::layer_norm(x, gain, bias).array() * proj.array()).sum();
    };
    fsvc::nn::LayerNormCache<double> cache;
    fsvc::nn::layer_norm(x, gain, bias, &cache);
    const auto g = fsvc::nn::layer_norm_backward(cache, gain, proj);

    CHECK(relative_error(flatten(g.dx), numeric_gradient(x, loss)) < 1e-4);
    CHECK(relative_error(g.dgain, numeric_gradient(gain, loss)) < 1e-4);
    CHECK(relative_error(g.dbias, numeric_gradient(bias, loss)) < 1e-4);
  }
}

TEST_CASE("relu and its mask") {
  Mat<double> x(2, 3);
  x << -1.0, 0.0, 2.0, 3.0, -0.5, 0.25;
  const Mat<double> y = fsvc::nn::relu(x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 2) == 2.0);
  const Mat<double> dy = Mat<double>::Ones(2, 3);
  const Mat<double> dx = fsvc::nn::relu_backward(x, dy);
  CHECK(dx(0, 0) == 0.0);
  CHECK(dx(0, 1) == 0.0);  // gradient at exactly zero is dropped
  CHECK(dx(0, 2) == 1.0);
  CHECK(dx(1, 2) == 1.0);
}

TEST_CASE("softmax rows are stochastic and shift invariant") {
  std::mt19937_64 rng(5);
  const Mat<double> x = rand_mat(4, 7, rng);
  const Mat<double> p = fsvc::nn::softmax_rows(x);
  for (int r = 0; r < 4; ++r) {
    CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.row(r).minCoeff() > 0.0);
  }
  const Mat<double> shifted =
      fsvc::nn::softmax_rows((x.array() + 100.0).matrix().eval());
  CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("softmax backward matches finite differences to 1e-4") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Mat<double> x = rand_mat(4, 6, rng);
    const Mat<double> proj = rand_mat(4, 6, rng);
    auto loss = [&] {
      return (fsvc::nn::softmax_rows(x).array() * proj.array()).sum();
    };
    const Mat<double> p = fsvc::nn::softmax_rows(x);
    const Mat<double> dx = fsvc::nn::softmax_rows_backward(p, proj);
    CHECK(relative_error(flatten(dx), numeric_gradient(x, loss)) < 1e-4);
  }
}

TEST_CASE("conv1d with an identity center tap is a biased copy") {
  std::mt19937_64 rng(9);
  const Mat<double> x = rand_mat(6, 4, rng);
  std::vector<Mat<double>> taps{Mat<double>::Zero(4, 4),
                                Mat<double>::Identity(4, 4),
                                Mat<double>::Zero(4, 4)};
  const Vec<double> bias = rand_vec(4, rng);
  const Mat<double> y = fsvc::nn::conv1d(x, taps, bias);
  for (int r = 0; r < 6; ++r) {
    CHECK((y.row(r) - x.row(r) - bias.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("even kernel is rejected") {
    std::vector<Mat<double>> even{Mat<double>::Zero(4, 4),
                                  Mat<double>::Zero(4, 4)};
    CHECK_THROWS_AS(fsvc::nn::conv1d(x, even, bias), std::invalid_argument);
  }
  SUBCASE("a pure shift tap sees zero past the edge") {
    std::vector<Mat<double>> shift{Mat<double>::Identity(4, 4),
                                   Mat<double>::Zero(4, 4),
                                   Mat<double>::Zero(4, 4)};
    const Mat<double> s = fsvc::nn::conv1d(x, shift, Vec<double>::Zero(4).eval());
    CHECK(s.row(0).cwiseAbs().maxCoeff() == 0.0);  // x[-1] is zero padding
    for (int r = 1; r < 6; ++r) {
      CHECK((s.row(r) - x.row(r - 1)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("conv1d gradients match finite differences to 1e-4") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Mat<double> x = rand_mat(7, 3, rng);
    std::vector<Mat<double>> taps{rand_mat(3, 5, rng), rand_mat(3, 5, rng),
                                  rand_mat(3, 5, rng)};
    Vec<double> bias = rand_vec(5, rng);
    const Mat<double> proj = rand_mat(7, 5, rng);

    auto loss = [&] {
      return (fsvc::nn::conv1d(x, taps, bias).array() * proj.array()).sum();
    };
    const auto g = fsvc::nn::conv1d_backward(x, taps, proj);

    CHECK(relative_error(flatten(g.dx), numeric_gradient(x, loss)) < 1e-4);
    for (int k = 0; k < 3; ++k) {
      CHECK(relative_error(flatten(g.dtaps[k]), numeric_gradient(taps[k], loss)) <
            1e-4);
    }
    // bias gradient: columns of proj summed
    CHECK(relative_error(g.dbias, numeric_gradient(bias, loss)) < 1e-4);
  }
}

TEST_CASE("attention degenerate cases") {
  std::mt19937_64 rng(13);
  const int d = 6;
  fsvc::nn::AttentionParams<double> p;
  p.wq = rand_mat(d, d, rng);
  p.wk = rand_mat(d, d, rng);
  p.wv = rand_mat(d, d, rng);
  p.wo = Mat<double>::Identity(d, d);
  p.bq = rand_vec(d, rng);
  p.bk = rand_vec(d, rng);
  p.bv = Vec<double>::Zero(d);
  p.bo = Vec<double>::Zero(d);

  SUBCASE("a single frame attends only to itself") {
    const Mat<double> x = rand_mat(1, d, rng);
    fsvc::nn::AttentionCache<double> cache;
    fsvc::nn::multi_head_self_attention(x, p, 2, &cache);
    for (const auto& w : cache.weights) {
      REQUIRE(w.rows() == 1);
      REQUIRE(w.cols() == 1);
      CHECK(w(0, 0) == doctest::Approx(1.0));
    }
  }
  SUBCASE("zeroed query projection yields uniform weights") {
    p.wq = Mat<double>::Zero(d, d);
    p.bq = Vec<double>::Zero(d);
    const Mat<double> x = rand_mat(5, d, rng);
    fsvc::nn::AttentionCache<double> cache;
    const Mat<double> y = fsvc::nn::multi_head_self_attention(x, p, 2, &cache);
    for (const auto& w : cache.weights) {
      CHECK((w.array() - 0.2).abs().maxCoeff() < 1e-12);
    }
    // uniform weights average the value rows; wo = I passes that through
    const Mat<double> v = fsvc::nn::linear(x, p.wv, p.bv);
    const Eigen::RowVectorXd mean_v = v.colwise().mean();
    for (int r = 0; r < 5; ++r) {
      CHECK((y.row(r) - mean_v).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("head count must divide the model dim") {
    const Mat<double> x = rand_mat(3, d, rng);
    CHECK_THROWS_AS(fsvc::nn::multi_head_self_attention(x, p, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(fsvc::nn::multi_head_self_attention(x, p, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("attention gradients match finite differences to 1e-4") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    const int d = 8;
    Mat<double> x = rand_mat(4, d, rng);
    fsvc::nn::AttentionParams<double> p;
    p.wq = rand_mat(d, d, rng);
    p.wk = rand_mat(d, d, rng);
    p.wv = rand_mat(d, d, rng);
    p.wo = rand_mat(d, d, rng);
    p.bq = rand_vec(d, rng);
    p.bk = rand_vec(d, rng);
    p.bv = rand_vec(d, rng);
    p.bo = rand_vec(d, rng);
    const Mat<double> proj = rand_mat(4, d, rng);

    auto loss = [&] {
      return (fsvc::nn::multi_head_self_attention(x, p, 2).array() *
              proj.array())
          .sum();
    };
    fsvc::nn::AttentionCache<double> cache;
    fsvc::nn::multi_head_self_attention(x, p, 2, &cache);
    const auto g =
        fsvc::nn::multi_head_self_attention_backward(x, p, 2, cache, proj);

    CHECK(relative_error(flatten(g.dx), numeric_gradient(x, loss)) < 1e-4);
    CHECK(relative_error(flatten(g.dparams.wq), numeric_gradient(p.wq, loss)) <
          1e-4);
    CHECK(relative_error(flatten(g.dparams.wk), numeric_gradient(p.wk, loss)) <
          1e-4);
    CHECK(relative_error(flatten(g.dparams.wv), numeric_gradient(p.wv, loss)) <
          1e-4);
    CHECK(relative_error(flatten(g.dparams.wo), numeric_gradient(p.wo, loss)) <
          1e-4);
    CHECK(relative_error(g.dparams.bq, numeric_gradient(p.bq, loss)) < 1e-4);
    CHECK(relative_error(g.dparams.bv, numeric_gradient(p.bv, loss)) < 1e-4);
    CHECK(relative_error(g.dparams.bo, numeric_gradient(p.bo, loss)) < 1e-4);
    // A key bias shifts every score in a row equally, and the row softmax
    // cancels the shift, so its true gradient is zero. Both sides agree.
    CHECK(g.dparams.bk.norm() < 1e-10);
    CHECK(numeric_gradient(p.bk, loss).norm() < 1e-6);
  }
}

TEST_CASE("position encoding values") {
  const Mat<double> pe = fsvc::nn::position_encoding<double>(8, 6);
  CHECK(pe.rows() == 8);
  CHECK(pe.cols() == 6);
  // row 0 alternates sin(0), cos(0)
  for (int i = 0; i < 3; ++i) {
    CHECK(pe(0, 2 * i) == doctest::Approx(0.0));
    CHECK(pe(0, 2 * i + 1) == doctest::Approx(1.0));
  }
  CHECK(pe(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(pe(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(pe(3, 2) ==
        doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 6.0))));
  CHECK(pe(5, 5) ==
        doctest::Approx(std::cos(5.0 / std::pow(10000.0, 4.0 / 6.0))));
  CHECK(pe.maxCoeff() <= 1.0);
  CHECK(pe.minCoeff() >= -1.0);
  CHECK_THROWS_AS(fsvc::nn::position_encoding<double>(4, 5),
                  std::invalid_argument);
}

TEST_CASE("softmax cross entropy") {
  SUBCASE("uniform logits cost ln K") {
    const Mat<double> logits = Mat<double>::Zero(3, 5);
    Eigen::VectorXi labels(3);
    labels << 0, 2, 4;
    const auto out = fsvc::nn::softmax_cross_entropy(logits, labels);
    CHECK(out.loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("labels out of range are rejected") {
    const Mat<double> logits = Mat<double>::Zero(2, 3);
    Eigen::VectorXi labels(2);
    labels << 0, 3;
    CHECK_THROWS_AS(fsvc::nn::softmax_cross_entropy(logits, labels),
                    std::invalid_argument);
  }
  SUBCASE("gradient matches finite differences to 1e-4") {
    for (unsigned seed = 0; seed < 10; ++seed) {
      CAPTURE(seed);
      std::mt19937_64 rng(seed);
      Mat<double> logits = rand_mat(6, 4, rng);
      Eigen::VectorXi labels(6);
      std::uniform_int_distribution<int> lab(0, 3);
      for (int r = 0; r < 6; ++r) labels[r] = lab(rng);

      auto loss = [&] {
        return fsvc::nn::softmax_cross_entropy(logits, labels).loss;
      };
      const auto out = fsvc::nn::softmax_cross_entropy(logits, labels);
      const Mat<double> dx =
          fsvc::nn::softmax_cross_entropy_backward(out.probs, labels);
      CHECK(relative_error(flatten(dx), numeric_gradient(logits, loss)) < 1e-4);
    }
  }
}

TEST_CASE("mse loss and gradient") {
  Mat<double> pred(2, 2), target(2, 2);
  pred << 1.0, 2.0, 3.0, 4.0;
  target << 1.0, 1.0, 3.0, 2.0;
  CHECK(fsvc::nn::mse_loss(pred, target) == doctest::Approx(5.0 / 4.0));
  CHECK_THROWS_AS(fsvc::nn::mse_loss(pred, target.topRows(1).eval()),
                  std::invalid_argument);

  for (unsigned seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    std::mt19937_64 rng(seed);
    Mat<double> p = rand_mat(5, 7, rng);
    const Mat<double> t = rand_mat(5, 7, rng);
    auto loss = [&] { return fsvc::nn::mse_loss(p, t); };
    const Mat<double> dx = fsvc::nn::mse_loss_backward(p, t);
    CHECK(relative_error(flatten(dx), numeric_gradient(p, loss)) < 1e-6);
  }
}

TEST_CASE("glorot init stays inside its bound and varies by seed") {
  Mat<double> w(20, 30);
  std::mt19937_64 rng(1);
  fsvc::nn::glorot_uniform_fill(w, rng);
  const double bound = std::sqrt(6.0 / (20 + 30));
  CHECK(w.maxCoeff() <= bound);
  CHECK(w.minCoeff() >= -bound);
  CHECK(w.cwiseAbs().maxCoeff() > 0.0);

  Mat<double> w2(20, 30);
  std::mt19937_64 rng2(2);
  fsvc::nn::glorot_uniform_fill(w2, rng2);
  CHECK((w - w2).cwiseAbs().maxCoeff() > 0.0);

  Mat<double> w3(20, 30);
  std::mt19937_64 rng3(1);
  fsvc::nn::glorot_uniform_fill(w3, rng3);
  CHECK((w - w3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam first step moves each coordinate by about lr") {
  std::mt19937_64 rng(31);
  PairParams params{rand_mat(3, 4, rng), rand_vec(4, rng)};
  PairParams before = params;
  PairParams grads{rand_mat(3, 4, rng), rand_vec(4, rng)};
  // keep gradients away from zero so eps is negligible
  grads.w = grads.w.unaryExpr([](double g) { return g >= 0 ? g + 0.5 : g - 0.5; });
  grads.b = grads.b.unaryExpr([](double g) { return g >= 0 ? g + 0.5 : g - 0.5; });

  fsvc::nn::AdamState<double> state;
  fsvc::nn::adam_step(params, grads, state);
  CHECK(state.step_count == 1);
  for (Eigen::Index i = 0; i < params.w.size(); ++i) {
    const double step = before.w.data()[i] - params.w.data()[i];
    CHECK(step * grads.w.data()[i] > 0.0);  // moves against the gradient
    CHECK(std::abs(step) == doctest::Approx(state.lr).epsilon(1e-6));
  }
}

TEST_CASE("adam leaves parameters alone under zero gradient") {
  std::mt19937_64 rng(37);
  PairParams params{rand_mat(2, 2, rng), rand_vec(2, rng)};
  const PairParams before = params;
  PairParams grads{Mat<double>::Zero(2, 2), Vec<double>::Zero(2)};
  fsvc::nn::AdamState<double> state;
  fsvc::nn::adam_step(params, grads, state);
  CHECK((params.w - before.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((params.b - before.b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam drives a quadratic toward its minimum") {
  std::mt19937_64 rng(41);
  PairParams params{rand_mat(3, 3, rng), rand_vec(3, rng)};
  fsvc::nn::AdamState<double> state;
  state.lr = 0.01;
  const double start = params.w.squaredNorm() + params.b.squaredNorm();
  for (int it = 0; it < 1500; ++it) {
    PairParams grads{2.0 * params.w, 2.0 * params.b};
    fsvc::nn::adam_step(params, grads, state);
  }
  const double end = params.w.squaredNorm() + params.b.squaredNorm();
  CHECK(end < 0.01 * start);
}

TEST_CASE("adam rejects mismatched tensor lists") {
  std::mt19937_64 rng(43);
  PairParams params{rand_mat(2, 2, rng), rand_vec(2, rng)};
  PairParams grads{rand_mat(2, 2, rng), rand_vec(3, rng)};
  fsvc::nn::AdamState<double> state;
  CHECK_THROWS_AS(fsvc::nn::adam_step(params, grads, state),
                  std::invalid_argument);
}
