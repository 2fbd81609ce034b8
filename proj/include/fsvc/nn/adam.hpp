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

// Adam optimizer over flat views of parameter tensors. Any parameter struct
// that exposes `for_each_tensor(f)` (calling f on every Mat/Vec member in a
// fixed order) can be updated against a gradient struct of the same type.

#ifndef FSVC_NN_ADAM_HPP_
#define FSVC_NN_ADAM_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsvc::nn {

template <typename S>
using FlatView = Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>;
template <typename S>
using ConstFlatView = Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>;

template <typename S, typename P>
std::vector<FlatView<S>> flat_views(P& params) {
  std::vector<FlatView<S>> views;
  params.for_each_tensor(
      [&views](auto& t) { views.push_back(FlatView<S>(t.data(), t.size())); });
  return views;
}

template <typename S, typename P>
std::vector<ConstFlatView<S>> const_flat_views(const P& params) {
  std::vector<ConstFlatView<S>> views;
  params.for_each_tensor([&views](const auto& t) {
    views.push_back(ConstFlatView<S>(t.data(), t.size()));
  });
  return views;
}

template <typename S>
struct AdamState {
  S lr = S(1e-3);
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);
  long step_count = 0;
  std::vector<Eigen::Array<S, Eigen::Dynamic, 1>> m;
  std::vector<Eigen::Array<S, Eigen::Dynamic, 1>> v;
};

/// One bias-corrected Adam update of `views` against `grads`, in place.
template <typename S>
void adam_step_views(std::vector<FlatView<S>>& views,
                     const std::vector<ConstFlatView<S>>& grads,
                     AdamState<S>& state) {
  if (views.size() != grads.size()) {
    throw std::invalid_argument("adam_step: tensor count mismatch");
  }
  if (state.m.empty()) {
    for (const auto& view : views) {
      state.m.emplace_back(Eigen::Array<S, Eigen::Dynamic, 1>::Zero(view.size()));
      state.v.emplace_back(Eigen::Array<S, Eigen::Dynamic, 1>::Zero(view.size()));
    }
  }
  if (state.m.size() != views.size()) {
    throw std::invalid_argument("adam_step: moment count mismatch");
  }
  state.step_count += 1;
  const S bc1 = S(1) - std::pow(state.beta1, static_cast<S>(state.step_count));
  const S bc2 = S(1) - std::pow(state.beta2, static_cast<S>(state.step_count));
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].size() != grads[i].size() ||
        views[i].size() != state.m[i].size()) {
      throw std::invalid_argument("adam_step: tensor " + std::to_string(i) +
                                  " size mismatch");
    }
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = state.beta1 * m + (S(1) - state.beta1) * grads[i];
    v = state.beta2 * v + (S(1) - state.beta2) * grads[i].square();
    views[i] -= state.lr * (m / bc1) / ((v / bc2).sqrt() + state.eps);
  }
}

/// Adam update of a whole parameter struct against a matching gradient struct.
template <typename S, typename P>
void adam_step(P& params, const P& grads, AdamState<S>& state) {
  auto views = flat_views<S>(params);
  auto gviews = const_flat_views<S>(grads);
  adam_step_views(views, gviews, state);
}

}  // namespace fsvc::nn

#endif  // FSVC_NN_ADAM_HPP_
