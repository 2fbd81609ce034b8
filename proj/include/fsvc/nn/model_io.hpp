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

// Bridges parameter structs (anything with for_each_tensor) to the named
// tensor container. Matrices serialize row-major; vectors are rank 1.

#ifndef FSVC_NN_MODEL_IO_HPP_
#define FSVC_NN_MODEL_IO_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsvc/io/model_file.hpp"
#include "fsvc/nn/ops.hpp"

namespace fsvc::nn {

template <typename Derived>
io::NamedTensor to_named_tensor(const std::string& name,
                                const Eigen::MatrixBase<Derived>& t) {
  io::NamedTensor nt;
  nt.name = name;
  if constexpr (Derived::ColsAtCompileTime == 1) {
    nt.dims = {static_cast<std::uint32_t>(t.rows())};
  } else {
    nt.dims = {static_cast<std::uint32_t>(t.rows()),
               static_cast<std::uint32_t>(t.cols())};
  }
  nt.values.reserve(static_cast<std::size_t>(t.size()));
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      nt.values.push_back(static_cast<float>(t(r, c)));
    }
  }
  return nt;
}

template <typename Derived>
void from_named_tensor(const io::NamedTensor& nt,
                       Eigen::MatrixBase<Derived>& t) {
  const std::size_t expected_rank = Derived::ColsAtCompileTime == 1 ? 1 : 2;
  const auto shape_of = [](const io::NamedTensor& x) {
    std::string s;
    for (std::size_t i = 0; i < x.dims.size(); ++i) {
      if (i > 0) s += "x";
      s += std::to_string(x.dims[i]);
    }
    return s;
  };
  if (nt.dims.size() != expected_rank) {
    throw std::runtime_error("tensor " + nt.name + ": expected rank " +
                             std::to_string(expected_rank) + ", file has " +
                             shape_of(nt));
  }
  const auto rows = static_cast<Eigen::Index>(nt.dims[0]);
  const auto cols =
      expected_rank == 2 ? static_cast<Eigen::Index>(nt.dims[1]) : 1;
  if (rows != t.rows() || cols != t.cols()) {
    throw std::runtime_error(
        "tensor " + nt.name + ": expected " + std::to_string(t.rows()) + "x" +
        std::to_string(t.cols()) + ", file has " + shape_of(nt));
  }
  using S = typename Derived::Scalar;
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      t(r, c) = static_cast<S>(nt.values[i++]);
    }
  }
}

/// Appends every tensor of `params` to `mf` under the matching name.
template <typename P>
void append_tensors(io::ModelFile& mf, const std::vector<std::string>& names,
                    const P& params) {
  std::size_t i = 0;
  params.for_each_tensor([&](const auto& t) {
    if (i >= names.size()) {
      throw std::logic_error("append_tensors: more tensors than names");
    }
    mf.tensors.push_back(to_named_tensor(names[i++], t));
  });
  if (i != names.size()) {
    throw std::logic_error("append_tensors: more names than tensors");
  }
}

/// Fills pre-shaped `params` from `mf`; shape mismatches throw.
template <typename P>
void load_tensors(const io::ModelFile& mf, const std::vector<std::string>& names,
                  P& params) {
  std::size_t i = 0;
  params.for_each_tensor([&](auto& t) {
    if (i >= names.size()) {
      throw std::logic_error("load_tensors: more tensors than names");
    }
    from_named_tensor(mf.tensor(names[i++]), t);
  });
}

}  // namespace fsvc::nn

#endif  // FSVC_NN_MODEL_IO_HPP_
