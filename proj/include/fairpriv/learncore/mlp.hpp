// Copyright 2026 The fairpriv Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fairpriv/learncore/matrix.hpp"
#include "fairpriv/learncore/tape.hpp"

namespace fairpriv {

/// Fully connected network: ReLU between layers, identity on the output.
///
/// Parameters are stored flat as [W0, b0, W1, b1, ...] where W_l is
/// (sizes[l] x sizes[l+1]) and b_l is (1 x sizes[l+1]), so a batch is
/// propagated as relu(X W + b).
class Mlp {
 public:
  Mlp() = default;

  /// Zero-initialized network. Use `mlp_init` for random weights.
  explicit Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ValueError("Mlp: need at least 2 layer sizes");
    for (std::size_t s : sizes_)
      if (s == 0) throw ValueError("Mlp: layer sizes must be positive");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      params_.emplace_back(sizes_[l], sizes_[l + 1]);
      params_.emplace_back(1, sizes_[l + 1]);
    }
  }

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }

  const Matrix& weight(std::size_t layer) const { return params_.at(2 * layer); }
  const Matrix& bias(std::size_t layer) const { return params_.at(2 * layer + 1); }
  Matrix& weight(std::size_t layer) { return params_.at(2 * layer); }
  Matrix& bias(std::size_t layer) { return params_.at(2 * layer + 1); }

  std::span<Matrix> parameters() noexcept { return params_; }
  std::span<const Matrix> parameters() const noexcept { return params_; }

  Matrix forward(const Matrix& x) const {
    if (x.cols() != input_dim()) {
      throw ShapeError("Mlp::forward: input " + shape_str(x) + " for input dim " +
                       std::to_string(input_dim()));
    }
    Matrix h = x;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      h = add_row_bias(matmul(h, weight(l)), bias(l));
      if (l + 1 < num_layers()) h = relu(h);
    }
    return h;
  }

  /// Records the forward pass on `tape`. When `param_ids` is non-null the
  /// weights enter as parameters and their node ids are appended in
  /// `parameters()` order; otherwise they enter as constants.
  NodeId forward(Tape& tape, NodeId input, std::vector<NodeId>* param_ids) const {
    if (tape.value(input).cols() != input_dim()) {
      throw ShapeError("Mlp::forward: input " + shape_str(tape.value(input)) +
                       " for input dim " + std::to_string(input_dim()));
    }
    NodeId h = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      NodeId w = param_ids ? tape.parameter(weight(l)) : tape.constant(weight(l));
      NodeId b = param_ids ? tape.parameter(bias(l)) : tape.constant(bias(l));
      if (param_ids) {
        param_ids->push_back(w);
        param_ids->push_back(b);
      }
      h = tape.add_row_bias(tape.matmul(h, w), b);
      if (l + 1 < num_layers()) h = tape.relu(h);
    }
    return h;
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Matrix> params_;
};

/// He initialization: W ~ N(0, 2 / fan_in), zero biases. The output layer's
/// standard deviation is further multiplied by `output_scale`.
inline Mlp mlp_init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
                    double output_scale = 1.0) {
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) {
    throw ValueError("mlp_init: output_scale must be finite and > 0");
  }
  Mlp net(layer_sizes);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    double stddev = std::sqrt(2.0 / static_cast<double>(layer_sizes[l]));
    if (l + 1 == net.num_layers()) stddev *= output_scale;
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : net.weight(l).data()) v = dist(rng);
  }
  return net;
}

}  // namespace fairpriv
