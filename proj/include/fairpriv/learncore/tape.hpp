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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fairpriv/learncore/loss.hpp"
#include "fairpriv/learncore/matrix.hpp"

namespace fairpriv {

using NodeId = std::size_t;

/// Gradient of a scalar loss with respect to every node of a tape. Nodes the
/// loss does not depend on hold zero matrices of their value's shape.
class Gradients {
 public:
  explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}
  const Matrix& operator[](NodeId id) const { return grads_.at(id); }
  std::size_t size() const noexcept { return grads_.size(); }

 private:
  std::vector<Matrix> grads_;
};

/// Reverse-mode recording of matrix operations.
///
/// Nodes are appended in evaluation order, so the node list is already a
/// topological order and `backward` walks it in reverse. A tape is meant to
/// live for one forward/backward pass.
class Tape {
 public:
  /// Leaf that never receives a gradient (inputs, one-hot labels, frozen
  /// activations).
  NodeId constant(Matrix value) { return push(Op::kLeaf, std::move(value), false); }

  /// Leaf that receives a gradient.
  NodeId parameter(Matrix value) { return push(Op::kLeaf, std::move(value), true); }

  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  double scalar(NodeId id) const {
    const Matrix& v = value(id);
    if (v.rows() != 1 || v.cols() != 1) throw ShapeError("Tape::scalar: node is " + shape_str(v));
    return v(0, 0);
  }
  std::size_t size() const noexcept { return nodes_.size(); }

  NodeId matmul(NodeId a, NodeId b) {
    return push(Op::kMatmul, fairpriv::matmul(value(a), value(b)), a, b);
  }

  NodeId add_row_bias(NodeId x, NodeId bias) {
    return push(Op::kAddRowBias, fairpriv::add_row_bias(value(x), value(bias)), x, bias);
  }

  NodeId relu(NodeId x) { return push(Op::kRelu, fairpriv::relu(value(x)), x); }

  NodeId concat_cols(NodeId a, NodeId b) {
    return push(Op::kConcatCols, fairpriv::concat_cols(value(a), value(b)), a, b);
  }

  /// Scalar sum of all entries.
  NodeId sum(NodeId x) {
    double s = 0.0;
    for (double v : value(x).data()) s += v;
    return push(Op::kSum, Matrix(1, 1, s), x);
  }

  NodeId weighted_cross_entropy(NodeId logits, std::span<const std::size_t> targets,
                                std::span<const double> class_weights) {
    auto res = weighted_softmax_cross_entropy_full(value(logits), targets, class_weights);
    NodeId id = push(Op::kCrossEntropy, Matrix(1, 1, res.loss), logits);
    Node& n = nodes_.back();
    n.probs = std::move(res.probs);
    n.targets.assign(targets.begin(), targets.end());
    n.class_weights.assign(class_weights.begin(), class_weights.end());
    n.total_weight = res.total_weight;
    return id;
  }

  NodeId cross_entropy(NodeId logits, std::span<const std::size_t> targets) {
    const std::vector<double> ones(value(logits).cols(), 1.0);
    return weighted_cross_entropy(logits, targets, ones);
  }

  /// sum_k coeffs[k] * terms[k] over scalar nodes.
  NodeId linear_combination(std::span<const double> coeffs, std::span<const NodeId> terms) {
    if (coeffs.size() != terms.size() || terms.empty()) {
      throw ShapeError("linear_combination: coefficient/term count mismatch");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) s += coeffs[k] * scalar(terms[k]);
    NodeId id = push(Op::kLinComb, Matrix(1, 1, s), kNone, kNone);
    Node& n = nodes_.back();
    n.terms.assign(terms.begin(), terms.end());
    n.coeffs.assign(coeffs.begin(), coeffs.end());
    n.requires_grad = false;
    for (NodeId t : terms) n.requires_grad = n.requires_grad || nodes_[t].requires_grad;
    return id;
  }

  /// Gradient of the scalar node `loss` with respect to every node.
  Gradients backward(NodeId loss) const {
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw ShapeError("backward: loss node must be scalar, got " + shape_str(lv));
    }
    std::vector<Matrix> grads;
    grads.reserve(nodes_.size());
    for (const Node& n : nodes_) grads.emplace_back(n.value.rows(), n.value.cols());
    grads[loss](0, 0) = 1.0;

    for (std::size_t idx = loss + 1; idx-- > 0;) {
      const Node& n = nodes_[idx];
      if (!n.requires_grad || n.op == Op::kLeaf) continue;
      const Matrix& g = grads[idx];
      switch (n.op) {
        case Op::kMatmul: {
          if (nodes_[n.a].requires_grad)
            accumulate(grads[n.a], fairpriv::matmul(g, transpose(value(n.b))));
          if (nodes_[n.b].requires_grad)
            accumulate(grads[n.b], fairpriv::matmul(transpose(value(n.a)), g));
          break;
        }
        case Op::kAddRowBias: {
          if (nodes_[n.a].requires_grad) accumulate(grads[n.a], g);
          if (nodes_[n.b].requires_grad) {
            Matrix& gb = grads[n.b];
            for (std::size_t i = 0; i < g.rows(); ++i)
              for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
          }
          break;
        }
        case Op::kRelu: {
          if (!nodes_[n.a].requires_grad) break;
          const Matrix& x = value(n.a);
          Matrix& gx = grads[n.a];
          for (std::size_t k = 0; k < x.size(); ++k)
            if (x.data()[k] > 0.0) gx.data()[k] += g.data()[k];
          break;
        }
        case Op::kConcatCols: {
          const std::size_t left = value(n.a).cols();
          for (std::size_t i = 0; i < g.rows(); ++i) {
            for (std::size_t j = 0; j < g.cols(); ++j) {
              if (j < left) {
                if (nodes_[n.a].requires_grad) grads[n.a](i, j) += g(i, j);
              } else if (nodes_[n.b].requires_grad) {
                grads[n.b](i, j - left) += g(i, j);
              }
            }
          }
          break;
        }
        case Op::kSum: {
          if (!nodes_[n.a].requires_grad) break;
          for (double& v : grads[n.a].data()) v += g(0, 0);
          break;
        }
        case Op::kCrossEntropy: {
          if (!nodes_[n.a].requires_grad) break;
          Matrix& gl = grads[n.a];
          const double scale = g(0, 0) / n.total_weight;
          for (std::size_t i = 0; i < n.probs.rows(); ++i) {
            const std::size_t y = n.targets[i];
            const double w = n.class_weights[y] * scale;
            for (std::size_t j = 0; j < n.probs.cols(); ++j) {
              const double indicator = j == y ? 1.0 : 0.0;
              gl(i, j) += w * (n.probs(i, j) - indicator);
            }
          }
          break;
        }
        case Op::kLinComb: {
          for (std::size_t k = 0; k < n.terms.size(); ++k)
            if (nodes_[n.terms[k]].requires_grad)
              grads[n.terms[k]](0, 0) += n.coeffs[k] * g(0, 0);
          break;
        }
        case Op::kLeaf:
          break;
      }
    }
    return Gradients(std::move(grads));
  }

 private:
  enum class Op { kLeaf, kMatmul, kAddRowBias, kRelu, kConcatCols, kSum, kCrossEntropy, kLinComb };
  static constexpr NodeId kNone = static_cast<NodeId>(-1);

  struct Node {
    Op op = Op::kLeaf;
    Matrix value;
    NodeId a = kNone;
    NodeId b = kNone;
    bool requires_grad = false;
    // kCrossEntropy
    Matrix probs;
    std::vector<std::size_t> targets;
    std::vector<double> class_weights;
    double total_weight = 0.0;
    // kLinComb
    std::vector<NodeId> terms;
    std::vector<double> coeffs;
  };

  NodeId push(Op op, Matrix value, bool requires_grad) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  NodeId push(Op op, Matrix value, NodeId a, NodeId b = kNone) {
    if (!value.all_finite()) throw NumericError("Tape: non-finite value produced");
    bool rg = false;
    if (a != kNone) rg = rg || nodes_.at(a).requires_grad;
    if (b != kNone) rg = rg || nodes_.at(b).requires_grad;
    NodeId id = push(op, std::move(value), rg);
    nodes_.back().a = a;
    nodes_.back().b = b;
    return id;
  }

  static void accumulate(Matrix& dst, const Matrix& src) {
    for (std::size_t k = 0; k < dst.size(); ++k) dst.data()[k] += src.data()[k];
  }

  std::vector<Node> nodes_;
};

}  // namespace fairpriv
