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
#include <span>
#include <string>
#include <vector>

#include "fairpriv/learncore/matrix.hpp"

namespace fairpriv {

/// Forward result of a weighted softmax cross-entropy, with the pieces the
/// backward pass needs.
struct CrossEntropyResult {
  double loss = 0.0;
  Matrix probs;          // row-wise softmax of the logits
  double total_weight = 0.0;
};

/// Loss = sum_i w[y_i] * -log softmax(logits_i)[y_i] / sum_i w[y_i].
inline CrossEntropyResult weighted_softmax_cross_entropy_full(
    const Matrix& logits, std::span<const std::size_t> targets,
    std::span<const double> class_weights) {
  if (logits.rows() == 0) throw ValueError("cross_entropy: empty batch");
  if (logits.rows() != targets.size()) {
    throw ShapeError("cross_entropy: " + std::to_string(logits.rows()) +
                     " logit rows vs " + std::to_string(targets.size()) +
                     " targets");
  }
  if (class_weights.size() != logits.cols()) {
    throw ShapeError("cross_entropy: " + std::to_string(class_weights.size()) +
                     " class weights for " + std::to_string(logits.cols()) +
                     " classes");
  }
  for (double w : class_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValueError("cross_entropy: class weights must be finite and >= 0");
    }
  }

  CrossEntropyResult res;
  res.probs = Matrix(logits.rows(), logits.cols());
  double weighted_sum = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const std::size_t y = targets[i];
    if (y >= logits.cols()) {
      throw ValueError("cross_entropy: target " + std::to_string(y) +
                       " out of range at row " + std::to_string(i));
    }
    auto lrow = logits.row(i);
    double mx = lrow[0];
    for (double v : lrow) mx = v > mx ? v : mx;
    double denom = 0.0;
    auto prow = res.probs.row(i);
    for (std::size_t j = 0; j < lrow.size(); ++j) {
      prow[j] = std::exp(lrow[j] - mx);
      denom += prow[j];
    }
    for (double& p : prow) p /= denom;
    const double nll = mx + std::log(denom) - lrow[y];
    weighted_sum += class_weights[y] * nll;
    res.total_weight += class_weights[y];
  }
  if (res.total_weight <= 0.0) {
    throw ValueError("cross_entropy: total weight of batch is zero");
  }
  res.loss = weighted_sum / res.total_weight;
  if (!std::isfinite(res.loss)) throw NumericError("cross_entropy: non-finite loss");
  return res;
}

inline double weighted_softmax_cross_entropy(const Matrix& logits,
                                             std::span<const std::size_t> targets,
                                             std::span<const double> class_weights) {
  return weighted_softmax_cross_entropy_full(logits, targets, class_weights).loss;
}

inline double softmax_cross_entropy(const Matrix& logits,
                                    std::span<const std::size_t> targets) {
  const std::vector<double> ones(logits.cols(), 1.0);
  return weighted_softmax_cross_entropy(logits, targets, ones);
}

/// Inverse-frequency class weights n / (K * n_k). Every class must occur.
inline std::vector<double> inverse_frequency_weights(std::span<const std::size_t> labels,
                                                     std::size_t num_classes) {
  std::vector<double> counts(num_classes, 0.0);
  for (std::size_t y : labels) {
    if (y >= num_classes) throw ValueError("inverse_frequency_weights: label out of range");
    counts[y] += 1.0;
  }
  std::vector<double> w(num_classes);
  const double n = static_cast<double>(labels.size());
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (counts[k] == 0.0) {
      throw ValueError("inverse_frequency_weights: class " + std::to_string(k) +
                       " has no rows");
    }
    w[k] = n / (static_cast<double>(num_classes) * counts[k]);
  }
  return w;
}

}  // namespace fairpriv
