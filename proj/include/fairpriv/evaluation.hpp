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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fairpriv/data/dataset.hpp"
#include "fairpriv/learncore/loss.hpp"
#include "fairpriv/learncore/matrix.hpp"
#include "fairpriv/training.hpp"

namespace fairpriv {

enum class UtilityMetric { kAccuracy, kTpr };

inline const char* to_string(UtilityMetric m) {
  return m == UtilityMetric::kAccuracy ? "accuracy" : "tpr";
}

/// Utility, fairness gap, attack balanced accuracy, each in [0, 1].
struct MetricTriple {
  double utility = 0.0;
  double fairness_gap = 0.0;
  double attack_balanced_acc = 0.0;

  friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

namespace detail {
inline void check_lengths(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": " + std::to_string(a) + " predictions vs " +
                     std::to_string(b) + " labels");
  }
}
}  // namespace detail

inline double accuracy(std::span<const std::size_t> preds, std::span<const std::size_t> labels) {
  detail::check_lengths(preds.size(), labels.size(), "accuracy");
  if (labels.empty()) throw ValueError("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += preds[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

/// P(pred = positive | label = positive).
inline double tpr(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                  std::size_t positive_class) {
  detail::check_lengths(preds.size(), labels.size(), "tpr");
  std::size_t pos = 0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != positive_class) continue;
    ++pos;
    hit += preds[i] == positive_class;
  }
  if (pos == 0) {
    throw ValueError("tpr: no rows of positive class " + std::to_string(positive_class));
  }
  return static_cast<double>(hit) / static_cast<double>(pos);
}

inline double utility(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                      UtilityMetric metric, std::size_t positive_class) {
  return metric == UtilityMetric::kAccuracy ? accuracy(preds, labels)
                                            : tpr(preds, labels, positive_class);
}

/// Utility metric of each group 0..num_groups-1.
inline std::vector<double> per_group_utility(std::span<const std::size_t> preds,
                                             std::span<const std::size_t> labels,
                                             std::span<const std::size_t> groups,
                                             std::size_t num_groups, UtilityMetric metric,
                                             std::size_t positive_class = 1) {
  detail::check_lengths(preds.size(), labels.size(), "group_gap");
  detail::check_lengths(groups.size(), labels.size(), "group_gap");
  std::vector<std::vector<std::size_t>> p(num_groups), l(num_groups);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] >= num_groups) {
      throw ValueError("group_gap: group " + std::to_string(groups[i]) + " out of range");
    }
    p[groups[i]].push_back(preds[i]);
    l[groups[i]].push_back(labels[i]);
  }
  std::vector<double> out;
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (l[g].empty()) throw ValueError("group_gap: group " + std::to_string(g) + " is empty");
    try {
      out.push_back(utility(p[g], l[g], metric, positive_class));
    } catch (const ValueError& e) {
      throw ValueError("group_gap: group " + std::to_string(g) + ": " + e.what());
    }
  }
  return out;
}

/// Largest absolute pairwise difference of the utility metric across groups.
/// With accuracy this is the accuracy-parity gap; with TPR the
/// equal-opportunity gap.
inline double group_gap(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                        std::span<const std::size_t> groups, std::size_t num_groups,
                        UtilityMetric metric, std::size_t positive_class = 1) {
  const auto m = per_group_utility(preds, labels, groups, num_groups, metric, positive_class);
  // max pairwise |m_i - m_j| is max - min
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  return *hi - *lo;
}

/// Mean per-class recall over classes 0..num_classes-1.
inline double balanced_accuracy(std::span<const std::size_t> preds,
                                std::span<const std::size_t> labels, std::size_t num_classes) {
  detail::check_lengths(preds.size(), labels.size(), "balanced_accuracy");
  std::vector<double> total(num_classes, 0.0), hit(num_classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ValueError("balanced_accuracy: label out of range");
    total[labels[i]] += 1.0;
    hit[labels[i]] += preds[i] == labels[i];
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (total[k] == 0.0) {
      throw ValueError("balanced_accuracy: class " + std::to_string(k) + " has no rows");
    }
    sum += hit[k] / total[k];
  }
  return sum / static_cast<double>(num_classes);
}

/// Multinomial logistic model over [standardized features | onehot(y)].
struct LinearAttacker {
  std::vector<double> mean;   // per feature column
  std::vector<double> scale;  // per feature column, > 0
  std::size_t num_y = 2;
  Matrix weights;  // (feature_dim + num_y) x num_p
  Matrix bias;     // 1 x num_p
  double train_loss = 0.0;  // weighted CE at the end of fitting

  std::size_t num_classes() const { return weights.cols(); }

  Matrix inputs(const Matrix& features, std::span<const std::size_t> y) const {
    if (features.cols() != mean.size()) {
      throw ShapeError("attacker: expected " + std::to_string(mean.size()) + " feature columns, got " +
                       std::to_string(features.cols()));
    }
    Matrix z = features;
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto r = z.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
    }
    return concat_cols(z, one_hot(y, num_y));
  }

  Matrix logits(const Matrix& features, std::span<const std::size_t> y) const {
    return add_row_bias(matmul(inputs(features, y), weights), bias);
  }

  std::vector<std::size_t> predict(const Matrix& features, std::span<const std::size_t> y) const {
    return argmax_rows(logits(features, y));
  }
};

struct AttackerOptions {
  std::size_t iters = 1000;
  double lr = 0.5;
};

/// Full-batch gradient descent on the class-reweighted cross-entropy with
/// weights n / (K_P * n_k), starting from zero weights.
inline LinearAttacker fit_attacker(const Matrix& features, std::span<const std::size_t> y,
                                   std::span<const std::size_t> y_p, std::size_t num_y,
                                   std::size_t num_p, const AttackerOptions& opts = {}) {
  if (features.rows() != y.size() || y.size() != y_p.size()) {
    throw ShapeError("fit_attacker: row count mismatch");
  }
  if (features.rows() == 0) throw ValueError("fit_attacker: no rows");
  const std::vector<double> class_w = inverse_frequency_weights(y_p, num_p);

  LinearAttacker att;
  att.num_y = num_y;
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  att.mean.assign(d, 0.0);
  att.scale.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) att.mean[j] += features(i, j);
  for (double& m : att.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = features(i, j) - att.mean[j];
      att.scale[j] += c * c;
    }
  for (double& s : att.scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }

  att.weights = Matrix(d + num_y, num_p);
  att.bias = Matrix(1, num_p);
  const Matrix in = att.inputs(features, y);
  const Matrix in_t = transpose(in);
  for (std::size_t it = 0; it < opts.iters; ++it) {
    const Matrix z = add_row_bias(matmul(in, att.weights), att.bias);
    auto ce = weighted_softmax_cross_entropy_full(z, y_p, class_w);
    // dL/dz_ij = w_{y_i} (p_ij - [j == y_i]) / W
    Matrix dz = std::move(ce.probs);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = class_w[y_p[i]] / ce.total_weight;
      auto r = dz.row(i);
      r[y_p[i]] -= 1.0;
      for (double& v : r) v *= w;
    }
    const Matrix gw = matmul(in_t, dz);
    for (std::size_t k = 0; k < att.weights.size(); ++k) att.weights.data()[k] -= opts.lr * gw.data()[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < num_p; ++j) att.bias(0, j) -= opts.lr * dz(i, j);
  }
  if (!att.weights.all_finite() || !att.bias.all_finite()) {
    throw NumericError("fit_attacker: weights diverged");
  }
  att.train_loss = weighted_softmax_cross_entropy(add_row_bias(matmul(in, att.weights), att.bias),
                                                  y_p, class_w);
  return att;
}

/// Balanced accuracy of the attacker's predictions of y_p.
inline double attack_accuracy(const LinearAttacker& att, const Matrix& features,
                              std::span<const std::size_t> y, std::span<const std::size_t> y_p) {
  return balanced_accuracy(att.predict(features, y), y_p, att.num_classes());
}

/// Per-group TPR at the per-group threshold: the smallest observed score s
/// whose false positive rate (score >= s among the group's negatives) is at
/// most `fpr_target`. Labels are 1 for positive, 0 for negative.
inline std::vector<double> tpr_at_fpr(std::span<const double> scores,
                                      std::span<const std::size_t> labels,
                                      std::span<const std::size_t> groups, std::size_t num_groups,
                                      double fpr_target) {
  detail::check_lengths(scores.size(), labels.size(), "tpr_at_fpr");
  detail::check_lengths(groups.size(), labels.size(), "tpr_at_fpr");
  std::vector<double> out;
  for (std::size_t g = 0; g < num_groups; ++g) {
    std::vector<std::pair<double, bool>> rows;  // (score, is_positive)
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (groups[i] != g) continue;
      if (labels[i] > 1) throw ValueError("tpr_at_fpr: labels must be binary");
      rows.emplace_back(scores[i], labels[i] == 1);
      (labels[i] == 1 ? pos : neg)++;
    }
    if (neg == 0) throw ValueError("tpr_at_fpr: group " + std::to_string(g) + " has no negatives");
    if (pos == 0) throw ValueError("tpr_at_fpr: group " + std::to_string(g) + " has no positives");
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    // Walk thresholds from high to low; ties are admitted together.
    std::size_t fp = 0, tp = 0, best_tp = 0;
    for (std::size_t i = 0; i < rows.size();) {
      std::size_t j = i;
      std::size_t fp_here = 0, tp_here = 0;
      while (j < rows.size() && rows[j].first == rows[i].first) {
        (rows[j].second ? tp_here : fp_here)++;
        ++j;
      }
      fp += fp_here;
      tp += tp_here;
      if (static_cast<double>(fp) / static_cast<double>(neg) > fpr_target) break;
      best_tp = tp;
      i = j;
    }
    out.push_back(static_cast<double>(best_tp) / static_cast<double>(pos));
  }
  return out;
}

struct EvalOptions {
  UtilityMetric utility = UtilityMetric::kAccuracy;
  std::size_t positive_class = 1;
  AttackerOptions attacker;
};

struct Evaluation {
  MetricTriple metrics;
  LinearAttacker attacker;
};

/// Utility and fairness gap on `test`; the attacker is fit on `val`
/// features only and scored on `test` features only.
inline Evaluation evaluate_with_attacker(const ModelBundle& bundle, const LabeledDataset& val,
                                         const LabeledDataset& test, const EvalOptions& opts = {}) {
  const Matrix test_features = bundle.extractor.forward(test.x);
  const auto preds = argmax_rows(bundle.classifier.forward(test_features));
  Evaluation ev;
  ev.metrics.utility = utility(preds, test.y, opts.utility, opts.positive_class);
  ev.metrics.fairness_gap =
      group_gap(preds, test.y, test.y_a, test.num_a, opts.utility, opts.positive_class);
  const Matrix val_features = bundle.extractor.forward(val.x);
  ev.attacker = fit_attacker(val_features, val.y, val.y_p, val.num_y, val.num_p, opts.attacker);
  ev.metrics.attack_balanced_acc = attack_accuracy(ev.attacker, test_features, test.y, test.y_p);
  return ev;
}

inline MetricTriple evaluate(const ModelBundle& bundle, const LabeledDataset& val,
                             const LabeledDataset& test, const EvalOptions& opts = {}) {
  return evaluate_with_attacker(bundle, val, test, opts).metrics;
}

}  // namespace fairpriv
