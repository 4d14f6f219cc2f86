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
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fairpriv/data/dataset.hpp"
#include "fairpriv/learncore/adam.hpp"
#include "fairpriv/learncore/mlp.hpp"
#include "fairpriv/learncore/tape.hpp"
#include "fairpriv/rng.hpp"

namespace fairpriv {

/// Which validation quantity picks the returned snapshot.
enum class SelectionLoss {
  kClassifierCE,  // CE(Y, C(F(X)))
  kObjective,     // the full adversarial objective
};

struct TrainConfig {
  double alpha = 0.0;  // weight of the fairness adversary's loss
  double beta = 0.0;   // weight of the privacy adversary's loss
  std::uint64_t seed = 0;
  std::size_t epochs = 40;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double adversary_lr = 5e-3;
  std::size_t feature_dim = 16;
  std::vector<std::size_t> extractor_hidden = {32};
  std::vector<std::size_t> adversary_hidden = {32, 32};
  /// Shrinks the initial output-layer weights of every network so fresh
  /// models start near uniform predictions.
  double output_init_scale = 0.1;
  /// Consecutive batches per phase before switching between the main and
  /// adversary updates.
  std::size_t switch_period = 1;
  SelectionLoss selection = SelectionLoss::kClassifierCE;

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw ValueError("train: alpha must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw ValueError("train: beta must be finite and >= 0");
    if (switch_period == 0) throw ValueError("train: switch_period must be >= 1");
    if (batch_size == 0) throw ValueError("train: batch_size must be >= 1");
    if (feature_dim == 0) throw ValueError("train: feature_dim must be >= 1");
    if (!(lr > 0.0) || !(adversary_lr > 0.0)) throw ValueError("train: learning rates must be > 0");
    if (!(output_init_scale > 0.0) || !std::isfinite(output_init_scale)) {
      throw ValueError("train: output_init_scale must be finite and > 0");
    }
  }
};

/// Feature extractor, task classifier, and the two adversaries. Both
/// adversaries see [features | onehot(y)].
struct ModelBundle {
  Mlp extractor;
  Mlp classifier;
  Mlp fairness_adversary;
  Mlp privacy_adversary;

  std::size_t feature_dim() const { return extractor.output_dim(); }
  std::size_t num_y() const { return classifier.output_dim(); }

  void validate() const {
    if (classifier.input_dim() != feature_dim()) throw ShapeError("bundle: classifier input != feature dim");
    if (fairness_adversary.input_dim() != feature_dim() + num_y() ||
        privacy_adversary.input_dim() != feature_dim() + num_y()) {
      throw ShapeError("bundle: adversary input must be feature_dim + K_Y");
    }
  }

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

inline ModelBundle init_bundle(std::size_t input_dim, std::size_t num_y, std::size_t num_a,
                               std::size_t num_p, const TrainConfig& cfg) {
  auto sizes = [](std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
  };
  const std::size_t adv_in = cfg.feature_dim + num_y;
  ModelBundle b;
  const double g = cfg.output_init_scale;
  b.extractor = mlp_init(sizes(input_dim, cfg.extractor_hidden, cfg.feature_dim),
                         derive_seed(cfg.seed, Stream::kInitF));
  b.classifier = mlp_init({cfg.feature_dim, num_y}, derive_seed(cfg.seed, Stream::kInitC), g);
  b.fairness_adversary =
      mlp_init(sizes(adv_in, cfg.adversary_hidden, num_a), derive_seed(cfg.seed, Stream::kInitA), g);
  b.privacy_adversary =
      mlp_init(sizes(adv_in, cfg.adversary_hidden, num_p), derive_seed(cfg.seed, Stream::kInitP), g);
  return b;
}

struct ObjectiveValue {
  double total = 0.0;
  double ce_c = 0.0;
  double ce_a = 0.0;
  double ce_p = 0.0;
};

namespace detail {

/// Parameter node ids for the networks entered as trainable on a tape.
struct ParamNodes {
  std::vector<NodeId> extractor, classifier, fairness, privacy;
};

struct ObjectiveNodes {
  NodeId total, ce_c, ce_a, ce_p;
};

enum class Trainable { kNone, kMain, kAdversaries };

inline ObjectiveNodes record_objective(Tape& tape, const ModelBundle& b, const LabeledDataset& batch,
                                       double alpha, double beta, Trainable trainable,
                                       ParamNodes* params) {
  const bool main = trainable == Trainable::kMain;
  const bool adv = trainable == Trainable::kAdversaries;
  NodeId x = tape.constant(batch.x);
  NodeId feats = b.extractor.forward(tape, x, main ? &params->extractor : nullptr);
  if (adv) feats = tape.constant(tape.value(feats));
  NodeId logits_c = b.classifier.forward(tape, feats, main ? &params->classifier : nullptr);
  NodeId adv_in = tape.concat_cols(feats, tape.constant(one_hot(batch.y, b.num_y())));
  NodeId logits_a = b.fairness_adversary.forward(tape, adv_in, adv ? &params->fairness : nullptr);
  NodeId logits_p = b.privacy_adversary.forward(tape, adv_in, adv ? &params->privacy : nullptr);
  ObjectiveNodes o;
  o.ce_c = tape.cross_entropy(logits_c, batch.y);
  o.ce_a = tape.cross_entropy(logits_a, batch.y_a);
  o.ce_p = tape.cross_entropy(logits_p, batch.y_p);
  const double coeffs[3] = {1.0, -alpha, -beta};
  const NodeId terms[3] = {o.ce_c, o.ce_a, o.ce_p};
  o.total = tape.linear_combination(coeffs, terms);
  return o;
}

inline std::vector<Matrix> collect(const Gradients& g, const std::vector<NodeId>& ids) {
  std::vector<Matrix> out;
  out.reserve(ids.size());
  for (NodeId id : ids) out.push_back(g[id]);
  return out;
}

}  // namespace detail

/// CE(Y, C(F(X))) - alpha * CE(Y_A, A(F(X), Y)) - beta * CE(Y_P, P(F(X), Y)),
/// all cross-entropies with unit class weights.
inline ObjectiveValue objective(const ModelBundle& bundle, const LabeledDataset& batch, double alpha,
                                double beta) {
  if (batch.size() == 0) throw ValueError("objective: empty batch");
  Tape tape;
  auto o = detail::record_objective(tape, bundle, batch, alpha, beta, detail::Trainable::kNone, nullptr);
  return {tape.scalar(o.total), tape.scalar(o.ce_c), tape.scalar(o.ce_a), tape.scalar(o.ce_p)};
}

/// Optimizer state and schedule position carried across epochs.
struct TrainerState {
  AdamState extractor, classifier, fairness, privacy;
  std::uint64_t batches_seen = 0;  // drives the phase alternation
  std::mt19937_64 shuffle_rng;

  TrainerState() = default;
  TrainerState(ModelBundle& b, const TrainConfig& cfg)
      : extractor(b.extractor.parameters(), cfg.lr),
        classifier(b.classifier.parameters(), cfg.lr),
        fairness(b.fairness_adversary.parameters(), cfg.adversary_lr),
        privacy(b.privacy_adversary.parameters(), cfg.adversary_lr),
        shuffle_rng(make_rng(cfg.seed, Stream::kShuffle)) {}
};

enum class Phase { kMain, kAdversary };

inline Phase phase_of(std::uint64_t batch_index, std::size_t switch_period) {
  return (batch_index / switch_period) % 2 == 0 ? Phase::kMain : Phase::kAdversary;
}

/// Per-epoch training summary.
struct EpochStats {
  double train_objective = 0.0;  // mean total over main-phase batches
  double val_classifier_ce = 0.0;
  double val_objective = 0.0;
};

namespace detail {

enum class Schedule { kAdversarial, kErmOnly };

template <typename BatchFn>
void for_each_batch(std::size_t n, const TrainConfig& cfg, TrainerState& st, BatchFn&& fn) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), st.shuffle_rng);
  for (std::size_t start = 0; start < n; start += cfg.batch_size) {
    const std::size_t end = std::min(n, start + cfg.batch_size);
    std::span<const std::size_t> rows(order.data() + start, end - start);
    fn(rows, phase_of(st.batches_seen, cfg.switch_period));
    ++st.batches_seen;
  }
}

inline double run_epoch(ModelBundle& b, const LabeledDataset& data, const TrainConfig& cfg,
                        TrainerState& st, Schedule schedule) {
  if (data.size() == 0) throw ValueError("train: empty training set");
  double objective_sum = 0.0;
  std::size_t main_batches = 0;
  std::size_t batch_no = 0;
  for_each_batch(data.size(), cfg, st, [&](std::span<const std::size_t> rows, Phase phase) {
    ++batch_no;
    const LabeledDataset batch = data.subset(rows);
    try {
      if (phase == Phase::kMain) {
        Tape tape;
        ParamNodes p;
        NodeId loss;
        if (schedule == Schedule::kAdversarial) {
          auto o = record_objective(tape, b, batch, cfg.alpha, cfg.beta, Trainable::kMain, &p);
          loss = o.total;
        } else {
          NodeId x = tape.constant(batch.x);
          NodeId feats = b.extractor.forward(tape, x, &p.extractor);
          loss = tape.cross_entropy(b.classifier.forward(tape, feats, &p.classifier), batch.y);
        }
        const Gradients g = tape.backward(loss);
        objective_sum += tape.scalar(loss);
        ++main_batches;
        auto gf = collect(g, p.extractor);
        auto gc = collect(g, p.classifier);
        adam_step(b.extractor.parameters(), gf, st.extractor);
        adam_step(b.classifier.parameters(), gc, st.classifier);
      } else if (schedule == Schedule::kAdversarial) {
        Tape tape;
        ParamNodes p;
        auto o = record_objective(tape, b, batch, cfg.alpha, cfg.beta, Trainable::kAdversaries, &p);
        const double ones[2] = {1.0, 1.0};
        const NodeId terms[2] = {o.ce_a, o.ce_p};
        const Gradients g = tape.backward(tape.linear_combination(ones, terms));
        auto ga = collect(g, p.fairness);
        auto gp = collect(g, p.privacy);
        adam_step(b.fairness_adversary.parameters(), ga, st.fairness);
        adam_step(b.privacy_adversary.parameters(), gp, st.privacy);
      }
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " in " +
                         (phase == Phase::kMain ? "main" : "adversary") + " phase, batch " +
                         std::to_string(batch_no));
    }
    for (const Mlp* net : {&b.extractor, &b.classifier, &b.fairness_adversary, &b.privacy_adversary}) {
      for (const Matrix& m : net->parameters()) {
        if (!m.all_finite()) {
          throw NumericError(std::string("non-finite weights after ") +
                             (phase == Phase::kMain ? "main" : "adversary") + " phase, batch " +
                             std::to_string(batch_no));
        }
      }
    }
  });
  return main_batches == 0 ? 0.0 : objective_sum / static_cast<double>(main_batches);
}

}  // namespace detail

/// One pass over `data` in a shuffled order. Main-phase batches update the
/// extractor and classifier on the full objective (adversaries fixed);
/// adversary-phase batches update both adversaries on their own
/// cross-entropies (extractor fixed). Phases switch every
/// `cfg.switch_period` batches, counted across epochs. Returns the mean
/// objective over main-phase batches.
inline double alternating_epoch(ModelBundle& bundle, const LabeledDataset& data,
                                const TrainConfig& cfg, TrainerState& state) {
  return detail::run_epoch(bundle, data, cfg, state, detail::Schedule::kAdversarial);
}

/// Same batch schedule as `alternating_epoch`, but main-phase batches
/// minimize the classifier cross-entropy alone and adversary-phase batches
/// are skipped. Plain ERM reference.
inline double erm_epoch(ModelBundle& bundle, const LabeledDataset& data, const TrainConfig& cfg,
                        TrainerState& state) {
  return detail::run_epoch(bundle, data, cfg, state, detail::Schedule::kErmOnly);
}

struct TrainedModel {
  ModelBundle bundle;  // snapshot at the best validation epoch
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;  // 1-based
  std::vector<EpochStats> history;
};

inline double classifier_ce(const ModelBundle& b, const LabeledDataset& data) {
  return softmax_cross_entropy(b.classifier.forward(b.extractor.forward(data.x)), data.y);
}

namespace detail {

inline TrainedModel train_with(const LabeledDataset& train_set, const LabeledDataset& val,
                               const TrainConfig& cfg, Schedule schedule) {
  cfg.validate();
  if (cfg.epochs == 0) throw ValueError("train: epochs must be >= 1");
  if (train_set.size() == 0 || val.size() == 0) throw ValueError("train: empty split");
  train_set.validate();
  ModelBundle bundle = init_bundle(train_set.dim(), train_set.num_y, train_set.num_a,
                                   train_set.num_p, cfg);
  TrainerState state(bundle, cfg);
  TrainedModel out;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats s;
    try {
      s.train_objective = run_epoch(bundle, train_set, cfg, state, schedule);
      const ObjectiveValue v = objective(bundle, val, cfg.alpha, cfg.beta);
      s.val_classifier_ce = v.ce_c;
      s.val_objective = v.total;
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    out.history.push_back(s);
    const double score =
        cfg.selection == SelectionLoss::kClassifierCE ? s.val_classifier_ce : s.val_objective;
    if (score < out.best_val_loss) {
      out.best_val_loss = score;
      out.best_epoch = epoch;
      out.bundle = bundle;
    }
  }
  return out;
}

}  // namespace detail

/// Trains one (alpha, beta, seed) configuration for `cfg.epochs` alternating
/// epochs and returns the snapshot with the lowest validation loss.
inline TrainedModel train(const LabeledDataset& train_set, const LabeledDataset& val,
                          const TrainConfig& cfg) {
  return detail::train_with(train_set, val, cfg, detail::Schedule::kAdversarial);
}

/// Adversary-free reference run under the identical batch schedule.
inline TrainedModel train_erm(const LabeledDataset& train_set, const LabeledDataset& val,
                              const TrainConfig& cfg) {
  return detail::train_with(train_set, val, cfg, detail::Schedule::kErmOnly);
}

}  // namespace fairpriv
