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
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "fairpriv/evaluation.hpp"
#include "fairpriv/pipeline/config.hpp"
#include "fairpriv/pipeline/results.hpp"
#include "fairpriv/training.hpp"

namespace fairpriv {

/// Everything produced by one (alpha, beta, seed) run.
struct RunArtifacts {
  TrainedModel model;
  Evaluation evaluation;
  RunRecord record;
};

/// Splits are fixed by the data config; the run seed only drives
/// initialization and batch order.
inline Splits prepare_splits(const ExperimentConfig& cfg) {
  return make_splits(load_dataset(cfg), cfg.split, cfg.split_seed);
}

/// Train, select by validation loss, then evaluate the selected snapshot.
inline RunArtifacts run_single(const ExperimentConfig& cfg, const Splits& splits, double alpha,
                               double beta, std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.alpha = alpha;
  tc.beta = beta;
  tc.seed = seed;
  RunArtifacts out;
  out.model = train(splits.train, splits.val, tc);
  out.evaluation = evaluate_with_attacker(out.model.bundle, splits.val, splits.test, cfg.eval_options());
  out.record = {alpha, beta, seed, out.evaluation.metrics, out.model.best_val_loss};
  return out;
}

/// (alpha, beta, seed) triples in output order.
inline std::vector<RunRecord> sweep_plan(const ExperimentConfig& cfg) {
  std::vector<double> alphas = cfg.alphas, betas = cfg.betas;
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(alphas.begin(), alphas.end());
  std::sort(betas.begin(), betas.end());
  std::sort(seeds.begin(), seeds.end());
  std::vector<RunRecord> plan;
  for (double a : alphas)
    for (double b : betas)
      for (std::uint64_t s : seeds) plan.push_back({a, b, s, {}, 0.0});
  return plan;
}

using ProgressFn = std::function<void(const RunOutcome&, std::size_t done, std::size_t total)>;

/// Runs the whole grid on up to `jobs` threads. Rows come back in plan order
/// regardless of completion order; failed runs carry their error instead of
/// a record.
inline std::vector<RunOutcome> run_sweep(const ExperimentConfig& cfg, const Splits& splits,
                                         std::size_t jobs, const ProgressFn& progress = {}) {
  const std::vector<RunRecord> plan = sweep_plan(cfg);
  std::vector<RunOutcome> rows(plan.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      RunOutcome o;
      o.record = plan[i];
      try {
        o.record = run_single(cfg, splits, plan[i].alpha, plan[i].beta, plan[i].seed).record;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      rows[i] = o;
      if (progress) {
        std::lock_guard lock(mu);
        progress(o, ++done, plan.size());
      }
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, plan.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return rows;
}

}  // namespace fairpriv
