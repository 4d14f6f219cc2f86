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

// Randomized property checks over sweep tables, shared by the unit tests and
// the acceptance binary. Each check returns an empty string on success and a
// description of the first violation otherwise.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace fairpriv::testing {

/// Records at random grid points with random seeds and metrics.
inline std::vector<RunRecord> random_table(std::mt19937_64& rng, std::size_t min_rows = 2,
                                           std::size_t max_rows = 40) {
  const auto grid = grid_values();
  std::uniform_int_distribution<std::size_t> rows(min_rows, max_rows), pick(0, grid.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RunRecord> out(rows(rng));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {grid[pick(rng)], grid[pick(rng)], i, {u(rng), u(rng), u(rng)}, u(rng)};
  return out;
}

inline CsrWeights random_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a = u(rng), b = u(rng), c = u(rng);
  const double s = a + b + c;
  return {a / s, b / s, 1.0 - a / s - b / s};
}

inline std::string check_csr_properties(std::mt19937_64& rng) {
  auto recs = random_table(rng);
  const CsrWeights w = random_weights(rng);
  const auto scores = csr(recs, w);
  for (double s : scores)
    if (!(s >= 0.0 && s <= 100.0)) return "score out of range: " + std::to_string(s);

  // Improving one metric of one record never lowers its score.
  std::uniform_int_distribution<std::size_t> idx(0, recs.size() - 1);
  std::uniform_real_distribution<double> step(0.0, 0.5);
  const std::size_t i = idx(rng);
  for (int which = 0; which < 3; ++which) {
    auto better = recs;
    auto& m = better[i].metrics;
    if (which == 0) m.utility += step(rng);
    if (which == 1) m.fairness_gap -= step(rng);
    if (which == 2) m.attack_balanced_acc -= step(rng);
    if (csr(better, w)[i] < scores[i] - 1e-9) return "monotonicity violated for metric " + std::to_string(which);
  }

  // A record holding all three extrema scores 100. The extrema are strict so
  // no column collapses to the degenerate range.
  auto best = recs;
  double hi_u = 0.0, lo_g = 1.0, lo_p = 1.0;
  for (const auto& r : recs) {
    hi_u = std::max(hi_u, r.metrics.utility);
    lo_g = std::min(lo_g, r.metrics.fairness_gap);
    lo_p = std::min(lo_p, r.metrics.attack_balanced_acc);
  }
  best[i].metrics = {hi_u + 0.1, lo_g - 0.1, lo_p - 0.1};
  if (std::abs(csr(best, w)[i] - 100.0) > 1e-9) return "all-extrema record does not score 100";

  // Pure utility weighting ranks exactly like raw utility.
  const auto su = csr(recs, {1.0, 0.0, 0.0});
  for (std::size_t a = 0; a < recs.size(); ++a)
    for (std::size_t b = 0; b < recs.size(); ++b) {
      const double ua = recs[a].metrics.utility, ub = recs[b].metrics.utility;
      if ((ua < ub && !(su[a] < su[b])) || (ua == ub && su[a] != su[b]))
        return "utility-only ranking disagrees with utility";
    }
  return {};
}

inline std::string check_normalization_properties(std::mt19937_64& rng) {
  auto recs = random_table(rng);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-50.0, 50.0);
  for (MetricKind m : {MetricKind::kUtility, MetricKind::kFairnessGap, MetricKind::kAttackAccuracy}) {
    const auto n = normalize(recs, m);
    double lo = 1.0, hi = 0.0;
    for (double v : n) {
      if (!(v >= 0.0 && v <= 1.0)) return "normalized value out of [0, 1]";
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo != 0.0 || hi != 1.0) return "normalized extremes are not 0 and 1";

    const double a = scale(rng), b = shift(rng);
    auto moved = recs;
    for (auto& r : moved) {
      r.metrics.utility = a * r.metrics.utility + b;
      r.metrics.fairness_gap = a * r.metrics.fairness_gap + b;
      r.metrics.attack_balanced_acc = a * r.metrics.attack_balanced_acc + b;
    }
    const auto n2 = normalize(moved, m);
    for (std::size_t k = 0; k < n.size(); ++k)
      if (std::abs(n[k] - n2[k]) > 1e-9) return "normalization not affine invariant";

    auto flat = recs;
    const double c = shift(rng);
    for (auto& r : flat) r.metrics = {c, c, c};
    for (double v : normalize(flat, m))
      if (v != 0.5) return "degenerate range does not give 0.5";
  }
  return {};
}

inline std::string check_pearson_oracle(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(2, 60);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = len(rng);
  std::vector<double> x(n), y(n);
  const double mix = u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u(rng);
    y[i] = mix * x[i] + (1.0 - std::abs(mix)) * u(rng);
  }
  const auto r = pearson(x, y);
  if (!r) return "pearson undefined on non-constant input";
  const double want = direct_pearson(x, y);
  if (std::abs(*r - want) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "pearson " << *r << " vs direct " << want;
    return os.str();
  }
  const auto sym = pearson(y, x);
  if (!sym || std::abs(*sym - *r) > 1e-12) return "pearson not symmetric";
  return {};
}

/// Median recomputed per cell from scratch with the group boundaries written
/// out as interval tests.
inline std::string check_heatmap_oracle(std::mt19937_64& rng) {
  const auto grid = grid_values();
  std::uniform_int_distribution<std::size_t> seeds(1, 4);
  const std::size_t s = seeds(rng);
  auto recs = random_records(rng, grid, grid, s);
  std::shuffle(recs.begin(), recs.end(), rng);
  auto bucket = [](double v) {
    if (v == 0.0) return 0;
    if (v >= 0.01 - 1e-12 && v <= 0.05) return 1;
    if (v >= 0.1 - 1e-12 && v <= 0.5) return 2;
    if (v >= 1.0 - 1e-12 && v <= 10.0 + 1e-9) return 3;
    return -1;
  };
  for (MetricKind m : {MetricKind::kUtility, MetricKind::kFairnessGap, MetricKind::kAttackAccuracy}) {
    const HeatmapGrid h = heatmap(recs, m);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        std::vector<double> vals;
        for (const auto& r : recs)
          if (bucket(r.alpha) == a && bucket(r.beta) == b) vals.push_back(metric_of(r, m));
        std::sort(vals.begin(), vals.end());
        const std::size_t k = vals.size();
        const double med = k % 2 ? vals[k / 2] : (vals[k / 2 - 1] + vals[k / 2]) / 2.0;
        const auto& cell = h.cells[a][b];
        if (!cell || *cell != med || h.counts[a][b] != k) {
          return std::string("heatmap cell (") + "BLMH"[a] + ", " + "BLMH"[b] + ") disagrees with oracle";
        }
      }
  }
  return {};
}

/// Closed-form grid and its group sizes.
inline std::string check_grid() {
  const auto g = grid_values();
  if (g.size() != 11 || g[0] != 0.0) return "grid must be 0 followed by 10 values";
  for (int k = 0; k <= 9; ++k)
    if (std::abs(g[k + 1] - std::pow(10.0, -2.0 + 3.0 * k / 9.0)) > 1e-12) return "grid value mismatch";
  int counts[4] = {0, 0, 0, 0};
  for (double v : g) ++counts[static_cast<int>(group_label(v))];
  if (counts[0] != 1 || counts[1] != 3 || counts[2] != 3 || counts[3] != 4) return "group counts are not 1/3/3/4";
  return {};
}

}  // namespace fairpriv::testing
