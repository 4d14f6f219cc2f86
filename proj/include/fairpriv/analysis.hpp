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
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fairpriv/error.hpp"
#include "fairpriv/evaluation.hpp"

namespace fairpriv {

/// Outcome of one trained (alpha, beta, seed) configuration.
struct RunRecord {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  MetricTriple metrics;
  double val_loss = 0.0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

enum class MetricKind { kUtility, kFairnessGap, kAttackAccuracy };

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::kUtility: return "utility";
    case MetricKind::kFairnessGap: return "fairness_gap";
    case MetricKind::kAttackAccuracy: return "attack_balanced_acc";
  }
  return "?";
}

inline double metric_of(const RunRecord& r, MetricKind m) {
  switch (m) {
    case MetricKind::kUtility: return r.metrics.utility;
    case MetricKind::kFairnessGap: return r.metrics.fairness_gap;
    case MetricKind::kAttackAccuracy: return r.metrics.attack_balanced_acc;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Regularization grid and strength groups

/// 0 followed by 10 log-spaced values from 0.01 to 10.
inline std::vector<double> grid_values() {
  std::vector<double> g{0.0};
  for (int k = 0; k <= 9; ++k) g.push_back(std::pow(10.0, -2.0 + 3.0 * k / 9.0));
  return g;
}

enum class StrengthGroup { kBaseline = 0, kLow = 1, kMedium = 2, kHigh = 3 };
inline constexpr std::array<StrengthGroup, 4> kAllGroups = {
    StrengthGroup::kBaseline, StrengthGroup::kLow, StrengthGroup::kMedium, StrengthGroup::kHigh};

inline char group_letter(StrengthGroup g) { return "BLMH"[static_cast<int>(g)]; }

/// Baseline 0; Low [0.01, 0.05]; Medium [0.1, 0.5]; High [1, 10]. Values
/// must be grid points; a relative tolerance of 1e-3 admits grid values
/// written to four significant digits, such as 0.2154.
inline StrengthGroup group_label(double v) {
  if (v == 0.0) return StrengthGroup::kBaseline;
  const auto grid = grid_values();
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (std::abs(v - grid[k]) <= 1e-3 * grid[k]) {
      if (k <= 3) return StrengthGroup::kLow;
      if (k <= 6) return StrengthGroup::kMedium;
      return StrengthGroup::kHigh;
    }
  }
  throw ValueError("group_label: " + std::to_string(v) + " is not a grid value");
}

// ---------------------------------------------------------------------------
// Normalization and CSR

/// (M - min) / (max - min) over all records; 0.5 everywhere if max == min.
inline std::vector<double> normalize(std::span<const RunRecord> records, MetricKind metric) {
  if (records.size() < 2) throw ValueError("normalize: need at least 2 records");
  double lo = metric_of(records[0], metric), hi = lo;
  for (const auto& r : records) {
    lo = std::min(lo, metric_of(r, metric));
    hi = std::max(hi, metric_of(r, metric));
  }
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(hi == lo ? 0.5 : (metric_of(r, metric) - lo) / (hi - lo));
  }
  return out;
}

struct CsrWeights {
  double utility = 1.0 / 3.0;
  double fairness = 1.0 / 3.0;
  double privacy = 1.0 / 3.0;

  void validate() const {
    for (double w : {utility, fairness, privacy}) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ValueError("csr: weights must be >= 0");
    }
    if (std::abs(utility + fairness + privacy - 1.0) > 1e-9) {
      throw ValueError("csr: weights must sum to 1");
    }
  }

  /// "CSR(0.6, 0.2, 0.2)"
  std::string label() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "CSR(%g, %g, %g)", utility, fairness, privacy);
    return buf;
  }
};

/// The three preference vectors with one weight at 0.6 and the others at 0.2.
inline std::vector<CsrWeights> default_csr_weights() {
  return {{0.6, 0.2, 0.2}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}};
}

/// Per-record score in [0, 100]:
///   100 * (wU * N(U) + wA * (1 - N(gap)) + wP * (1 - N(attack))).
inline std::vector<double> csr(std::span<const RunRecord> records, const CsrWeights& w) {
  w.validate();
  const auto nu = normalize(records, MetricKind::kUtility);
  const auto na = normalize(records, MetricKind::kFairnessGap);
  const auto np = normalize(records, MetricKind::kAttackAccuracy);
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out[i] = 100.0 * (w.utility * nu[i] + w.fairness * (1.0 - na[i]) + w.privacy * (1.0 - np[i]));
  }
  return out;
}

struct BestCsr {
  double score = 0.0;
  StrengthGroup alpha_group = StrengthGroup::kBaseline;
  StrengthGroup beta_group = StrengthGroup::kBaseline;
  std::size_t index = 0;  // into the records

  /// "91.04% (H., H.)"
  std::string format() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f%% (%c., %c.)", score, group_letter(alpha_group),
                  group_letter(beta_group));
    return buf;
  }
};

/// Highest-scoring record. Ties go to smaller alpha, then beta, then seed.
inline BestCsr best_csr(std::span<const RunRecord> records, const CsrWeights& w) {
  const auto scores = csr(records, w);
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto key = [&](std::size_t k) {
      return std::make_tuple(-scores[k], records[k].alpha, records[k].beta, records[k].seed);
    };
    if (key(i) < key(best)) best = i;
  }
  return {scores[best], group_label(records[best].alpha), group_label(records[best].beta), best};
}

// ---------------------------------------------------------------------------
// Correlations

/// Sample Pearson correlation; nullopt when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ShapeError("pearson: length mismatch");
  if (xs.size() < 2) throw ValueError("pearson: need at least 2 points");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct TradeoffCorrelations {
  std::optional<double> utility_fairness;  // pearson(-U, gap)
  std::optional<double> utility_privacy;   // pearson(-U, attack)
  std::optional<double> fairness_privacy;  // pearson(gap, attack)
};

/// Utility enters negated so every metric improves downward.
inline TradeoffCorrelations tradeoff_correlations(std::span<const RunRecord> records) {
  if (records.size() < 2) throw ValueError("tradeoff_correlations: need at least 2 records");
  std::vector<double> neg_u, gap, att;
  for (const auto& r : records) {
    neg_u.push_back(-r.metrics.utility);
    gap.push_back(r.metrics.fairness_gap);
    att.push_back(r.metrics.attack_balanced_acc);
  }
  return {pearson(neg_u, gap), pearson(neg_u, att), pearson(gap, att)};
}

// ---------------------------------------------------------------------------
// Medians and heatmaps

/// Median; the mean of the two central values for even counts.
inline double median(std::vector<double> v) {
  if (v.empty()) throw ValueError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// 4x4 medians indexed [alpha group][beta group]. Unpopulated cells are
/// empty.
struct HeatmapGrid {
  MetricKind metric = MetricKind::kUtility;
  std::array<std::array<std::optional<double>, 4>, 4> cells{};
  std::array<std::array<std::size_t, 4>, 4> counts{};

  const std::optional<double>& at(StrengthGroup a, StrengthGroup b) const {
    return cells[static_cast<int>(a)][static_cast<int>(b)];
  }
  std::vector<std::string> missing_cells() const {
    std::vector<std::string> out;
    for (auto a : kAllGroups)
      for (auto b : kAllGroups)
        if (!at(a, b)) out.push_back(std::string("(") + group_letter(a) + ", " + group_letter(b) + ")");
    return out;
  }
};

/// Median over all seeds' records in each (group(alpha), group(beta)) cell.
/// Strict mode requires all 16 cells to be populated.
inline HeatmapGrid heatmap(std::span<const RunRecord> records, MetricKind metric,
                           bool require_complete = true) {
  std::array<std::array<std::vector<double>, 4>, 4> bins;
  for (const auto& r : records) {
    bins[static_cast<int>(group_label(r.alpha))][static_cast<int>(group_label(r.beta))].push_back(
        metric_of(r, metric));
  }
  HeatmapGrid g;
  g.metric = metric;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      g.counts[a][b] = bins[a][b].size();
      if (!bins[a][b].empty()) g.cells[a][b] = median(bins[a][b]);
    }
  }
  if (require_complete) {
    const auto missing = g.missing_cells();
    if (!missing.empty()) {
      std::string msg = "heatmap: empty cell(s)";
      for (const auto& m : missing) msg += " " + m;
      throw ValueError(msg);
    }
  }
  return g;
}

/// One record per (alpha, beta) holding the median of each metric over
/// seeds; seed is set to 0. Output ordered by (alpha, beta).
inline std::vector<RunRecord> cell_medians(std::span<const RunRecord> records) {
  std::map<std::pair<double, double>, std::vector<const RunRecord*>> by_cell;
  for (const auto& r : records) by_cell[{r.alpha, r.beta}].push_back(&r);
  std::vector<RunRecord> out;
  for (const auto& [key, rs] : by_cell) {
    auto med = [&](auto get) {
      std::vector<double> v;
      for (const RunRecord* r : rs) v.push_back(get(*r));
      return median(v);
    };
    RunRecord m;
    m.alpha = key.first;
    m.beta = key.second;
    m.metrics.utility = med([](const RunRecord& r) { return r.metrics.utility; });
    m.metrics.fairness_gap = med([](const RunRecord& r) { return r.metrics.fairness_gap; });
    m.metrics.attack_balanced_acc = med([](const RunRecord& r) { return r.metrics.attack_balanced_acc; });
    m.val_loss = med([](const RunRecord& r) { return r.val_loss; });
    out.push_back(m);
  }
  return out;
}

}  // namespace fairpriv
