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
#include <string>
#include <vector>

#include "fairpriv/data/dataset.hpp"
#include "fairpriv/rng.hpp"

namespace fairpriv {

enum class TrainMode { kAsIs, kExacerbated };
enum class TestMode { kAsIs, kTrioBalanced };

struct SplitSpec {
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  TrainMode train_mode = TrainMode::kExacerbated;
  double undersample_factor = 0.25;
  TestMode test_mode = TestMode::kTrioBalanced;

  void validate() const {
    auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_unit(val_fraction) || !in_unit(test_fraction)) {
      throw ValueError("split: val_fraction and test_fraction must lie in (0, 1)");
    }
    if (val_fraction + test_fraction >= 1.0) {
      throw ValueError("split: val_fraction + test_fraction must be < 1");
    }
    if (train_mode == TrainMode::kExacerbated &&
        !(undersample_factor > 0.0 && undersample_factor <= 1.0)) {
      throw ValueError("split: undersample_factor must lie in (0, 1]");
    }
  }
};

/// Row indices into the source dataset plus the materialized subsets.
struct Splits {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> val_rows;
  std::vector<std::size_t> test_rows;
  LabeledDataset train;
  LabeledDataset val;
  LabeledDataset test;
};

namespace detail {

inline std::string cell_name(const LabeledDataset& ds, std::size_t cell) {
  const std::size_t p = cell % ds.num_p;
  const std::size_t a = (cell / ds.num_p) % ds.num_a;
  const std::size_t y = cell / (ds.num_p * ds.num_a);
  return "(y=" + std::to_string(y) + ", y_a=" + std::to_string(a) +
         ", y_p=" + std::to_string(p) + ")";
}

inline std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace detail

/// Carves test, then validation, then training rows.
///
/// Trio-balanced test: the same number of rows from every (y, y_a, y_p)
/// cell, round(test_fraction * n) / cells each. Validation: a uniform draw of
/// round(val_fraction * n) from what is left. Exacerbated train: the rest,
/// downsampled to a uniform y marginal, after which only
/// `undersample_factor` of the rows with (y, y_a) = (K_Y - 1, K_A - 1) are
/// kept. Rows dropped for balance are discarded.
inline Splits make_splits(const LabeledDataset& ds, const SplitSpec& split, std::uint64_t seed) {
  ds.validate();
  split.validate();
  const std::size_t n = ds.size();
  auto rng = make_rng(seed, Stream::kSplits);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  Splits out;
  std::vector<bool> taken(n, false);
  const std::size_t test_total = detail::fraction_count(split.test_fraction, n);

  if (split.test_mode == TestMode::kTrioBalanced) {
    const std::size_t cells = ds.num_y * ds.num_a * ds.num_p;
    const std::size_t per_cell = test_total / cells;
    if (per_cell == 0) {
      throw ValueError("split: test set of " + std::to_string(test_total) +
                       " rows cannot cover " + std::to_string(cells) + " cells");
    }
    std::vector<std::size_t> filled(cells, 0);
    for (std::size_t r : order) {
      const std::size_t c = ds.cell_of(r);
      if (filled[c] < per_cell) {
        ++filled[c];
        taken[r] = true;
        out.test_rows.push_back(r);
      }
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (filled[c] < per_cell) {
        throw ValueError("split: cell " + detail::cell_name(ds, c) + " has " +
                         std::to_string(filled[c]) + " rows, trio-balanced test needs " +
                         std::to_string(per_cell));
      }
    }
  } else {
    for (std::size_t k = 0; k < test_total && k < n; ++k) {
      taken[order[k]] = true;
      out.test_rows.push_back(order[k]);
    }
  }

  const std::size_t val_total = detail::fraction_count(split.val_fraction, n);
  std::vector<std::size_t> pool;
  for (std::size_t r : order) {
    if (taken[r]) continue;
    if (out.val_rows.size() < val_total) {
      out.val_rows.push_back(r);
    } else {
      pool.push_back(r);
    }
  }

  if (split.train_mode == TrainMode::kExacerbated) {
    std::vector<std::size_t> per_y(ds.num_y, 0);
    for (std::size_t r : pool) ++per_y[ds.y[r]];
    const std::size_t target = *std::min_element(per_y.begin(), per_y.end());
    if (target == 0) {
      for (std::size_t k = 0; k < ds.num_y; ++k) {
        if (per_y[k] == 0) {
          throw ValueError("split: training pool has no rows with y=" + std::to_string(k));
        }
      }
    }
    std::vector<std::size_t> balanced;
    std::vector<std::size_t> kept(ds.num_y, 0);
    for (std::size_t r : pool) {
      if (kept[ds.y[r]] < target) {
        ++kept[ds.y[r]];
        balanced.push_back(r);
      }
    }
    const std::size_t top_y = ds.num_y - 1;
    const std::size_t top_a = ds.num_a - 1;
    std::size_t suppressed_total = 0;
    for (std::size_t r : balanced)
      if (ds.y[r] == top_y && ds.y_a[r] == top_a) ++suppressed_total;
    const auto suppressed_keep = static_cast<std::size_t>(
        std::llround(split.undersample_factor * static_cast<double>(suppressed_total)));
    std::size_t suppressed_kept = 0;
    for (std::size_t r : balanced) {
      if (ds.y[r] == top_y && ds.y_a[r] == top_a) {
        if (suppressed_kept >= suppressed_keep) continue;
        ++suppressed_kept;
      }
      out.train_rows.push_back(r);
    }
  } else {
    out.train_rows = std::move(pool);
  }

  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.val_rows.begin(), out.val_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  if (out.train_rows.empty() || out.val_rows.empty() || out.test_rows.empty()) {
    throw ValueError("split: a split came out empty (train " +
                     std::to_string(out.train_rows.size()) + ", val " +
                     std::to_string(out.val_rows.size()) + ", test " +
                     std::to_string(out.test_rows.size()) + ")");
  }
  out.train = ds.subset(out.train_rows);
  out.val = ds.subset(out.val_rows);
  out.test = ds.subset(out.test_rows);
  return out;
}

}  // namespace fairpriv
