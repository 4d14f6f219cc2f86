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
#include <string>
#include <vector>

#include "fairpriv/learncore/matrix.hpp"

namespace fairpriv {

/// Feature rows with a task label, a sensitive label and a private label.
struct LabeledDataset {
  Matrix x;
  std::vector<std::size_t> y;    // task
  std::vector<std::size_t> y_a;  // sensitive (fairness)
  std::vector<std::size_t> y_p;  // private (attribute privacy)
  std::size_t num_y = 2;
  std::size_t num_a = 2;
  std::size_t num_p = 2;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return x.cols(); }

  void validate() const {
    const std::size_t n = x.rows();
    if (y.size() != n || y_a.size() != n || y_p.size() != n) {
      throw ShapeError("LabeledDataset: label vectors must have " + std::to_string(n) +
                       " entries");
    }
    if (num_y < 2 || num_a < 2 || num_p < 2) {
      throw ValueError("LabeledDataset: every label needs at least 2 classes");
    }
    check_range(y, num_y, "y");
    check_range(y_a, num_a, "y_a");
    check_range(y_p, num_p, "y_p");
  }

  LabeledDataset subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.x = gather_rows(x, rows);
    out.num_y = num_y;
    out.num_a = num_a;
    out.num_p = num_p;
    out.y.reserve(rows.size());
    out.y_a.reserve(rows.size());
    out.y_p.reserve(rows.size());
    for (std::size_t r : rows) {
      out.y.push_back(y.at(r));
      out.y_a.push_back(y_a.at(r));
      out.y_p.push_back(y_p.at(r));
    }
    return out;
  }

  /// Flat index of the (y, y_a, y_p) cell of row `r`.
  std::size_t cell_of(std::size_t r) const {
    return (y[r] * num_a + y_a[r]) * num_p + y_p[r];
  }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

 private:
  static void check_range(const std::vector<std::size_t>& v, std::size_t k, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] >= k) {
        throw ValueError(std::string("LabeledDataset: ") + name + "[" + std::to_string(i) +
                         "] = " + std::to_string(v[i]) + " >= class count " +
                         std::to_string(k));
      }
    }
  }
};

}  // namespace fairpriv
