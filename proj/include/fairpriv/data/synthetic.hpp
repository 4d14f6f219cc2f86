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
#include <string>
#include <vector>

#include "fairpriv/data/dataset.hpp"
#include "fairpriv/rng.hpp"

namespace fairpriv {

/// Probability table over (y, y_a, y_p), stored flat with y_p fastest.
struct JointTable {
  std::size_t num_y = 2;
  std::size_t num_a = 2;
  std::size_t num_p = 2;
  std::vector<double> probs;

  static JointTable uniform(std::size_t ky, std::size_t ka, std::size_t kp) {
    const std::size_t cells = ky * ka * kp;
    return {ky, ka, kp, std::vector<double>(cells, 1.0 / static_cast<double>(cells))};
  }

  double& at(std::size_t y, std::size_t a, std::size_t p) {
    return probs.at((y * num_a + a) * num_p + p);
  }
  double at(std::size_t y, std::size_t a, std::size_t p) const {
    return probs.at((y * num_a + a) * num_p + p);
  }

  void validate() const {
    if (num_y < 2 || num_a < 2 || num_p < 2) {
      throw ValueError("joint: class counts must be >= 2");
    }
    if (probs.size() != num_y * num_a * num_p) {
      throw ValueError("joint: expected " + std::to_string(num_y * num_a * num_p) +
                       " cells, got " + std::to_string(probs.size()));
    }
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw ValueError("joint: entries must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValueError("joint: entries sum to " + std::to_string(total) + ", not 1");
    }
  }
};

struct SyntheticSpec {
  std::size_t n = 8000;
  std::size_t dim_y = 4;
  std::size_t dim_a = 4;
  std::size_t dim_p = 4;
  std::size_t dim_noise = 8;
  double sep_y = 3.0;
  double sep_a = 2.0;
  double sep_p = 2.0;
  JointTable joint = JointTable::uniform(2, 2, 2);
  std::uint64_t seed = 0;

  std::size_t dim() const noexcept { return dim_y + dim_a + dim_p + dim_noise; }

  void validate() const {
    joint.validate();
    if (n == 0) throw ValueError("synthetic: n must be positive");
    if (dim() == 0) throw ValueError("synthetic: total feature dimension must be >= 1");
    auto check_block = [](std::size_t dim, double sep, std::size_t k, const char* name) {
      if (!(sep >= 0.0) || !std::isfinite(sep)) {
        throw ValueError(std::string("synthetic: separation for ") + name + " must be >= 0");
      }
      if (dim > 0 && dim < k && sep > 0.0) {
        throw ValueError(std::string("synthetic: block ") + name + " has dim " +
                         std::to_string(dim) + " < class count " + std::to_string(k));
      }
    };
    check_block(dim_y, sep_y, joint.num_y, "y");
    check_block(dim_a, sep_a, joint.num_a, "y_a");
    check_block(dim_p, sep_p, joint.num_p, "y_p");
  }
};

struct LabelDraws {
  std::vector<std::size_t> y;
  std::vector<std::size_t> y_a;
  std::vector<std::size_t> y_p;
};

/// n i.i.d. draws of (y, y_a, y_p) from the joint table.
inline LabelDraws sample_labels(const JointTable& joint, std::size_t n, std::uint64_t seed) {
  joint.validate();
  auto rng = make_rng(seed, Stream::kLabels);
  std::discrete_distribution<std::size_t> cell(joint.probs.begin(), joint.probs.end());
  LabelDraws out;
  out.y.resize(n);
  out.y_a.resize(n);
  out.y_p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = cell(rng);
    out.y_p[i] = c % joint.num_p;
    out.y_a[i] = (c / joint.num_p) % joint.num_a;
    out.y[i] = c / (joint.num_p * joint.num_a);
  }
  return out;
}

/// Features are four concatenated blocks [y | y_a | y_p | noise]. Each label
/// block is N(sep * onehot(label), I); the noise block is N(0, I).
inline LabeledDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  LabelDraws labels = sample_labels(spec.joint, spec.n, spec.seed);

  LabeledDataset ds;
  ds.num_y = spec.joint.num_y;
  ds.num_a = spec.joint.num_a;
  ds.num_p = spec.joint.num_p;
  ds.x = Matrix(spec.n, spec.dim());

  auto rng = make_rng(spec.seed, Stream::kFeatures);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < spec.n; ++i) {
    auto row = ds.x.row(i);
    std::size_t col = 0;
    auto block = [&](std::size_t dim, double sep, std::size_t label) {
      for (std::size_t j = 0; j < dim; ++j, ++col) {
        row[col] = unit(rng) + (j == label ? sep : 0.0);
      }
    };
    block(spec.dim_y, spec.sep_y, labels.y[i]);
    block(spec.dim_a, spec.sep_a, labels.y_a[i]);
    block(spec.dim_p, spec.sep_p, labels.y_p[i]);
    block(spec.dim_noise, 0.0, 0);
  }
  ds.y = std::move(labels.y);
  ds.y_a = std::move(labels.y_a);
  ds.y_p = std::move(labels.y_p);
  return ds;
}

}  // namespace fairpriv
