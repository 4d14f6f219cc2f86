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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpriv/analysis.hpp"
#include "fairpriv/data/csv.hpp"
#include "fairpriv/data/splits.hpp"
#include "fairpriv/data/synthetic.hpp"
#include "fairpriv/evaluation.hpp"
#include "fairpriv/training.hpp"

namespace fairpriv {

/// Which records feed normalization, CSR and correlations.
enum class Aggregation {
  kPerSeed,     // every (alpha, beta, seed) run is one model
  kCellMedian,  // one median record per (alpha, beta)
};

struct ExperimentConfig {
  // Exactly one source: synthetic generation or a feature CSV.
  SyntheticSpec synthetic;
  std::optional<std::filesystem::path> csv_path;

  SplitSpec split;
  std::uint64_t split_seed = 0;
  TrainConfig train;  // alpha, beta, seed are filled per run
  AttackerOptions attacker;
  std::vector<double> alphas = grid_values();
  std::vector<double> betas = grid_values();
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<CsrWeights> csr_weights = default_csr_weights();
  UtilityMetric utility_metric = UtilityMetric::kAccuracy;
  std::size_t positive_class = 1;
  Aggregation aggregation = Aggregation::kPerSeed;
  std::filesystem::path output_dir = "out";

  EvalOptions eval_options() const { return {utility_metric, positive_class, attacker}; }

  void validate() const {
    if (!csv_path) synthetic.validate();
    split.validate();
    train.validate();
    if (seeds.empty()) throw ValueError("seeds: at least one seed is required");
    if (alphas.empty() || betas.empty()) throw ValueError("grid: alpha and beta lists must be non-empty");
    for (double a : alphas) group_label(a);
    for (double b : betas) group_label(b);
    for (const auto& w : csr_weights) w.validate();
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ValueError(where + ": expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValueError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
void read_field(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValueError(where + "." + key + ": wrong type");
  }
}

inline std::string enum_field(const json& obj, const char* key, const std::string& where,
                              std::initializer_list<const char*> choices, std::string fallback) {
  std::string v = fallback;
  read_field(obj, key, where, v);
  for (const char* c : choices)
    if (v == c) return v;
  std::string msg = where + "." + key + ": '" + v + "' is not one of";
  for (const char* c : choices) msg += std::string(" ") + c;
  throw ValueError(msg);
}

inline void parse_synthetic(const json& j, SyntheticSpec& s) {
  const std::string w = "data.synthetic";
  reject_unknown(j, w, {"n", "dim_y", "dim_a", "dim_p", "dim_noise", "sep_y", "sep_a", "sep_p",
                        "classes", "joint", "seed"});
  read_field(j, "n", w, s.n);
  read_field(j, "dim_y", w, s.dim_y);
  read_field(j, "dim_a", w, s.dim_a);
  read_field(j, "dim_p", w, s.dim_p);
  read_field(j, "dim_noise", w, s.dim_noise);
  read_field(j, "sep_y", w, s.sep_y);
  read_field(j, "sep_a", w, s.sep_a);
  read_field(j, "sep_p", w, s.sep_p);
  read_field(j, "seed", w, s.seed);
  std::vector<std::size_t> classes{s.joint.num_y, s.joint.num_a, s.joint.num_p};
  read_field(j, "classes", w, classes);
  if (classes.size() != 3) throw ValueError(w + ".classes: expected [K_Y, K_A, K_P]");
  s.joint.num_y = classes[0];
  s.joint.num_a = classes[1];
  s.joint.num_p = classes[2];
  if (j.contains("joint")) {
    read_field(j, "joint", w, s.joint.probs);
  } else {
    s.joint.probs = JointTable::uniform(classes[0], classes[1], classes[2]).probs;
  }
  try {
    s.validate();
  } catch (const ValueError& e) {
    std::string msg = e.what();
    if (msg.rfind("synthetic: ", 0) == 0) msg = msg.substr(11);
    throw ValueError(w + "." + msg);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {}) {
  using detail::read_field;
  ExperimentConfig c;
  detail::reject_unknown(j, "config", {"data", "split", "train", "attacker", "grid", "seeds",
                                       "csr_weights", "utility_metric", "positive_class",
                                       "aggregation", "output_dir"});
  if (j.contains("data")) {
    const auto& d = j.at("data");
    detail::reject_unknown(d, "data", {"synthetic", "csv"});
    if (d.contains("synthetic") && d.contains("csv")) {
      throw ValueError("data: give either 'synthetic' or 'csv', not both");
    }
    if (d.contains("csv")) {
      std::string p;
      read_field(d, "csv", "data", p);
      std::filesystem::path path(p);
      c.csv_path = path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    } else if (d.contains("synthetic")) {
      detail::parse_synthetic(d.at("synthetic"), c.synthetic);
    }
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    const std::string w = "split";
    detail::reject_unknown(s, w, {"val_fraction", "test_fraction", "train_mode", "undersample_factor",
                                  "test_mode", "seed"});
    read_field(s, "val_fraction", w, c.split.val_fraction);
    read_field(s, "test_fraction", w, c.split.test_fraction);
    read_field(s, "undersample_factor", w, c.split.undersample_factor);
    read_field(s, "seed", w, c.split_seed);
    c.split.train_mode = detail::enum_field(s, "train_mode", w, {"as-is", "exacerbated"}, "exacerbated") ==
                                 "as-is"
                             ? TrainMode::kAsIs
                             : TrainMode::kExacerbated;
    c.split.test_mode = detail::enum_field(s, "test_mode", w, {"as-is", "trio-balanced"}, "trio-balanced") ==
                                "as-is"
                            ? TestMode::kAsIs
                            : TestMode::kTrioBalanced;
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    const std::string w = "train";
    detail::reject_unknown(t, w, {"epochs", "batch_size", "lr", "adversary_lr", "feature_dim",
                                  "extractor_hidden", "adversary_hidden", "output_init_scale", "switch_period",
                                  "selection"});
    read_field(t, "epochs", w, c.train.epochs);
    read_field(t, "batch_size", w, c.train.batch_size);
    read_field(t, "lr", w, c.train.lr);
    read_field(t, "adversary_lr", w, c.train.adversary_lr);
    read_field(t, "feature_dim", w, c.train.feature_dim);
    read_field(t, "extractor_hidden", w, c.train.extractor_hidden);
    read_field(t, "adversary_hidden", w, c.train.adversary_hidden);
    read_field(t, "output_init_scale", w, c.train.output_init_scale);
    read_field(t, "switch_period", w, c.train.switch_period);
    c.train.selection =
        detail::enum_field(t, "selection", w, {"classifier_ce", "objective"}, "classifier_ce") == "objective"
            ? SelectionLoss::kObjective
            : SelectionLoss::kClassifierCE;
  }
  if (j.contains("attacker")) {
    const auto& a = j.at("attacker");
    detail::reject_unknown(a, "attacker", {"iters", "lr"});
    read_field(a, "iters", "attacker", c.attacker.iters);
    read_field(a, "lr", "attacker", c.attacker.lr);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.is_string()) {
      if (g.get<std::string>() != "default") throw ValueError("grid: string form must be \"default\"");
    } else {
      detail::reject_unknown(g, "grid", {"alpha", "beta"});
      read_field(g, "alpha", "grid", c.alphas);
      read_field(g, "beta", "grid", c.betas);
    }
  }
  read_field(j, "seeds", "config", c.seeds);
  if (j.contains("csr_weights")) {
    std::vector<std::vector<double>> ws;
    read_field(j, "csr_weights", "config", ws);
    c.csr_weights.clear();
    for (const auto& w : ws) {
      if (w.size() != 3) throw ValueError("csr_weights: each entry must be [w_U, w_A, w_P]");
      c.csr_weights.push_back({w[0], w[1], w[2]});
    }
  }
  c.utility_metric = detail::enum_field(j, "utility_metric", "config", {"accuracy", "tpr"}, "accuracy") == "tpr"
                         ? UtilityMetric::kTpr
                         : UtilityMetric::kAccuracy;
  read_field(j, "positive_class", "config", c.positive_class);
  c.aggregation = detail::enum_field(j, "aggregation", "config", {"per-seed", "median"}, "per-seed") == "median"
                      ? Aggregation::kCellMedian
                      : Aggregation::kPerSeed;
  std::string out = c.output_dir.string();
  read_field(j, "output_dir", "config", out);
  c.output_dir = out;
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return parse_config(j, path.parent_path());
}

/// Synthetic generation or CSV ingestion, per the config.
inline LabeledDataset load_dataset(const ExperimentConfig& c) {
  LabeledDataset ds = c.csv_path ? load_csv(*c.csv_path) : generate(c.synthetic);
  ds.validate();
  return ds;
}

}  // namespace fairpriv
