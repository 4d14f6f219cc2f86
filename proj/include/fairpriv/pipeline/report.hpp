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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpriv/analysis.hpp"
#include "fairpriv/pipeline/config.hpp"
#include "fairpriv/pipeline/results.hpp"
#include "fairpriv/pipeline/sweep.hpp"

namespace fairpriv {

/// Checks that `rows` covers the configured grid exactly once per
/// (alpha, beta, seed) with no failed runs, and returns the records in plan
/// order.
inline std::vector<RunRecord> complete_records(const ExperimentConfig& cfg,
                                               const std::vector<RunOutcome>& rows) {
  using Key = std::tuple<double, double, std::uint64_t>;
  std::map<Key, const RunOutcome*> seen;
  std::vector<std::string> problems;
  auto key_str = [](double a, double b, std::uint64_t s) {
    return "(alpha=" + csv::format_double(a) + ", beta=" + csv::format_double(b) +
           ", seed=" + std::to_string(s) + ")";
  };
  for (const auto& o : rows) {
    const Key k{o.record.alpha, o.record.beta, o.record.seed};
    if (!seen.emplace(k, &o).second) problems.push_back("duplicate " + key_str(o.record.alpha, o.record.beta, o.record.seed));
  }
  std::vector<RunRecord> out;
  const auto plan = sweep_plan(cfg);
  for (const auto& p : plan) {
    // Tolerate grid values that went through a decimal round trip.
    const RunOutcome* hit = nullptr;
    for (const auto& [k, o] : seen) {
      const auto& [a, b, s] = k;
      if (s == p.seed && std::abs(a - p.alpha) <= 1e-9 * std::max(1.0, p.alpha) &&
          std::abs(b - p.beta) <= 1e-9 * std::max(1.0, p.beta)) {
        hit = o;
        break;
      }
    }
    if (!hit) {
      problems.push_back("missing " + key_str(p.alpha, p.beta, p.seed));
    } else if (!hit->ok()) {
      problems.push_back("failed " + key_str(p.alpha, p.beta, p.seed));
    } else {
      out.push_back(hit->record);
    }
  }
  if (rows.size() != plan.size() && problems.empty()) {
    problems.push_back(std::to_string(rows.size()) + " rows for a grid of " + std::to_string(plan.size()));
  }
  if (!problems.empty()) {
    std::string msg = "incomplete results:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValueError(msg);
  }
  return out;
}

inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * fraction);
  return buf;
}

inline std::string format_corr(const std::optional<double>& r) {
  if (!r) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *r);
  return buf;
}

/// Single-metric summary: the (0, 0) baseline (median over seeds) and the
/// best value of each metric over the sweep.
struct SingleMetricSummary {
  double baseline_utility = 0.0;
  double baseline_fairness = 0.0;
  double baseline_privacy = 0.0;
  double best_utility = 0.0;   // max
  double best_fairness = 0.0;  // min gap
  double best_privacy = 0.0;   // min attack accuracy
  double chance = 0.5;         // 1 / K_P
  UtilityMetric metric = UtilityMetric::kAccuracy;

  std::string utility_tag() const { return metric == UtilityMetric::kAccuracy ? "Acc." : "TPR"; }
  std::string baseline_utility_cell() const { return percent(baseline_utility) + " (" + utility_tag() + ")"; }
  std::string baseline_fairness_cell() const {
    return percent(baseline_fairness) + " (" + utility_tag() + " Gap)";
  }
  std::string baseline_privacy_cell() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.0f%%", 100.0 * chance);
    return percent(baseline_privacy) + " (" + buf + ")";
  }
};

inline SingleMetricSummary summarize_single(std::span<const RunRecord> all_records,
                                            std::span<const RunRecord> ranked, std::size_t num_p,
                                            UtilityMetric metric) {
  std::vector<double> bu, bf, bp;
  for (const auto& r : all_records) {
    if (r.alpha == 0.0 && r.beta == 0.0) {
      bu.push_back(r.metrics.utility);
      bf.push_back(r.metrics.fairness_gap);
      bp.push_back(r.metrics.attack_balanced_acc);
    }
  }
  if (bu.empty()) throw ValueError("report: the grid has no (alpha, beta) = (0, 0) baseline");
  SingleMetricSummary s;
  s.metric = metric;
  s.chance = 1.0 / static_cast<double>(num_p);
  s.baseline_utility = median(bu);
  s.baseline_fairness = median(bf);
  s.baseline_privacy = median(bp);
  s.best_utility = ranked[0].metrics.utility;
  s.best_fairness = ranked[0].metrics.fairness_gap;
  s.best_privacy = ranked[0].metrics.attack_balanced_acc;
  for (const auto& r : ranked) {
    s.best_utility = std::max(s.best_utility, r.metrics.utility);
    s.best_fairness = std::min(s.best_fairness, r.metrics.fairness_gap);
    s.best_privacy = std::min(s.best_privacy, r.metrics.attack_balanced_acc);
  }
  return s;
}

/// 4x4 heatmap: rows are alpha groups, columns beta groups, B at the top
/// left. Fill is a linear ramp over the populated cells' range; empty cells
/// are grey and labelled "n/a".
inline std::string heatmap_svg(const HeatmapGrid& g, const std::string& title) {
  constexpr int kCell = 90, kLeft = 80, kTop = 60;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& row : g.cells)
    for (const auto& c : row)
      if (c) {
        lo = any ? std::min(lo, *c) : *c;
        hi = any ? std::max(hi, *c) : *c;
        any = true;
      }
  auto color = [&](double v) {
    const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
    // light yellow (255,255,204) to dark blue (37,52,148)
    const int r = static_cast<int>(255 + t * (37 - 255) + 0.5);
    const int gg = static_cast<int>(255 + t * (52 - 255) + 0.5);
    const int b = static_cast<int>(204 + t * (148 - 204) + 0.5);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, gg, b);
    return std::string(buf);
  };
  const int width = kLeft + 4 * kCell + 20;
  const int height = kTop + 4 * kCell + 60;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
     << "</text>\n";
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int x = kLeft + b * kCell, y = kTop + a * kCell;
      const auto& c = g.cells[a][b];
      os << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\""
         << kCell << "\" fill=\"" << (c ? color(*c) : std::string("#dddddd"))
         << "\" stroke=\"#ffffff\"/>\n";
      const bool dark = c && hi > lo && (*c - lo) / (hi - lo) > 0.55;
      os << "<text class=\"value\" x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 5
         << "\" text-anchor=\"middle\" font-size=\"14\" fill=\"" << (dark ? "#ffffff" : "#000000") << "\">";
      if (c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *c);
        os << buf;
      } else {
        os << "n/a";
      }
      os << "</text>\n";
    }
  }
  for (int k = 0; k < 4; ++k) {
    const char letter = group_letter(static_cast<StrengthGroup>(k));
    os << "<text class=\"axis\" x=\"" << kLeft - 12 << "\" y=\"" << kTop + k * kCell + kCell / 2 + 5
       << "\" text-anchor=\"end\" font-size=\"14\">" << letter << "</text>\n";
    os << "<text class=\"axis\" x=\"" << kLeft + k * kCell + kCell / 2 << "\" y=\"" << kTop + 4 * kCell + 22
       << "\" text-anchor=\"middle\" font-size=\"14\">" << letter << "</text>\n";
  }
  os << "<text x=\"" << 20 << "\" y=\"" << kTop + 2 * kCell << "\" font-size=\"14\" transform=\"rotate(-90 20 "
     << kTop + 2 * kCell << ")\" text-anchor=\"middle\">alpha</text>\n";
  os << "<text x=\"" << kLeft + 2 * kCell << "\" y=\"" << kTop + 4 * kCell + 48
     << "\" font-size=\"14\" text-anchor=\"middle\">beta</text>\n";
  os << "</svg>\n";
  return os.str();
}

struct Report {
  nlohmann::ordered_json json;
  std::string tables;  // markdown
  std::map<std::string, std::string> heatmaps;  // file name -> SVG
};

inline Report build_report(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                           std::size_t num_p) {
  using ojson = nlohmann::ordered_json;
  const std::vector<RunRecord> ranked =
      cfg.aggregation == Aggregation::kCellMedian ? cell_medians(records) : records;
  if (ranked.size() < 2) throw ValueError("report: need at least 2 models to rank");

  Report rep;
  const auto single = summarize_single(records, ranked, num_p, cfg.utility_metric);
  const auto corr = tradeoff_correlations(ranked);

  ojson t1;
  t1["utility_metric"] = to_string(cfg.utility_metric);
  t1["chance_level"] = single.chance;
  t1["baseline_utility"] = single.baseline_utility;
  t1["baseline_fairness_gap"] = single.baseline_fairness;
  t1["baseline_attack_balanced_acc"] = single.baseline_privacy;
  t1["best_utility"] = single.best_utility;
  t1["best_fairness_gap"] = single.best_fairness;
  t1["best_attack_balanced_acc"] = single.best_privacy;
  t1["formatted"] = {
      {"Baseline Utility", single.baseline_utility_cell()},
      {"Baseline Fairness", single.baseline_fairness_cell()},
      {"Baseline Privacy", single.baseline_privacy_cell()},
      {"Best Utility", percent(single.best_utility)},
      {"Best Fairness", percent(single.best_fairness)},
      {"Best Privacy", percent(single.best_privacy)},
  };

  auto corr_json = [](const std::optional<double>& r) { return r ? ojson(*r) : ojson("undefined"); };
  ojson t2;
  t2["aggregation"] = cfg.aggregation == Aggregation::kCellMedian ? "median" : "per-seed";
  t2["correlations"] = {{"utility_fairness", corr_json(corr.utility_fairness)},
                        {"utility_privacy", corr_json(corr.utility_privacy)},
                        {"fairness_privacy", corr_json(corr.fairness_privacy)}};
  ojson csr_list = ojson::array();
  std::vector<std::vector<double>> csr_scores;
  for (const auto& w : cfg.csr_weights) {
    const BestCsr best = best_csr(ranked, w);
    csr_scores.push_back(csr(ranked, w));
    csr_list.push_back({{"weights", {w.utility, w.fairness, w.privacy}},
                        {"label", w.label()},
                        {"score", best.score},
                        {"alpha_group", std::string(1, group_letter(best.alpha_group))},
                        {"beta_group", std::string(1, group_letter(best.beta_group))},
                        {"alpha", ranked[best.index].alpha},
                        {"beta", ranked[best.index].beta},
                        {"seed", ranked[best.index].seed},
                        {"formatted", best.format()}});
  }
  t2["best_csr"] = csr_list;
  ojson t2f;
  t2f["U./F. Corr."] = format_corr(corr.utility_fairness);
  t2f["U./P. Corr."] = format_corr(corr.utility_privacy);
  t2f["F./P. Corr."] = format_corr(corr.fairness_privacy);
  for (const auto& c : csr_list) t2f[c["label"].get<std::string>()] = c["formatted"];
  t2["formatted"] = t2f;

  const auto nu = normalize(ranked, MetricKind::kUtility);
  const auto na = normalize(ranked, MetricKind::kFairnessGap);
  const auto np = normalize(ranked, MetricKind::kAttackAccuracy);
  ojson per = ojson::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    ojson row = {{"alpha", r.alpha},
                 {"beta", r.beta},
                 {"seed", r.seed},
                 {"alpha_group", std::string(1, group_letter(group_label(r.alpha)))},
                 {"beta_group", std::string(1, group_letter(group_label(r.beta)))},
                 {"utility", r.metrics.utility},
                 {"fairness_gap", r.metrics.fairness_gap},
                 {"attack_balanced_acc", r.metrics.attack_balanced_acc},
                 {"val_loss", r.val_loss},
                 {"n_utility", nu[i]},
                 {"n_fairness_gap", na[i]},
                 {"n_attack_balanced_acc", np[i]}};
    ojson scores = ojson::object();
    for (std::size_t k = 0; k < cfg.csr_weights.size(); ++k) scores[cfg.csr_weights[k].label()] = csr_scores[k][i];
    row["csr"] = scores;
    per.push_back(row);
  }

  ojson maps = ojson::object();
  for (MetricKind m : {MetricKind::kUtility, MetricKind::kFairnessGap, MetricKind::kAttackAccuracy}) {
    const HeatmapGrid g = heatmap(records, m, /*require_complete=*/false);
    ojson cells = ojson::array();
    for (const auto& row : g.cells) {
      ojson jr = ojson::array();
      for (const auto& c : row) jr.push_back(c ? ojson(*c) : ojson(nullptr));
      cells.push_back(jr);
    }
    maps[to_string(m)] = {{"rows", "alpha group B,L,M,H"}, {"cols", "beta group B,L,M,H"}, {"cells", cells}};
    rep.heatmaps[std::string("heatmap_") + to_string(m) + ".svg"] = heatmap_svg(g, to_string(m));
  }

  rep.json["records"] = records.size();
  rep.json["table1"] = t1;
  rep.json["table2"] = t2;
  rep.json["heatmaps"] = maps;
  rep.json["per_record"] = per;

  std::ostringstream md;
  md << "| Baseline Utility | Baseline Fairness | Baseline Privacy | Best Utility | Best Fairness | Best Privacy |\n"
     << "|---|---|---|---|---|---|\n"
     << "| " << single.baseline_utility_cell() << " | " << single.baseline_fairness_cell() << " | "
     << single.baseline_privacy_cell() << " | " << percent(single.best_utility) << " | "
     << percent(single.best_fairness) << " | " << percent(single.best_privacy) << " |\n\n";
  md << "| U./F. Corr. | U./P. Corr. | F./P. Corr. |";
  for (const auto& w : cfg.csr_weights) md << ' ' << w.label() << " |";
  md << "\n|---|---|---|";
  for (std::size_t k = 0; k < cfg.csr_weights.size(); ++k) md << "---|";
  md << "\n| " << format_corr(corr.utility_fairness) << " | " << format_corr(corr.utility_privacy) << " | "
     << format_corr(corr.fairness_privacy) << " |";
  for (const auto& c : csr_list) md << ' ' << c["formatted"].get<std::string>() << " |";
  md << '\n';
  rep.tables = md.str();
  return rep;
}

inline void write_report(const Report& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << text;
  };
  write("report.json", rep.json.dump(2) + "\n");
  write("tables.md", rep.tables);
  for (const auto& [name, svg] : rep.heatmaps) write(name, svg);
}

}  // namespace fairpriv
