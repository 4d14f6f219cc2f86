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

// Command line front end: gen-data, train, sweep, analyze.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "fairpriv/fairpriv.hpp"

namespace fs = std::filesystem;
using namespace fairpriv;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> results;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

std::string tag(double v) { return csv::format_double(v); }

int cmd_gen_data(const Options& o) {
  ExperimentConfig cfg = load(o);
  if (cfg.csv_path) throw ValueError("gen-data: config reads data from CSV; nothing to generate");
  if (o.seed) cfg.synthetic.seed = *o.seed;
  const fs::path out = o.out ? fs::path(*o.out) : cfg.output_dir / "data.csv";
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_csv(generate(cfg.synthetic), out);
  std::cerr << "wrote " << cfg.synthetic.n << " rows to " << out.string() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const double alpha = o.alpha.value_or(0.0);
  const double beta = o.beta.value_or(0.0);
  const std::uint64_t seed = o.seed.value_or(cfg.seeds.front());
  const Splits splits = prepare_splits(cfg);
  const RunArtifacts run = run_single(cfg, splits, alpha, beta, seed);

  fs::create_directories(cfg.output_dir);
  const fs::path model = cfg.output_dir / ("model_a" + tag(alpha) + "_b" + tag(beta) + "_s" +
                                           std::to_string(seed) + ".fpmb");
  save_bundle(run.model.bundle, model);
  const fs::path records = cfg.output_dir / "records.csv";
  const bool fresh = !fs::exists(records);
  std::ofstream os(records, std::ios::app | std::ios::binary);
  if (!os) throw Error("cannot open " + records.string());
  if (fresh) os << kResultsHeader << '\n';
  const std::string line = results_line({run.record, std::nullopt});
  os << line << '\n';
  std::cout << line << '\n';
  std::cerr << "model: " << model.string() << " (best epoch " << run.model.best_epoch << ")\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const Splits splits = prepare_splits(cfg);
  const std::size_t jobs = o.jobs.value_or(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = run_sweep(cfg, splits, jobs, [](const RunOutcome& r, std::size_t done, std::size_t total) {
    std::cerr << "[" << done << "/" << total << "] " << results_line(r);
    if (!r.ok()) std::cerr << "  (" << *r.error << ")";
    std::cerr << "\n";
  });
  fs::create_directories(cfg.output_dir);
  save_results(rows, cfg.output_dir / "results.csv");
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.ok();
  std::cerr << "wrote " << (cfg.output_dir / "results.csv").string() << " (" << rows.size() << " rows, "
            << failed << " failed)\n";
  return failed == 0 ? 0 : 1;
}

int cmd_analyze(const Options& o) {
  const ExperimentConfig cfg = load(o);
  const fs::path results = o.results ? fs::path(*o.results) : cfg.output_dir / "results.csv";
  const auto records = complete_records(cfg, load_results(results));
  const std::size_t num_p = cfg.csv_path ? load_dataset(cfg).num_p : cfg.synthetic.joint.num_p;
  const Report rep = build_report(cfg, records, num_p);
  write_report(rep, cfg.output_dir);
  std::cout << rep.tables;
  std::cerr << "wrote report.json, tables.md and " << rep.heatmaps.size() << " heatmaps to "
            << cfg.output_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, sweep, and audit classifiers with fairness and privacy adversaries"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path (file for gen-data, directory otherwise)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset as CSV");
  add_common(gen);
  gen->add_option("--seed", o.seed, "override the generator seed");

  auto* tr = app.add_subcommand("train", "train and evaluate one (alpha, beta, seed) configuration");
  add_common(tr);
  tr->add_option("--alpha", o.alpha, "fairness adversary weight")->check(CLI::NonNegativeNumber);
  tr->add_option("--beta", o.beta, "privacy adversary weight")->check(CLI::NonNegativeNumber);
  tr->add_option("--seed", o.seed, "run seed");

  auto* sw = app.add_subcommand("sweep", "run the full alpha x beta x seed grid");
  add_common(sw);
  sw->add_option("--jobs", o.jobs, "parallel training jobs (default: hardware threads)")->check(CLI::PositiveNumber);

  auto* an = app.add_subcommand("analyze", "tables, correlations, CSR rankings and heatmaps");
  add_common(an);
  an->add_option("--results", o.results, "results CSV (default: <output_dir>/results.csv)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen_data(o);
    if (tr->parsed()) return cmd_train(o);
    if (sw->parsed()) return cmd_sweep(o);
    if (an->parsed()) return cmd_analyze(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
