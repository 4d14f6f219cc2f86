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

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fairpriv/analysis.hpp"
#include "fairpriv/data/csv.hpp"

namespace fairpriv {

inline constexpr const char* kResultsHeader =
    "alpha,beta,seed,utility,fairness_gap,attack_balanced_acc,val_loss";
inline constexpr const char* kErrorMarker = "ERROR";

/// A sweep row: a record, or the error that prevented one.
struct RunOutcome {
  RunRecord record;  // alpha, beta, seed always set
  std::optional<std::string> error;

  bool ok() const noexcept { return !error.has_value(); }
};

/// One CSV line without a trailing newline. Failed runs carry the error
/// marker in every metric column.
inline std::string results_line(const RunOutcome& o) {
  const RunRecord& r = o.record;
  std::string s = csv::format_double(r.alpha) + "," + csv::format_double(r.beta) + "," +
                  std::to_string(r.seed) + ",";
  if (!o.ok()) {
    return s + kErrorMarker + "," + kErrorMarker + "," + kErrorMarker + "," + kErrorMarker;
  }
  return s + csv::format_double(r.metrics.utility) + "," + csv::format_double(r.metrics.fairness_gap) +
         "," + csv::format_double(r.metrics.attack_balanced_acc) + "," + csv::format_double(r.val_loss);
}

inline void write_results(const std::vector<RunOutcome>& rows, std::ostream& os) {
  os << kResultsHeader << '\n';
  for (const auto& o : rows) os << results_line(o) << '\n';
}

inline void save_results(const std::vector<RunOutcome>& rows, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_results(rows, os);
  if (!os) throw Error("write failed: " + path.string());
}

inline std::vector<RunOutcome> read_results(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line)) throw ParseError("empty results file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) {
    throw ParseError(std::string("results header must be '") + kResultsHeader + "'", 1);
  }
  std::vector<RunOutcome> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_fields(line);
    if (f.size() != 7) {
      throw ParseError("expected 7 fields, got " + std::to_string(f.size()), lineno);
    }
    RunOutcome o;
    o.record.alpha = csv::parse_double(f[0], lineno, "alpha");
    o.record.beta = csv::parse_double(f[1], lineno, "beta");
    o.record.seed = csv::parse_index(f[2], lineno, "seed");
    if (f[3] == kErrorMarker) {
      o.error = "failed run";
    } else {
      o.record.metrics.utility = csv::parse_double(f[3], lineno, "utility");
      o.record.metrics.fairness_gap = csv::parse_double(f[4], lineno, "fairness_gap");
      o.record.metrics.attack_balanced_acc = csv::parse_double(f[5], lineno, "attack_balanced_acc");
      o.record.val_loss = csv::parse_double(f[6], lineno, "val_loss");
    }
    out.push_back(std::move(o));
  }
  return out;
}

inline std::vector<RunOutcome> load_results(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return read_results(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

}  // namespace fairpriv
