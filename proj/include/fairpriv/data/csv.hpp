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
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairpriv/data/dataset.hpp"

namespace fairpriv {

namespace csv {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line, std::string_view column) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("column " + std::string(column) + ": '" + std::string(s) +
                         "' is not a number",
                     line);
  }
  return v;
}

inline std::size_t parse_index(std::string_view s, std::size_t line, std::string_view column) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError("column " + std::string(column) + ": '" + std::string(s) +
                         "' is not a non-negative integer label",
                     line);
  }
  return v;
}

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace csv

/// Header `x0,...,x{d-1},y,y_a,y_p`, one row per example.
inline void write_csv(const LabeledDataset& ds, std::ostream& os) {
  ds.validate();
  for (std::size_t j = 0; j < ds.dim(); ++j) os << 'x' << j << ',';
  os << "y,y_a,y_p\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.x.row(i)) os << csv::format_double(v) << ',';
    os << ds.y[i] << ',' << ds.y_a[i] << ',' << ds.y_p[i] << '\n';
  }
}

inline void save_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_csv(ds, os);
  if (!os) throw Error("write failed: " + path.string());
}

/// Class counts are inferred as max label + 1, at least 2.
inline LabeledDataset read_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("empty file, expected header", 1);
  ++lineno;
  const auto header = csv::split_fields(line);
  if (header.size() < 4) throw ParseError("header needs x0..,y,y_a,y_p", lineno);
  const std::size_t d = header.size() - 3;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw ParseError("header column " + std::to_string(j + 1) + " is '" +
                           std::string(header[j]) + "', expected 'x" + std::to_string(j) + "'",
                       lineno);
    }
  }
  const char* label_names[3] = {"y", "y_a", "y_p"};
  for (std::size_t k = 0; k < 3; ++k) {
    if (header[d + k] != label_names[k]) {
      throw ParseError("header is missing column '" + std::string(label_names[k]) + "'",
                       lineno);
    }
  }

  std::vector<double> values;
  LabeledDataset ds;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       lineno);
    }
    for (std::size_t j = 0; j < d; ++j) values.push_back(csv::parse_double(fields[j], lineno, header[j]));
    ds.y.push_back(csv::parse_index(fields[d], lineno, "y"));
    ds.y_a.push_back(csv::parse_index(fields[d + 1], lineno, "y_a"));
    ds.y_p.push_back(csv::parse_index(fields[d + 2], lineno, "y_p"));
  }
  const std::size_t n = ds.y.size();
  ds.x = Matrix(n, d, std::move(values));
  auto classes = [](const std::vector<std::size_t>& v) {
    std::size_t mx = 0;
    for (std::size_t l : v) mx = std::max(mx, l);
    return std::max<std::size_t>(2, mx + 1);
  };
  ds.num_y = classes(ds.y);
  ds.num_a = classes(ds.y_a);
  ds.num_p = classes(ds.y_p);
  return ds;
}

inline LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return read_csv(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

}  // namespace fairpriv
