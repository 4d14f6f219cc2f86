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

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fairpriv/training.hpp"

namespace fairpriv {

// Model file layout, all integers and floats little-endian:
//
//   magic      4 bytes  "FPMB"
//   version    u32      1
//   networks   u32      4 (extractor, classifier, fairness adv., privacy adv.)
//   per network:
//     count    u32      number of layer sizes L+1
//     sizes    u64 x (L+1)
//     params   f64 x ...  W0 row-major, b0, W1, b1, ...
inline constexpr std::array<char, 4> kModelMagic = {'F', 'P', 'M', 'B'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("model file truncated", 0);
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

inline void write_mlp(std::ostream& os, const Mlp& net) {
  put_le(os, net.layer_sizes().size(), 4);
  for (std::size_t s : net.layer_sizes()) put_le(os, s, 8);
  for (const Matrix& m : net.parameters())
    for (double v : m.data()) put_le(os, std::bit_cast<std::uint64_t>(v), 8);
}

inline Mlp read_mlp(std::istream& is) {
  const auto count = get_le(is, 4);
  if (count < 2 || count > 64) throw ParseError("model file: implausible layer count", 0);
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = get_le(is, 8);
    if (s == 0 || s > (1u << 24)) throw ParseError("model file: implausible layer size", 0);
  }
  Mlp net(sizes);
  for (Matrix& m : net.parameters())
    for (double& v : m.data()) v = std::bit_cast<double>(get_le(is, 8));
  return net;
}

}  // namespace detail

inline void write_bundle(const ModelBundle& b, std::ostream& os) {
  os.write(kModelMagic.data(), kModelMagic.size());
  detail::put_le(os, kModelVersion, 4);
  detail::put_le(os, 4, 4);
  for (const Mlp* net : {&b.extractor, &b.classifier, &b.fairness_adversary, &b.privacy_adversary})
    detail::write_mlp(os, *net);
}

inline ModelBundle read_bundle(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kModelMagic) throw ParseError("not a model file (bad magic)", 0);
  const auto version = detail::get_le(is, 4);
  if (version != kModelVersion) {
    throw ParseError("unsupported model file version " + std::to_string(version), 0);
  }
  if (detail::get_le(is, 4) != 4) throw ParseError("model file: expected 4 networks", 0);
  ModelBundle b;
  b.extractor = detail::read_mlp(is);
  b.classifier = detail::read_mlp(is);
  b.fairness_adversary = detail::read_mlp(is);
  b.privacy_adversary = detail::read_mlp(is);
  b.validate();
  return b;
}

inline void save_bundle(const ModelBundle& b, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_bundle(b, os);
  if (!os) throw Error("write failed: " + path.string());
}

inline ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  try {
    return read_bundle(is);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), 0);
  }
}

}  // namespace fairpriv
