/**
 * Copyright 2026 The Flowmind Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FLOWMIND_TESTS_SUPPORT_HPP
#define FLOWMIND_TESTS_SUPPORT_HPP

#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <zlib.h>

#include "flowmind/core.hpp"

namespace flowmind::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }

  /// Multiple of 1/256 in [lo, hi].
  double dyadic(double lo, double hi) { return integer(static_cast<int>(lo * 256), static_cast<int>(hi * 256)) / 256.0; }

  CornerBoxd box(double extent, double min_side, double max_side) {
    const double w = uniform(min_side, max_side);
    const double h = uniform(min_side, max_side);
    const double x = uniform(0.0, extent - w);
    const double y = uniform(0.0, extent - h);
    return {x, y, x + w, y + h};
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<ElementClass> shape_classes() {
  std::vector<ElementClass> out;
  for (ElementClass c : kAllClasses) {
    if (is_shape(c)) out.push_back(c);
  }
  return out;
}

struct ZipMember {
  std::string name;
  std::string data;
  std::uint16_t method = 0;
  std::uint16_t mod_time = 0;
  std::uint16_t mod_date = 0;
  bool crc_ok = false;
};

inline std::uint32_t le(const std::string& s, std::size_t at, int bytes) {
  std::uint32_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + static_cast<std::size_t>(i)]);
  return v;
}

/// Walks the local file headers of a stored (uncompressed) archive and checks
/// the central directory count. Throws std::runtime_error on structural damage.
inline std::vector<ZipMember> read_zip(const std::string& bytes) {
  std::vector<ZipMember> out;
  std::size_t at = 0;
  while (at + 4 <= bytes.size() && le(bytes, at, 4) == 0x04034b50u) {
    ZipMember m;
    m.method = static_cast<std::uint16_t>(le(bytes, at + 8, 2));
    m.mod_time = static_cast<std::uint16_t>(le(bytes, at + 10, 2));
    m.mod_date = static_cast<std::uint16_t>(le(bytes, at + 12, 2));
    const std::uint32_t crc = le(bytes, at + 14, 4);
    const std::uint32_t size = le(bytes, at + 18, 4);
    const std::uint32_t name_len = le(bytes, at + 26, 2);
    const std::uint32_t extra_len = le(bytes, at + 28, 2);
    const std::size_t name_at = at + 30;
    const std::size_t data_at = name_at + name_len + extra_len;
    if (data_at + size > bytes.size()) throw std::runtime_error("truncated zip member");
    m.name = bytes.substr(name_at, name_len);
    m.data = bytes.substr(data_at, size);
    const auto computed = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(m.data.data()), static_cast<uInt>(m.data.size())));
    m.crc_ok = computed == crc;
    out.push_back(std::move(m));
    at = data_at + size;
  }
  const std::size_t eocd = bytes.rfind(std::string("PK\x05\x06", 4));
  if (eocd == std::string::npos) throw std::runtime_error("missing end of central directory");
  if (le(bytes, eocd + 10, 2) != out.size()) throw std::runtime_error("central directory count mismatch");
  return out;
}

inline boost::property_tree::ptree parse_xml(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

/// Depth-first count of elements with the given tag.
inline std::size_t count_tag(const boost::property_tree::ptree& tree, const std::string& tag) {
  std::size_t n = 0;
  for (const auto& [key, child] : tree) {
    if (key == tag) ++n;
    n += count_tag(child, tag);
  }
  return n;
}

template <typename F>
void for_each_tag(const boost::property_tree::ptree& tree, const std::string& tag, F&& f) {
  for (const auto& [key, child] : tree) {
    if (key == tag) f(child);
    for_each_tag(child, tag, f);
  }
}

}  // namespace flowmind::testing

#endif  // FLOWMIND_TESTS_SUPPORT_HPP
