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

#include "flowmind/core.hpp"

#include <cctype>

namespace flowmind {

namespace {

constexpr std::array<std::string_view, kElementClassCount> kNames = {
    "circle",    "diamond",   "hexagon",  "long_oval", "parallelogram", "rectangle",
    "trapezoid", "triangle",  "textblock", "arrow",    "double_arrow",  "line",
};

}  // namespace

std::string_view class_name(ElementClass c) { return kNames[class_index(c)]; }

std::optional<ElementClass> parse_class_name(std::string_view name) {
  std::string folded;
  folded.reserve(name.size());
  for (char ch : name) {
    if (ch == '-' || ch == ' ') ch = '_';
    folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == folded) return kAllClasses[i];
  }
  return std::nullopt;
}

}  // namespace flowmind
