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

#ifndef FLOWMIND_SUPPRESS_HPP
#define FLOWMIND_SUPPRESS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "flowmind/core.hpp"

namespace flowmind {

struct NmsConfig {
  double iou_threshold = 0.5;
  /// When set, text blocks neither suppress nor get suppressed.
  bool exempt_text = false;
};

void validate(const NmsConfig& cfg);

/// Indices of the surviving detections, in acceptance order (descending score,
/// ties by input order). Suppression ignores class.
std::vector<std::size_t> cross_class_nms_indices(std::span<const Detection> elements,
                                                 const NmsConfig& cfg = {});

std::vector<Detection> cross_class_nms(std::span<const Detection> elements,
                                       const NmsConfig& cfg = {});

}  // namespace flowmind

#endif  // FLOWMIND_SUPPRESS_HPP
