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

#include "flowmind/suppress.hpp"

#include <algorithm>
#include <numeric>

namespace flowmind {

void validate(const NmsConfig& cfg) {
  if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
    throw Error("nms iou threshold must lie in (0, 1]");
  }
}

std::vector<std::size_t> cross_class_nms_indices(std::span<const Detection> elements,
                                                 const NmsConfig& cfg) {
  validate(cfg);
  std::vector<std::size_t> order(elements.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return elements[a].score > elements[b].score;
  });

  std::vector<std::size_t> kept;
  std::vector<bool> suppressed(elements.size(), false);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t i = order[pos];
    if (suppressed[i]) continue;
    kept.push_back(i);
    if (cfg.exempt_text && is_text(elements[i].cls)) continue;
    for (std::size_t q = pos + 1; q < order.size(); ++q) {
      const std::size_t j = order[q];
      if (suppressed[j]) continue;
      if (cfg.exempt_text && is_text(elements[j].cls)) continue;
      if (iou(elements[i].bbox, elements[j].bbox) > cfg.iou_threshold) suppressed[j] = true;
    }
  }
  return kept;
}

std::vector<Detection> cross_class_nms(std::span<const Detection> elements, const NmsConfig& cfg) {
  std::vector<Detection> out;
  for (std::size_t i : cross_class_nms_indices(elements, cfg)) out.push_back(elements[i]);
  return out;
}

}  // namespace flowmind
