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

#ifndef FLOWMIND_DIAGRAM_HPP
#define FLOWMIND_DIAGRAM_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowmind/connect.hpp"
#include "flowmind/core.hpp"
#include "flowmind/textassoc.hpp"

namespace flowmind {

struct ShapeNode {
  ElementId id;
  ElementClass cls = ElementClass::rectangle;
  /// Inches.
  CenterBoxd box;
  std::optional<std::string> label;

  bool operator==(const ShapeNode&) const = default;
};

/// Assembled diagram. All geometry is in inches, including binding positions
/// and text block boxes.
struct DiagramDoc {
  double page_width = 0.0;
  double page_height = 0.0;
  std::vector<ShapeNode> shapes;
  std::vector<ConnectorEdge> connectors;
  std::vector<TextBlock> free_texts;

  const ShapeNode* find_shape(ElementId id) const;

  bool operator==(const DiagramDoc&) const = default;
};

inline CornerBoxd shape_bbox(const ShapeNode& s) { return center_to_corner(s.box); }

/// Throws Error when ids collide, a binding references a missing shape, or a
/// shape center lies off the page.
void validate(const DiagramDoc& doc);

std::string diagram_to_json(const DiagramDoc& doc);
DiagramDoc diagram_from_json(std::string_view text);

}  // namespace flowmind

#endif  // FLOWMIND_DIAGRAM_HPP
