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

#ifndef FLOWMIND_TEXTASSOC_HPP
#define FLOWMIND_TEXTASSOC_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowmind/connect.hpp"
#include "flowmind/core.hpp"

namespace flowmind {

enum class AttachmentKind { standalone, shape, connector };

struct Attachment {
  AttachmentKind kind = AttachmentKind::standalone;
  ElementId target;

  bool operator==(const Attachment&) const = default;
};

/// One raw text detection that contributed to a block.
struct TextFragment {
  std::size_t source = 0;
  CornerBoxd bbox;
  std::optional<std::string> text;

  bool operator==(const TextFragment&) const = default;
};

struct TextBlock {
  CornerBoxd bbox;
  std::optional<std::string> content;
  std::optional<double> confidence;
  Attachment attachment;
  double score = 1.0;
  std::vector<TextFragment> fragments;

  bool operator==(const TextBlock&) const = default;
};

enum class AssignCriterion {
  /// area(text ∩ target) / area(text)
  containment,
  /// plain intersection over union
  iou,
};

struct TextAssocConfig {
  AssignCriterion criterion = AssignCriterion::containment;
  double assign_threshold = 0.8;
  double standalone_merge_iou = 0.1;
};

/// Overlap ratio of a text box against a target box under the configured criterion.
double text_overlap(const CornerBoxd& text, const CornerBoxd& target, const TextAssocConfig& cfg);

/// Shape a text box would label: ratio >= threshold, highest ratio, ties to the
/// smaller shape area, then the lower id.
std::optional<ElementId> best_shape_for(const CornerBoxd& text, std::span<const ShapeRef> shapes,
                                        const TextAssocConfig& cfg = {});

/// Fragment texts joined in reading order: bands of the median fragment height
/// top to bottom, left to right within a band.
std::optional<std::string> reading_order_content(std::span<const TextFragment> fragments);

/// One merge pass: blocks sharing a best shape are united, unassigned blocks are
/// united transitively when their iou exceeds the standalone threshold.
std::vector<TextBlock> merge_pass(std::span<const TextBlock> blocks, std::span<const ShapeRef> shapes,
                                  const TextAssocConfig& cfg = {});

/// Repeats merge_pass until no more blocks merge.
std::vector<TextBlock> merge_text_blocks(std::span<const TextBlock> blocks,
                                         std::span<const ShapeRef> shapes,
                                         const TextAssocConfig& cfg = {});

std::vector<TextBlock> merge_text_boxes(std::span<const Detection> texts,
                                        std::span<const ShapeRef> shapes,
                                        const TextAssocConfig& cfg = {});

/// Turns detections into single-fragment blocks; fragment sources are input indices.
std::vector<TextBlock> blocks_from_detections(std::span<const Detection> texts);

std::vector<TextBlock> assign_text(std::span<const TextBlock> blocks, std::span<const ShapeRef> shapes,
                                   std::span<const ConnectorEdge> connectors,
                                   const TextAssocConfig& cfg = {});

struct RecognizerSpec {
  enum class Mode { ground_truth_echo, external_command, none };
  Mode mode = Mode::ground_truth_echo;
  /// Shell command; "{box}" expands to "x0 y0 x1 y1" and "{image}" to the quoted image path.
  std::string command_template;
};

void validate(const RecognizerSpec& spec);

/// "echo", "none" or "cmd:<template>".
RecognizerSpec parse_recognizer(const std::string& text);
std::string describe(const RecognizerSpec& spec);

struct CropBox {
  long x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool operator==(const CropBox&) const = default;
};

/// Largest integer pixel box inside `bbox`.
CropBox crop_box(const CornerBoxd& bbox);

struct RecognitionIssue {
  std::size_t block = 0;
  std::string message;
};

struct RecognitionResult {
  std::vector<TextBlock> blocks;
  std::vector<RecognitionIssue> issues;
};

RecognitionResult recognize(std::span<const TextBlock> blocks, const RecognizerSpec& spec,
                            const std::optional<std::string>& image_path);

}  // namespace flowmind

#endif  // FLOWMIND_TEXTASSOC_HPP
