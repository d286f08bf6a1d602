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

#ifndef FLOWMIND_INGEST_HPP
#define FLOWMIND_INGEST_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowmind/core.hpp"

namespace flowmind {

class MalformedDocument : public Error {
 public:
  using Error::Error;
};

class NonPositiveDpi : public Error {
 public:
  using Error::Error;
};

inline constexpr double kDefaultDpi = 96.0;

/// One image worth of detections (or ground-truth annotations), in pixels.
struct DocumentInput {
  int image_width = 0;
  int image_height = 0;
  std::optional<std::string> image_path;
  std::vector<Detection> elements;

  bool operator==(const DocumentInput&) const = default;
};

struct IngestIssue {
  std::size_t index = 0;
  std::string reason;

  bool operator==(const IngestIssue&) const = default;
};

struct IngestReport {
  std::size_t accepted_count = 0;
  std::size_t clamped_count = 0;
  std::vector<IngestIssue> rejected;
  /// Non-fatal notes: dropped keypoints, ignored scores, keypoints outside the bbox.
  std::vector<IngestIssue> warnings;

  bool operator==(const IngestReport&) const = default;
};

struct ParsedDocument {
  DocumentInput document;
  IngestReport report;
};

/// Parses the detections wire format. Only document-level problems throw
/// MalformedDocument; per-element problems land in the report.
ParsedDocument parse_detections(std::string_view bytes);

/// Same wire format with scores omitted; every score becomes 1.0.
ParsedDocument parse_ground_truth(std::string_view bytes);

enum class WireMode { detections, ground_truth };

/// Canonical serialization. Ground-truth mode omits scores.
std::string serialize_document(const DocumentInput& doc, WireMode mode = WireMode::detections);

double pixels_to_inches(double pixels, double dpi = kDefaultDpi);

}  // namespace flowmind

#endif  // FLOWMIND_INGEST_HPP
