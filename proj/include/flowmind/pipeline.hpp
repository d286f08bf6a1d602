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

#ifndef FLOWMIND_PIPELINE_HPP
#define FLOWMIND_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "flowmind/connect.hpp"
#include "flowmind/diagram.hpp"
#include "flowmind/eval.hpp"
#include "flowmind/ingest.hpp"
#include "flowmind/layout.hpp"
#include "flowmind/suppress.hpp"
#include "flowmind/textassoc.hpp"

namespace flowmind {

class OutputWriteError : public Error {
 public:
  using Error::Error;
};

struct PipelineConfig {
  bool nms_enabled = true;
  NmsConfig nms;
  ConnectConfig connect;
  TextAssocConfig text;
  RecognizerSpec recognizer;
  /// layout.dpi is also the pixel-to-inch scale of the whole conversion.
  LayoutConfig layout;
  EvalConfig eval;
};

void validate(const PipelineConfig& cfg);

/// Overlays the keys present in `json_text` onto `base` and validates the result.
/// Unknown keys throw InvalidConfig.
PipelineConfig apply_config_json(std::string_view json_text, PipelineConfig base = {});

std::string pipeline_config_to_json(const PipelineConfig& cfg);

struct ConversionReport {
  IngestReport ingest;
  std::size_t suppressed = 0;
  std::size_t free_endpoints = 0;
  std::vector<RecognitionIssue> recognition;
  std::vector<std::string> warnings;
};

struct ConversionResult {
  /// Surviving detections in pixels: shapes and connectors in input order, then
  /// the merged text blocks carrying their recognized content.
  DocumentInput detections;
  /// Diagram before typesetting, inches.
  DiagramDoc assembled;
  /// Diagram after typesetting (equal to `assembled` when layout is disabled).
  DiagramDoc diagram;
  ConversionReport report;
};

ConversionResult convert_document(const DocumentInput& doc, const PipelineConfig& cfg = {},
                                  const IngestReport& ingest = {});

/// Parses a wire-format file; the ".gt" extension selects the ground-truth mode.
ParsedDocument load_document(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

enum class OutputFormat { svg, drawio, pptx, detections, diagram };

/// Format selected by file extension: .svg, .drawio, .pptx, .det, .json.
OutputFormat output_format_for(const std::filesystem::path& path);
std::string extension_for(OutputFormat format);

std::string render_output(const ConversionResult& result, OutputFormat format, double dpi);

/// Renders a bare diagram; the detections format is not available here.
std::string render_diagram(const DiagramDoc& doc, OutputFormat format, double dpi);

std::string conversion_report_json(const ConversionReport& report, const PipelineConfig& cfg,
                                   std::string_view source);

}  // namespace flowmind

#endif  // FLOWMIND_PIPELINE_HPP
