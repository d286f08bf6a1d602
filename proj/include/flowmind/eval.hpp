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

#ifndef FLOWMIND_EVAL_HPP
#define FLOWMIND_EVAL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowmind/connect.hpp"
#include "flowmind/ingest.hpp"

namespace flowmind {

class ImageMismatch : public Error {
 public:
  using Error::Error;
};

class UnresolvedConnections : public Error {
 public:
  using Error::Error;
};

struct EvalConfig {
  /// Candidate pairs need at least this IoU.
  double match_iou = 0.5;
  /// Matched pairs count as true positives from this IoU on.
  double score_iou = 0.7;
  /// IoU used for the diagram-accuracy check.
  double da_iou = 0.8;
  /// Drop matched-but-unscored pairs from both denominators instead of
  /// counting them as a false positive plus a false negative.
  bool lenient_unscored = false;
  /// Arrow endpoints must match in order (tail to tail, head to head).
  bool ordered_arrows = true;
};

void validate(const EvalConfig& cfg);

struct MatchedPair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double iou = 0.0;
  bool scored = false;
};

struct Matching {
  std::vector<MatchedPair> pairs;
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_gt;

  std::size_t scored_count() const;
  /// gt index matched (and scored, if requested) to `pred`, if any.
  std::optional<std::size_t> gt_for_pred(std::size_t pred, bool scored_only = true) const;
};

/// Greedy one-to-one matching per class by descending IoU, ties by
/// (pred index, gt index).
Matching match_detections(const DocumentInput& pred, const DocumentInput& gt, double match_iou, double score_iou);
Matching match_detections(const DocumentInput& pred, const DocumentInput& gt, const EvalConfig& cfg = {});

/// Recall, precision and F1 for one image or class slice; absent means N/A.
struct Scores {
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
};

/// precision = tp/n_pred and recall = tp/n_gt (N/A on empty denominators);
/// F1 is N/A when either is N/A and 0 when both are 0.
Scores image_scores(std::size_t tp, std::size_t n_pred, std::size_t n_gt);

struct ClassRow {
  Scores scores;
  /// Ground-truth instances over the corpus.
  std::size_t count = 0;
};

struct ImageRow {
  std::string name;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  std::size_t tp = 0;
  Scores scores;
  bool diagram_correct = false;
};

struct CerRow {
  std::string image;
  std::size_t pred = 0;
  std::size_t gt = 0;
  double cer = 0.0;
};

struct ConnectorSlice {
  std::array<ClassRow, 3> per_kind;  // arrow, double_arrow, line
  Scores overall;
  Scores weighted;
};

struct MetricsReport {
  std::array<ClassRow, kElementClassCount> per_class;
  /// Per-class scores weighted by ground-truth counts, N/A classes excluded.
  Scores weighted;
  /// Mean of per-image scores, N/A images excluded.
  Scores overall;
  double diagram_accuracy = 0.0;
  std::vector<ImageRow> per_image;
  std::optional<ConnectorSlice> connectors;
  /// CER over scored text block matches; filled only when requested.
  bool cer_requested = false;
  std::vector<CerRow> cer_rows;
  std::optional<double> mean_cer;
};

/// Mean of the defined values; N/A when none is defined.
std::optional<double> mean_defined(std::span<const std::optional<double>> values);

/// Per-image and per-class detection scores from precomputed matchings.
MetricsReport detection_metrics(std::span<const DocumentInput> preds, std::span<const DocumentInput> gts,
                                std::span<const Matching> matchings, const EvalConfig& cfg = {});

/// True when every gt element is matched at `da_iou` with the right class, no
/// prediction is left over and both sides have the same count.
bool diagram_correct(const DocumentInput& pred, const DocumentInput& gt, const EvalConfig& cfg = {});

double diagram_accuracy(std::span<const DocumentInput> preds, std::span<const DocumentInput> gts,
                        const EvalConfig& cfg = {});

/// Shapes and resolved connectors of one document. Shape ids are element
/// indices; edge i belongs to element connector_elements[i].
struct ResolvedDocument {
  std::vector<ShapeRef> shapes;
  std::vector<ConnectorEdge> edges;
  std::vector<std::size_t> connector_elements;
};

ResolvedDocument resolve_document(const DocumentInput& doc, const ConnectConfig& cfg = {});

struct ConnectorCounts {
  std::size_t tp = 0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  std::array<std::size_t, 3> tp_kind{};
  std::array<std::size_t, 3> pred_kind{};
  std::array<std::size_t, 3> gt_kind{};
};

/// Connection-level true positives of one image. A prediction counts when it is
/// a scored match of a gt connector and its endpoint shapes map, through the
/// scored shape matches, onto the gt connector's endpoint shapes.
ConnectorCounts connector_counts(const DocumentInput& pred, const ResolvedDocument& pred_resolved,
                                 const DocumentInput& gt, const ResolvedDocument& gt_resolved,
                                 const Matching& matching, const EvalConfig& cfg = {});

ConnectorSlice connector_metrics(std::span<const ConnectorCounts> images);

/// Levenshtein distance over Unicode scalar values of UTF-8 input.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// edit_distance(pred, gt) / max(1, |gt|).
double cer(std::string_view pred, std::string_view gt);

struct EvalImage {
  std::string name;
  DocumentInput pred;
  DocumentInput gt;
};

MetricsReport evaluate(std::span<const EvalImage> images, const EvalConfig& cfg = {}, bool with_cer = false);

std::string report_to_json(const MetricsReport& report, const EvalConfig& cfg);
std::string report_table(const MetricsReport& report);

}  // namespace flowmind

#endif  // FLOWMIND_EVAL_HPP
