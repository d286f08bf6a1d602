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

#include "flowmind/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "flowmind/export.hpp"

namespace flowmind {

namespace {

using ojson = nlohmann::ordered_json;

CornerBoxd scale_box(const CornerBoxd& b, double s) { return {b.x0 * s, b.y0 * s, b.x1 * s, b.y1 * s}; }

Binding scale_binding(const Binding& b, double s) {
  if (const auto* bound = std::get_if<Bound>(&b)) {
    Bound out = *bound;
    out.anchor.position *= s;
    out.distance *= s;
    return out;
  }
  return Free{std::get<Free>(b).position * s};
}

std::optional<std::string> join_labels(const std::vector<const TextBlock*>& blocks) {
  std::optional<std::string> out;
  for (const TextBlock* b : blocks) {
    if (!b->content) continue;
    if (!out) out = *b->content;
    else if (!b->content->empty()) *out += " " + *b->content;
  }
  return out;
}

template <typename T>
void read_key(const ojson& obj, const char* key, T& target) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    target = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidConfig(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_keys(const ojson& obj, std::initializer_list<std::string_view> allowed, const char* section) {
  if (!obj.is_object()) throw InvalidConfig(std::string("config section '") + section + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw InvalidConfig("unknown config key '" + it.key() + "' in '" + section + "'");
    }
  }
}

}  // namespace

void validate(const PipelineConfig& cfg) {
  validate(cfg.nms);
  validate(cfg.layout);
  validate(cfg.eval);
  validate(cfg.recognizer);
  if (!(cfg.connect.max_bind_distance > 0)) throw InvalidConfig("max_bind_distance must be positive");
  if (!(cfg.text.assign_threshold > 0 && cfg.text.assign_threshold <= 1)) {
    throw InvalidConfig("text assign_threshold must lie in (0, 1]");
  }
  if (!(cfg.text.standalone_merge_iou >= 0 && cfg.text.standalone_merge_iou < 1)) {
    throw InvalidConfig("standalone_merge_iou must lie in [0, 1)");
  }
}

PipelineConfig apply_config_json(std::string_view json_text, PipelineConfig base) {
  ojson root;
  try {
    root = ojson::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"nms", "connect", "text", "recognizer", "layout", "eval"}, "top level");
  PipelineConfig cfg = std::move(base);
  if (auto it = root.find("nms"); it != root.end()) {
    check_keys(*it, {"enabled", "iou_threshold", "exempt_text"}, "nms");
    read_key(*it, "enabled", cfg.nms_enabled);
    read_key(*it, "iou_threshold", cfg.nms.iou_threshold);
    read_key(*it, "exempt_text", cfg.nms.exempt_text);
  }
  if (auto it = root.find("connect"); it != root.end()) {
    check_keys(*it, {"max_bind_distance"}, "connect");
    if (auto d = it->find("max_bind_distance"); d != it->end() && d->is_null()) {
      cfg.connect.max_bind_distance = std::numeric_limits<double>::infinity();
    } else {
      read_key(*it, "max_bind_distance", cfg.connect.max_bind_distance);
    }
  }
  if (auto it = root.find("text"); it != root.end()) {
    check_keys(*it, {"criterion", "assign_threshold", "standalone_merge_iou"}, "text");
    if (auto c = it->find("criterion"); c != it->end()) {
      const std::string v = c->is_string() ? c->get<std::string>() : "";
      if (v == "containment") cfg.text.criterion = AssignCriterion::containment;
      else if (v == "iou") cfg.text.criterion = AssignCriterion::iou;
      else throw InvalidConfig("text criterion must be 'containment' or 'iou'");
    }
    read_key(*it, "assign_threshold", cfg.text.assign_threshold);
    read_key(*it, "standalone_merge_iou", cfg.text.standalone_merge_iou);
  }
  if (auto it = root.find("recognizer"); it != root.end()) {
    if (!it->is_string()) throw InvalidConfig("recognizer must be a string");
    cfg.recognizer = parse_recognizer(it->get<std::string>());
  }
  if (auto it = root.find("layout"); it != root.end()) {
    check_keys(*it, {"enabled", "dpi", "stage1_t1", "stage2_t1", "golden_divisor", "kmeans_max_iters", "kmeans_tol"},
               "layout");
    read_key(*it, "enabled", cfg.layout.enabled);
    read_key(*it, "dpi", cfg.layout.dpi);
    read_key(*it, "stage1_t1", cfg.layout.stage1_t1);
    read_key(*it, "stage2_t1", cfg.layout.stage2_t1);
    read_key(*it, "golden_divisor", cfg.layout.golden_divisor);
    read_key(*it, "kmeans_max_iters", cfg.layout.kmeans_max_iters);
    read_key(*it, "kmeans_tol", cfg.layout.kmeans_tol);
  }
  if (auto it = root.find("eval"); it != root.end()) {
    check_keys(*it, {"match_iou", "score_iou", "da_iou", "lenient_unscored", "ordered_arrows"}, "eval");
    read_key(*it, "match_iou", cfg.eval.match_iou);
    read_key(*it, "score_iou", cfg.eval.score_iou);
    read_key(*it, "da_iou", cfg.eval.da_iou);
    read_key(*it, "lenient_unscored", cfg.eval.lenient_unscored);
    read_key(*it, "ordered_arrows", cfg.eval.ordered_arrows);
  }
  validate(cfg);
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  ojson j;
  j["nms"] = {{"enabled", cfg.nms_enabled}, {"iou_threshold", cfg.nms.iou_threshold}, {"exempt_text", cfg.nms.exempt_text}};
  ojson connect;
  if (std::isfinite(cfg.connect.max_bind_distance)) connect["max_bind_distance"] = cfg.connect.max_bind_distance;
  else connect["max_bind_distance"] = nullptr;
  j["connect"] = std::move(connect);
  j["text"] = {{"criterion", cfg.text.criterion == AssignCriterion::containment ? "containment" : "iou"},
               {"assign_threshold", cfg.text.assign_threshold},
               {"standalone_merge_iou", cfg.text.standalone_merge_iou}};
  j["recognizer"] = describe(cfg.recognizer);
  j["layout"] = {{"enabled", cfg.layout.enabled},
                 {"dpi", cfg.layout.dpi},
                 {"stage1_t1", cfg.layout.stage1_t1},
                 {"stage2_t1", cfg.layout.stage2_t1},
                 {"golden_divisor", cfg.layout.golden_divisor},
                 {"kmeans_max_iters", cfg.layout.kmeans_max_iters},
                 {"kmeans_tol", cfg.layout.kmeans_tol}};
  j["eval"] = {{"match_iou", cfg.eval.match_iou},
               {"score_iou", cfg.eval.score_iou},
               {"da_iou", cfg.eval.da_iou},
               {"lenient_unscored", cfg.eval.lenient_unscored},
               {"ordered_arrows", cfg.eval.ordered_arrows}};
  return j.dump(1);
}

ConversionResult convert_document(const DocumentInput& doc, const PipelineConfig& cfg, const IngestReport& ingest) {
  validate(cfg);
  ConversionResult result;
  ConversionReport& report = result.report;
  report.ingest = ingest;

  std::vector<std::size_t> kept;
  if (cfg.nms_enabled) {
    kept = cross_class_nms_indices(doc.elements, cfg.nms);
    std::sort(kept.begin(), kept.end());
  } else {
    kept.resize(doc.elements.size());
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = i;
  }
  report.suppressed = doc.elements.size() - kept.size();

  std::vector<ShapeRef> shapes;
  std::vector<Detection> connectors;
  std::vector<Detection> texts;
  for (std::size_t i : kept) {
    const Detection& d = doc.elements[i];
    if (is_shape(d.cls)) shapes.push_back({ElementId{static_cast<std::uint32_t>(shapes.size())}, d.cls, d.bbox});
    else if (is_connector(d.cls)) connectors.push_back(d);
    else texts.push_back(d);
  }
  const std::vector<ConnectorEdge> edges =
      resolve_connections(shapes, connectors, cfg.connect, ElementId{static_cast<std::uint32_t>(shapes.size())});

  std::vector<TextBlock> blocks = merge_text_boxes(texts, shapes, cfg.text);
  blocks = assign_text(blocks, shapes, edges, cfg.text);
  RecognitionResult recognized = recognize(blocks, cfg.recognizer, doc.image_path);
  blocks = std::move(recognized.blocks);
  report.recognition = std::move(recognized.issues);

  DocumentInput& out = result.detections;
  out.image_width = doc.image_width;
  out.image_height = doc.image_height;
  out.image_path = doc.image_path;
  for (std::size_t i : kept) {
    if (!is_text(doc.elements[i].cls)) out.elements.push_back(doc.elements[i]);
  }
  for (const TextBlock& b : blocks) {
    out.elements.push_back({ElementClass::textblock, b.bbox, b.score, std::nullopt, b.content});
  }

  const double s = 1.0 / cfg.layout.dpi;
  DiagramDoc& diagram = result.assembled;
  diagram.page_width = doc.image_width * s;
  diagram.page_height = doc.image_height * s;
  std::vector<std::vector<const TextBlock*>> shape_labels(shapes.size());
  std::vector<std::vector<const TextBlock*>> edge_labels(edges.size());
  for (const TextBlock& b : blocks) {
    const std::size_t target = b.attachment.target.value;
    if (b.attachment.kind == AttachmentKind::shape) {
      shape_labels[target].push_back(&b);
    } else if (b.attachment.kind == AttachmentKind::connector) {
      edge_labels[target - shapes.size()].push_back(&b);
    } else {
      TextBlock t = b;
      t.bbox = scale_box(b.bbox, s);
      t.fragments.clear();
      diagram.free_texts.push_back(std::move(t));
    }
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    diagram.shapes.push_back(
        {shapes[i].id, shapes[i].cls, corner_to_center(scale_box(shapes[i].bbox, s)), join_labels(shape_labels[i])});
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    ConnectorEdge e = edges[i];
    e.from = scale_binding(e.from, s);
    e.to = scale_binding(e.to, s);
    e.bbox = scale_box(e.bbox, s);
    e.label = join_labels(edge_labels[i]);
    report.free_endpoints += (is_bound(e.from) ? 0 : 1) + (is_bound(e.to) ? 0 : 1);
    diagram.connectors.push_back(std::move(e));
  }
  validate(diagram);

  result.diagram = cfg.layout.enabled ? autotypeset(diagram, cfg.layout) : diagram;

  for (const IngestIssue& r : ingest.rejected) {
    report.warnings.push_back("element " + std::to_string(r.index) + " rejected: " + r.reason);
  }
  for (const IngestIssue& w : ingest.warnings) {
    report.warnings.push_back("element " + std::to_string(w.index) + ": " + w.reason);
  }
  if (report.free_endpoints > 0) {
    report.warnings.push_back(std::to_string(report.free_endpoints) + " connector endpoint(s) left free");
  }
  for (const ConnectorEdge& e : diagram.connectors) {
    const auto a = bound_shape(e.from);
    if (a && a == bound_shape(e.to)) {
      report.warnings.push_back("connector " + std::to_string(e.id.value) + ": self-loop on shape " +
                                std::to_string(a->value));
    }
  }
  for (const RecognitionIssue& r : report.recognition) {
    report.warnings.push_back("text block " + std::to_string(r.block) + ": " + r.message);
  }
  return result;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ParsedDocument load_document(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (path.extension() == ".gt") return parse_ground_truth(bytes);
  return parse_detections(bytes);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputWriteError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw OutputWriteError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw OutputWriteError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

OutputFormat output_format_for(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".svg") return OutputFormat::svg;
  if (ext == ".drawio") return OutputFormat::drawio;
  if (ext == ".pptx") return OutputFormat::pptx;
  if (ext == ".det") return OutputFormat::detections;
  if (ext == ".json") return OutputFormat::diagram;
  throw InvalidConfig("unsupported output extension '" + ext + "' (use .svg, .drawio, .pptx, .det or .json)");
}

std::string extension_for(OutputFormat format) {
  switch (format) {
    case OutputFormat::svg: return ".svg";
    case OutputFormat::drawio: return ".drawio";
    case OutputFormat::pptx: return ".pptx";
    case OutputFormat::detections: return ".det";
    case OutputFormat::diagram: return ".json";
  }
  return {};
}

std::string render_diagram(const DiagramDoc& doc, OutputFormat format, double dpi) {
  const ExportOptions opts{dpi};
  switch (format) {
    case OutputFormat::svg: return export_svg(doc, opts).bytes;
    case OutputFormat::drawio: return export_drawio(doc, opts).bytes;
    case OutputFormat::pptx: return export_pptx(doc, opts).bytes;
    case OutputFormat::diagram: return diagram_to_json(doc);
    case OutputFormat::detections: break;
  }
  throw InvalidConfig("the detections format needs a conversion result");
}

std::string render_output(const ConversionResult& result, OutputFormat format, double dpi) {
  if (format == OutputFormat::detections) return serialize_document(result.detections, WireMode::detections);
  return render_diagram(result.diagram, format, dpi);
}

std::string conversion_report_json(const ConversionReport& report, const PipelineConfig& cfg, std::string_view source) {
  ojson j;
  j["source"] = std::string(source);
  j["config"] = ojson::parse(pipeline_config_to_json(cfg));
  j["accepted"] = report.ingest.accepted_count;
  j["clamped"] = report.ingest.clamped_count;
  ojson rejected = ojson::array();
  for (const IngestIssue& r : report.ingest.rejected) rejected.push_back({{"index", r.index}, {"reason", r.reason}});
  j["rejected"] = std::move(rejected);
  j["suppressed"] = report.suppressed;
  j["free_endpoints"] = report.free_endpoints;
  ojson recognition = ojson::array();
  for (const RecognitionIssue& r : report.recognition) {
    recognition.push_back({{"block", r.block}, {"message", r.message}});
  }
  j["recognition_issues"] = std::move(recognition);
  j["warnings"] = report.warnings;
  return j.dump(1) + "\n";
}

}  // namespace flowmind
