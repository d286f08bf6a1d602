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

#include "flowmind/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <json.hpp>

namespace flowmind {

namespace {

using nlohmann::json;

std::optional<double> finite_number(const json& v) {
  if (!v.is_number()) return std::nullopt;
  const double d = v.get<double>();
  if (!std::isfinite(d)) return std::nullopt;
  return d;
}

int image_dimension(const json& image, const char* key) {
  auto it = image.find(key);
  if (it == image.end()) throw MalformedDocument(std::string("image.") + key + " is missing");
  const auto d = finite_number(*it);
  if (!d || *d <= 0 || std::floor(*d) != *d || *d > 1e9) {
    throw MalformedDocument(std::string("image.") + key + " must be a positive integer");
  }
  return static_cast<int>(*d);
}

std::optional<Point2d> parse_point(const json& v) {
  if (!v.is_array() || v.size() != 2) return std::nullopt;
  const auto x = finite_number(v[0]);
  const auto y = finite_number(v[1]);
  if (!x || !y) return std::nullopt;
  return Point2d(*x, *y);
}

std::optional<KeypointPair> parse_keypoints(const json& v) {
  if (!v.is_array() || v.size() != 2) return std::nullopt;
  const auto from = parse_point(v[0]);
  const auto to = parse_point(v[1]);
  if (!from || !to) return std::nullopt;
  return KeypointPair{*from, *to};
}

bool clamp_into(double& v, double hi) {
  const double c = std::clamp(v, 0.0, hi);
  if (c == v) return false;
  v = c;
  return true;
}

bool inside(const Point2d& p, const CornerBoxd& b) {
  return p.x() >= b.x0 && p.x() <= b.x1 && p.y() >= b.y0 && p.y() <= b.y1;
}

ParsedDocument parse(std::string_view bytes, WireMode mode) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw MalformedDocument(std::string("not a valid document: ") + e.what());
  }
  if (!root.is_object()) throw MalformedDocument("top level must be an object");
  auto image = root.find("image");
  if (image == root.end() || !image->is_object()) throw MalformedDocument("missing image object");

  ParsedDocument out;
  DocumentInput& doc = out.document;
  IngestReport& report = out.report;
  doc.image_width = image_dimension(*image, "width");
  doc.image_height = image_dimension(*image, "height");
  if (auto p = image->find("path"); p != image->end()) {
    if (!p->is_string()) throw MalformedDocument("image.path must be a string");
    doc.image_path = p->get<std::string>();
  }

  auto elements = root.find("elements");
  if (elements == root.end() || !elements->is_array()) {
    throw MalformedDocument("missing elements array");
  }

  const double width = doc.image_width;
  const double height = doc.image_height;

  for (std::size_t i = 0; i < elements->size(); ++i) {
    const json& e = (*elements)[i];
    auto reject = [&](std::string reason) { report.rejected.push_back({i, std::move(reason)}); };
    auto warn = [&](std::string msg) { report.warnings.push_back({i, std::move(msg)}); };

    if (!e.is_object()) {
      reject("element is not an object");
      continue;
    }
    auto cls_it = e.find("class");
    if (cls_it == e.end() || !cls_it->is_string()) {
      reject("missing class");
      continue;
    }
    const auto cls = parse_class_name(cls_it->get<std::string>());
    if (!cls) {
      reject("unknown class '" + cls_it->get<std::string>() + "'");
      continue;
    }

    Detection det;
    det.cls = *cls;

    auto bbox_it = e.find("bbox");
    if (bbox_it == e.end() || !bbox_it->is_array() || bbox_it->size() != 4) {
      reject("invalid bbox");
      continue;
    }
    std::array<double, 4> c{};
    bool ok = true;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto v = finite_number((*bbox_it)[k]);
      if (!v) ok = false;
      else c[k] = *v;
    }
    if (!ok) {
      reject("invalid bbox");
      continue;
    }

    auto score_it = e.find("score");
    if (mode == WireMode::detections) {
      const auto s = score_it == e.end() ? std::nullopt : finite_number(*score_it);
      if (!s || *s < 0.0 || *s > 1.0) {
        reject("invalid score");
        continue;
      }
      det.score = *s;
    } else {
      det.score = 1.0;
      if (score_it != e.end()) warn("score ignored in ground truth");
    }

    bool keypoints_ok = true;
    if (auto kp_it = e.find("keypoints"); kp_it != e.end()) {
      det.keypoints = parse_keypoints(*kp_it);
      keypoints_ok = det.keypoints.has_value();
    }
    if (is_connector(det.cls)) {
      if (!keypoints_ok) {
        reject("invalid keypoints");
        continue;
      }
      if (!det.keypoints) {
        reject("connector missing keypoints");
        continue;
      }
    } else if (det.keypoints || !keypoints_ok) {
      det.keypoints.reset();
      warn("keypoints dropped from non-connector element");
    }

    if (auto t = e.find("text"); t != e.end()) {
      if (t->is_string()) det.text = t->get<std::string>();
      else warn("non-string text ignored");
    }

    det.bbox = {std::min(c[0], c[2]), std::min(c[1], c[3]), std::max(c[0], c[2]),
                std::max(c[1], c[3])};
    bool clamped = false;
    clamped |= clamp_into(det.bbox.x0, width);
    clamped |= clamp_into(det.bbox.y0, height);
    clamped |= clamp_into(det.bbox.x1, width);
    clamped |= clamp_into(det.bbox.y1, height);
    if (det.keypoints) {
      for (Point2d* p : {&det.keypoints->from, &det.keypoints->to}) {
        clamped |= clamp_into(p->x(), width);
        clamped |= clamp_into(p->y(), height);
      }
      if (!inside(det.keypoints->from, det.bbox) || !inside(det.keypoints->to, det.bbox)) {
        warn("keypoint outside connector bbox");
      }
    }

    if (!is_connector(det.cls) && !(det.bbox.area() > 0)) {
      reject("zero-area box");
      continue;
    }

    if (clamped) ++report.clamped_count;
    doc.elements.push_back(std::move(det));
  }
  report.accepted_count = doc.elements.size();
  return out;
}

}  // namespace

ParsedDocument parse_detections(std::string_view bytes) { return parse(bytes, WireMode::detections); }

ParsedDocument parse_ground_truth(std::string_view bytes) {
  return parse(bytes, WireMode::ground_truth);
}

std::string serialize_document(const DocumentInput& doc, WireMode mode) {
  using ojson = nlohmann::ordered_json;
  ojson image;
  image["width"] = doc.image_width;
  image["height"] = doc.image_height;
  if (doc.image_path) image["path"] = *doc.image_path;

  ojson elements = ojson::array();
  for (const Detection& d : doc.elements) {
    ojson e;
    e["class"] = std::string(class_name(d.cls));
    if (mode == WireMode::detections) e["score"] = d.score;
    e["bbox"] = {d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1};
    if (d.keypoints) {
      e["keypoints"] = {{d.keypoints->from.x(), d.keypoints->from.y()},
                        {d.keypoints->to.x(), d.keypoints->to.y()}};
    }
    if (d.text) e["text"] = *d.text;
    elements.push_back(std::move(e));
  }

  ojson root;
  root["image"] = std::move(image);
  root["elements"] = std::move(elements);
  return root.dump(1) + "\n";
}

double pixels_to_inches(double pixels, double dpi) {
  if (!(dpi > 0) || !std::isfinite(dpi)) throw NonPositiveDpi("dpi must be positive");
  return pixels / dpi;
}

}  // namespace flowmind
