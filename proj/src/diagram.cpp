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

#include "flowmind/diagram.hpp"

#include <set>

#include <json.hpp>

namespace flowmind {

namespace {

using ojson = nlohmann::ordered_json;

ojson point_json(const Point2d& p) { return ojson::array({p.x(), p.y()}); }

Point2d point_from(const ojson& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

ojson box_json(const CornerBoxd& b) { return ojson::array({b.x0, b.y0, b.x1, b.y1}); }

CornerBoxd box_from(const ojson& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

ojson binding_json(const Binding& b) {
  ojson j;
  if (const auto* bound = std::get_if<Bound>(&b)) {
    j["shape"] = bound->anchor.shape_id.value;
    j["site"] = bound->anchor.site_index;
    j["t"] = bound->anchor.edge_t;
    j["position"] = point_json(bound->anchor.position);
    j["distance"] = bound->distance;
  } else {
    j["position"] = point_json(std::get<Free>(b).position);
  }
  return j;
}

Binding binding_from(const ojson& j) {
  if (j.contains("shape")) {
    Bound b;
    b.anchor.shape_id = ElementId{j.at("shape").get<std::uint32_t>()};
    b.anchor.site_index = j.at("site").get<int>();
    b.anchor.edge_t = j.at("t").get<double>();
    b.anchor.position = point_from(j.at("position"));
    b.distance = j.at("distance").get<double>();
    return b;
  }
  return Free{point_from(j.at("position"))};
}

const char* attachment_name(AttachmentKind k) {
  switch (k) {
    case AttachmentKind::shape:
      return "shape";
    case AttachmentKind::connector:
      return "connector";
    case AttachmentKind::standalone:
      break;
  }
  return "standalone";
}

ElementClass class_from(const ojson& j) {
  const auto cls = parse_class_name(j.get<std::string>());
  if (!cls) throw Error("unknown class in diagram: " + j.get<std::string>());
  return *cls;
}

}  // namespace

const ShapeNode* DiagramDoc::find_shape(ElementId id) const {
  for (const ShapeNode& s : shapes) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void validate(const DiagramDoc& doc) {
  std::set<ElementId> ids;
  for (const ShapeNode& s : doc.shapes) {
    if (!is_shape(s.cls)) throw Error("diagram shape has a non-shape class");
    if (!ids.insert(s.id).second) throw Error("duplicate element id " + std::to_string(s.id.value));
    if (s.box.xc < 0 || s.box.xc > doc.page_width || s.box.yc < 0 || s.box.yc > doc.page_height) {
      throw Error("shape " + std::to_string(s.id.value) + " center lies off the page");
    }
  }
  for (const ConnectorEdge& c : doc.connectors) {
    if (!is_connector(c.kind)) throw Error("diagram connector has a non-connector class");
    if (!ids.insert(c.id).second) throw Error("duplicate element id " + std::to_string(c.id.value));
    for (const Binding* b : {&c.from, &c.to}) {
      if (auto id = bound_shape(*b); id && doc.find_shape(*id) == nullptr) {
        throw Error("connector " + std::to_string(c.id.value) + " binds a missing shape");
      }
    }
  }
}

std::string diagram_to_json(const DiagramDoc& doc) {
  ojson root;
  root["page"] = ojson::array({doc.page_width, doc.page_height});
  ojson shapes = ojson::array();
  for (const ShapeNode& s : doc.shapes) {
    ojson j;
    j["id"] = s.id.value;
    j["class"] = std::string(class_name(s.cls));
    j["center"] = ojson::array({s.box.xc, s.box.yc});
    j["size"] = ojson::array({s.box.w, s.box.h});
    if (s.label) j["label"] = *s.label;
    shapes.push_back(std::move(j));
  }
  root["shapes"] = std::move(shapes);

  ojson connectors = ojson::array();
  for (const ConnectorEdge& c : doc.connectors) {
    ojson j;
    j["id"] = c.id.value;
    j["class"] = std::string(class_name(c.kind));
    j["bbox"] = box_json(c.bbox);
    j["from"] = binding_json(c.from);
    j["to"] = binding_json(c.to);
    if (c.label) j["label"] = *c.label;
    connectors.push_back(std::move(j));
  }
  root["connectors"] = std::move(connectors);

  ojson texts = ojson::array();
  for (const TextBlock& t : doc.free_texts) {
    ojson j;
    j["bbox"] = box_json(t.bbox);
    if (t.content) j["content"] = *t.content;
    if (t.confidence) j["confidence"] = *t.confidence;
    j["attachment"] = attachment_name(t.attachment.kind);
    if (t.attachment.kind != AttachmentKind::standalone) j["target"] = t.attachment.target.value;
    j["score"] = t.score;
    texts.push_back(std::move(j));
  }
  root["free_texts"] = std::move(texts);
  return root.dump(1) + "\n";
}

DiagramDoc diagram_from_json(std::string_view text) {
  DiagramDoc doc;
  try {
    const ojson root = ojson::parse(text.begin(), text.end());
    doc.page_width = root.at("page").at(0).get<double>();
    doc.page_height = root.at("page").at(1).get<double>();
    for (const ojson& j : root.at("shapes")) {
      ShapeNode s;
      s.id = ElementId{j.at("id").get<std::uint32_t>()};
      s.cls = class_from(j.at("class"));
      s.box = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>(),
               j.at("size").at(0).get<double>(), j.at("size").at(1).get<double>()};
      if (j.contains("label")) s.label = j.at("label").get<std::string>();
      doc.shapes.push_back(std::move(s));
    }
    for (const ojson& j : root.at("connectors")) {
      ConnectorEdge c;
      c.id = ElementId{j.at("id").get<std::uint32_t>()};
      c.kind = class_from(j.at("class"));
      c.bbox = box_from(j.at("bbox"));
      c.from = binding_from(j.at("from"));
      c.to = binding_from(j.at("to"));
      if (j.contains("label")) c.label = j.at("label").get<std::string>();
      doc.connectors.push_back(std::move(c));
    }
    for (const ojson& j : root.at("free_texts")) {
      TextBlock t;
      t.bbox = box_from(j.at("bbox"));
      if (j.contains("content")) t.content = j.at("content").get<std::string>();
      if (j.contains("confidence")) t.confidence = j.at("confidence").get<double>();
      const std::string kind = j.value("attachment", "standalone");
      if (kind == "shape") t.attachment.kind = AttachmentKind::shape;
      else if (kind == "connector") t.attachment.kind = AttachmentKind::connector;
      if (j.contains("target")) t.attachment.target = ElementId{j.at("target").get<std::uint32_t>()};
      t.score = j.value("score", 1.0);
      doc.free_texts.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed diagram document: ") + e.what());
  }
  validate(doc);
  return doc;
}

}  // namespace flowmind
