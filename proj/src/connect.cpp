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

#include "flowmind/connect.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace flowmind {

namespace {

constexpr double kDiag = std::numbers::sqrt2 / 2.0;

bool within_tie(double d, double best) { return d <= best + kTieTolerance * std::max(1.0, best); }

std::vector<Point2d> curve_candidates(ElementClass cls, const CornerBoxd& b) {
  const double cx = (b.x0 + b.x1) / 2;
  const double cy = (b.y0 + b.y1) / 2;
  std::vector<Point2d> pts = {{cx, b.y0}, {cx, b.y1}, {b.x0, cy}, {b.x1, cy}};

  if (cls == ElementClass::circle) {
    const double rx = b.width() / 2;
    const double ry = b.height() / 2;
    pts.emplace_back(cx - rx * kDiag, cy - ry * kDiag);
    pts.emplace_back(cx - rx * kDiag, cy + ry * kDiag);
    pts.emplace_back(cx + rx * kDiag, cy - ry * kDiag);
    pts.emplace_back(cx + rx * kDiag, cy + ry * kDiag);
    return pts;
  }

  // Stadium: semicircular caps on the short axis, 45 degree points on the caps.
  if (b.width() >= b.height()) {
    const double r = b.height() / 2;
    const double left = b.x0 + r;
    const double right = b.x1 - r;
    pts.emplace_back(left - r * kDiag, cy - r * kDiag);
    pts.emplace_back(left - r * kDiag, cy + r * kDiag);
    pts.emplace_back(right + r * kDiag, cy - r * kDiag);
    pts.emplace_back(right + r * kDiag, cy + r * kDiag);
  } else {
    const double r = b.width() / 2;
    const double top = b.y0 + r;
    const double bottom = b.y1 - r;
    pts.emplace_back(cx - r * kDiag, top - r * kDiag);
    pts.emplace_back(cx - r * kDiag, bottom + r * kDiag);
    pts.emplace_back(cx + r * kDiag, top - r * kDiag);
    pts.emplace_back(cx + r * kDiag, bottom + r * kDiag);
  }
  return pts;
}

std::vector<Point2d> polygon_vertices(ElementClass cls, const CornerBoxd& b) {
  const double w = b.width();
  const double cx = (b.x0 + b.x1) / 2;
  const double cy = (b.y0 + b.y1) / 2;
  switch (cls) {
    case ElementClass::rectangle:
      return {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    case ElementClass::diamond:
      return {{cx, b.y0}, {b.x1, cy}, {cx, b.y1}, {b.x0, cy}};
    case ElementClass::triangle:
      return {{cx, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    case ElementClass::parallelogram: {
      const double s = kParallelogramShift * w;
      return {{b.x0 + s, b.y0}, {b.x1, b.y0}, {b.x1 - s, b.y1}, {b.x0, b.y1}};
    }
    case ElementClass::trapezoid: {
      const double s = kTrapezoidInset * w;
      return {{b.x0 + s, b.y0}, {b.x1 - s, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    }
    case ElementClass::hexagon: {
      const double s = kHexagonInset * w;
      return {{b.x0 + s, b.y0}, {b.x1 - s, b.y0}, {b.x1, cy},
              {b.x1 - s, b.y1}, {b.x0 + s, b.y1}, {b.x0, cy}};
    }
    default:
      break;
  }
  throw NotAShape(std::string(class_name(cls)) + " has no polygon outline");
}

void require_shape(ElementClass cls) {
  if (!is_shape(cls)) throw NotAShape(std::string(class_name(cls)) + " is not a shape");
}

}  // namespace

ShapeOutline standard_shape_outline(ElementClass cls, const CornerBoxd& bbox) {
  require_shape(cls);
  if (is_polygon(cls)) return {true, polygon_vertices(cls, bbox)};
  return {false, curve_candidates(cls, bbox)};
}

Point2d anchor_position(ElementClass cls, const CornerBoxd& bbox, int site_index, double edge_t) {
  const ShapeOutline outline = standard_shape_outline(cls, bbox);
  const auto n = static_cast<int>(outline.points.size());
  if (site_index < 0 || site_index >= n) throw Error("anchor site index out of range");
  if (!outline.polygon) return outline.points[site_index];
  const Point2d& a = outline.points[site_index];
  const Point2d& b = outline.points[(site_index + 1) % n];
  if (edge_t == 0.0) return a;
  if (edge_t == 1.0) return b;
  return a + edge_t * (b - a);
}

NearestAnchor keypoint_to_shape_distance(const Point2d& p, ElementClass cls,
                                         const CornerBoxd& bbox) {
  const ShapeOutline outline = standard_shape_outline(cls, bbox);
  const auto n = static_cast<int>(outline.points.size());
  std::vector<NearestAnchor> sites;
  sites.reserve(outline.points.size());
  for (int i = 0; i < n; ++i) {
    if (outline.polygon) {
      const auto seg = point_segment_distance(p, outline.points[i], outline.points[(i + 1) % n]);
      sites.push_back({seg.distance, i, seg.t, seg.nearest});
    } else {
      sites.push_back({(p - outline.points[i]).norm(), i, 0.0, outline.points[i]});
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const NearestAnchor& a : sites) best = std::min(best, a.distance);
  for (const NearestAnchor& a : sites) {
    if (within_tie(a.distance, best)) return a;
  }
  return {};
}

Point2d binding_position(const Binding& b) {
  if (const auto* bound = std::get_if<Bound>(&b)) return bound->anchor.position;
  return std::get<Free>(b).position;
}

Binding bind_keypoint(const Point2d& p, std::span<const ShapeRef> shapes, const ConnectConfig& cfg) {
  std::vector<NearestAnchor> nearest;
  nearest.reserve(shapes.size());
  double best = std::numeric_limits<double>::infinity();
  for (const ShapeRef& s : shapes) {
    nearest.push_back(keypoint_to_shape_distance(p, s.cls, s.bbox));
    best = std::min(best, nearest.back().distance);
  }
  const ShapeRef* chosen = nullptr;
  const NearestAnchor* anchor = nullptr;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!within_tie(nearest[i].distance, best)) continue;
    if (chosen == nullptr || shapes[i].id < chosen->id) {
      chosen = &shapes[i];
      anchor = &nearest[i];
    }
  }
  if (chosen == nullptr || anchor->distance > cfg.max_bind_distance) return Free{p};
  return Bound{AnchorPoint{chosen->id, anchor->site_index, anchor->edge_t, anchor->position}, anchor->distance};
}

std::vector<ConnectorEdge> resolve_connections(std::span<const ShapeRef> shapes,
                                               std::span<const Detection> connectors,
                                               const ConnectConfig& cfg, ElementId first_id) {
  std::vector<ConnectorEdge> edges;
  edges.reserve(connectors.size());
  for (std::size_t i = 0; i < connectors.size(); ++i) {
    const Detection& c = connectors[i];
    if (!is_connector(c.cls) || !c.keypoints) {
      throw Error("resolve_connections requires connector detections with keypoints");
    }
    ConnectorEdge edge;
    edge.id = ElementId{first_id.value + static_cast<std::uint32_t>(i)};
    edge.kind = c.cls;
    edge.from = bind_keypoint(c.keypoints->from, shapes, cfg);
    edge.to = bind_keypoint(c.keypoints->to, shapes, cfg);
    edge.bbox = c.bbox;
    edges.push_back(std::move(edge));
  }
  return edges;
}

}  // namespace flowmind
