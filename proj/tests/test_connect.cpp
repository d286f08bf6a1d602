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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "flowmind/connect.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace flowmind;
using namespace flowmind::testing;

namespace {

}  // namespace

TEST_CASE("standard outlines match the tabled vertex cycles") {
  const auto rect = standard_shape_outline(ElementClass::rectangle, {0, 0, 10, 6});
  CHECK(rect.polygon);
  CHECK(rect.points == std::vector<Point2d>{{0, 0}, {10, 0}, {10, 6}, {0, 6}});

  const auto diamond = standard_shape_outline(ElementClass::diamond, {0, 0, 8, 4});
  CHECK(diamond.points == std::vector<Point2d>{{4, 0}, {8, 2}, {4, 4}, {0, 2}});

  const auto circle = standard_shape_outline(ElementClass::circle, {0, 0, 10, 10});
  CHECK_FALSE(circle.polygon);
  REQUIRE(circle.points.size() == 8);
  CHECK(circle.points[0] == Point2d(5, 0));
  CHECK(circle.points[3] == Point2d(10, 5));
  CHECK(circle.points[6].x() == doctest::Approx(8.5355).epsilon(1e-4));
  CHECK(circle.points[6].y() == doctest::Approx(1.4645).epsilon(1e-4));

  CHECK_THROWS_AS(standard_shape_outline(ElementClass::arrow, {0, 0, 1, 1}), NotAShape);
  CHECK_THROWS_AS(keypoint_to_shape_distance(Point2d(0, 0), ElementClass::textblock, {0, 0, 1, 1}), NotAShape);
}

TEST_CASE("outlines agree with the independent table for every class") {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const CornerBoxd b = rng.box(100, 1, 50);
    for (ElementClass c : shape_classes()) {
      const auto lib = standard_shape_outline(c, b);
      const auto ref = oracle_outline(c, b);
      REQUIRE(lib.polygon == ref.polygon);
      REQUIRE(lib.points.size() == ref.pts.size());
      for (std::size_t k = 0; k < ref.pts.size(); ++k) CHECK((lib.points[k] - ref.pts[k]).norm() < 1e-12);
    }
  }
}

TEST_CASE("tabled keypoint distances") {
  const auto r = keypoint_to_shape_distance(Point2d(12, 5), ElementClass::rectangle, {0, 0, 10, 10});
  CHECK(r.distance == 2.0);
  CHECK(r.position == Point2d(10, 5));
  CHECK(r.site_index == 1);

  const auto t = keypoint_to_shape_distance(Point2d(13, 14), ElementClass::triangle, {0, 0, 10, 10});
  CHECK(t.distance == 5.0);
  CHECK(t.position == Point2d(10, 10));

  const auto c = keypoint_to_shape_distance(Point2d(5, -2), ElementClass::circle, {0, 0, 10, 10});
  CHECK(c.distance == 2.0);
  CHECK(c.site_index == 0);
  CHECK(c.position == Point2d(5, 0));
}

TEST_CASE("foot outside the edge falls back to the endpoint") {
  // The bottom edge's supporting line passes 2 px from the point, but its foot
  // lies beyond the segment, so the vertex distance applies.
  const auto t = keypoint_to_shape_distance(Point2d(20, 12), ElementClass::triangle, {0, 0, 10, 10});
  CHECK(t.distance == doctest::Approx(std::sqrt(104.0)));
  CHECK(t.position == Point2d(10, 10));

  // Corner region of a rectangle: both adjacent edges project off-segment.
  const auto r = keypoint_to_shape_distance(Point2d(15, -5), ElementClass::rectangle, {0, 0, 10, 10});
  CHECK(r.distance == doctest::Approx(std::sqrt(50.0)));
  CHECK(r.position == Point2d(10, 0));
}

TEST_CASE("an edge extension does not attract a keypoint away from the nearer shape") {
  const std::vector<ShapeRef> shapes = {{ElementId{0}, ElementClass::rectangle, {0, 0, 10, 10}},
                                        {ElementId{1}, ElementClass::rectangle, {35, 0, 45, 20}}};
  const Binding b = bind_keypoint(Point2d(30, 10.5), shapes);
  REQUIRE(is_bound(b));
  CHECK(bound_shape(b) == ElementId{1});
  CHECK(std::get<Bound>(b).distance == 5.0);
}

TEST_CASE("curves bind only to their candidate points") {
  // (10,5) on the circle is the Right candidate; (8.9,8.9) lies near the curve
  // but between candidates, so it snaps to Bottom-right.
  const auto a = keypoint_to_shape_distance(Point2d(8.9, 8.9), ElementClass::circle, {0, 0, 10, 10});
  CHECK(a.site_index == 7);
  const auto o = keypoint_to_shape_distance(Point2d(20, 5), ElementClass::long_oval, {0, 0, 30, 10});
  // Up and Down are equidistant; the lower site wins.
  CHECK(o.site_index == 0);
  CHECK(o.position == Point2d(15, 0));
}

TEST_CASE("tabled resolution cases") {
  const std::vector<ShapeRef> shapes = {{ElementId{0}, ElementClass::rectangle, {0, 0, 10, 10}},
                                        {ElementId{1}, ElementClass::circle, {20, 0, 30, 10}}};
  Detection arrow{ElementClass::arrow, {11, 5, 19, 5}, 1.0, KeypointPair{{11, 5}, {19, 5}}, std::nullopt};
  const auto edges = resolve_connections(shapes, std::vector<Detection>{arrow}, {}, ElementId{7});
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].id == ElementId{7});
  CHECK(edges[0].kind == ElementClass::arrow);
  CHECK(bound_shape(edges[0].from) == ElementId{0});
  CHECK(binding_position(edges[0].from) == Point2d(10, 5));
  CHECK(bound_shape(edges[0].to) == ElementId{1});
  CHECK(binding_position(edges[0].to) == Point2d(20, 5));

  const auto loose = resolve_connections({}, std::vector<Detection>{arrow});
  CHECK_FALSE(is_bound(loose[0].from));
  CHECK(binding_position(loose[0].to) == Point2d(19, 5));

  Detection loop{ElementClass::line, {0, 0, 10, 12}, 1.0, KeypointPair{{5, -1}, {5, 11}}, std::nullopt};
  const auto self = resolve_connections(shapes, std::vector<Detection>{loop});
  CHECK(bound_shape(self[0].from) == ElementId{0});
  CHECK(bound_shape(self[0].to) == ElementId{0});
  CHECK(std::get<Bound>(self[0].from).anchor.site_index != std::get<Bound>(self[0].to).anchor.site_index);
}

TEST_CASE("max bind distance leaves far keypoints free") {
  const std::vector<ShapeRef> shapes = {{ElementId{0}, ElementClass::rectangle, {0, 0, 10, 10}}};
  CHECK(is_bound(bind_keypoint(Point2d(13, 5), shapes, {5.0})));
  CHECK_FALSE(is_bound(bind_keypoint(Point2d(16, 5), shapes, {5.0})));
}

TEST_CASE("resolution equals the exhaustive oracle on random instances") {
  Rng rng(22);
  std::size_t checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng);
    const auto edges = resolve_connections(in.shapes, in.connectors);
    REQUIRE(edges.size() == in.connectors.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const KeypointPair& k = *in.connectors[i].keypoints;
      const double inf = std::numeric_limits<double>::infinity();
      REQUIRE(agrees(edges[i].from, oracle_bind(k.from, in.shapes, inf)));
      REQUIRE(agrees(edges[i].to, oracle_bind(k.to, in.shapes, inf)));
      checked += 2;
    }
  }
  CHECK(checked > 5000);
}

TEST_CASE("bound anchors lie on the outline and never beat a vertex") {
  Rng rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const ElementClass c = rng.pick(shape_classes());
    const CornerBoxd b = rng.box(100, 2, 60);
    const Point2d p(rng.uniform(-30, 130), rng.uniform(-30, 130));
    const NearestAnchor a = keypoint_to_shape_distance(p, c, b);
    CHECK(a.distance >= 0.0);
    CHECK((anchor_position(c, b, a.site_index, a.edge_t) - a.position).norm() < 1e-9);
    const OracleOutline o = oracle_outline(c, b);
    if (o.polygon) {
      for (const Point2d& v : o.pts) CHECK(a.distance <= (p - v).norm() + 1e-12);
      const Point2d& u = o.pts[static_cast<std::size_t>(a.site_index)];
      const Point2d& v = o.pts[(static_cast<std::size_t>(a.site_index) + 1) % o.pts.size()];
      Point2d foot;
      CHECK(oracle_segment(a.position, u, v, &foot) < 1e-9);
    } else {
      CHECK((a.position - o.pts[static_cast<std::size_t>(a.site_index)]).norm() == 0.0);
    }
  }
}

TEST_CASE("binding is equivariant under translation and uniform scaling") {
  Rng rng(24);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance in = random_instance(rng);
    if (in.shapes.empty()) continue;
    const double s = 4.0;
    const Point2d shift(64.0, -32.0);
    Instance moved = in;
    for (ShapeRef& sh : moved.shapes) {
      sh.bbox = {sh.bbox.x0 * s + shift.x(), sh.bbox.y0 * s + shift.y(), sh.bbox.x1 * s + shift.x(),
                 sh.bbox.y1 * s + shift.y()};
    }
    for (Detection& d : moved.connectors) {
      d.keypoints->from = d.keypoints->from * s + shift;
      d.keypoints->to = d.keypoints->to * s + shift;
    }
    const auto a = resolve_connections(in.shapes, in.connectors);
    const auto b = resolve_connections(moved.shapes, moved.connectors);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (auto [x, y] : {std::pair{&a[i].from, &b[i].from}, std::pair{&a[i].to, &b[i].to}}) {
        const auto& bx = std::get<Bound>(*x);
        const auto& by = std::get<Bound>(*y);
        CHECK(bx.anchor.shape_id == by.anchor.shape_id);
        CHECK(bx.anchor.site_index == by.anchor.site_index);
        CHECK((bx.anchor.position * s + shift - by.anchor.position).norm() < 1e-6);
      }
    }
  }
}
