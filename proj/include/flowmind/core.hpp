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

#ifndef FLOWMIND_CORE_HPP
#define FLOWMIND_CORE_HPP

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace flowmind {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotAShape : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Element taxonomy
// ---------------------------------------------------------------------------

enum class ElementClass : std::uint8_t {
  circle,
  diamond,
  hexagon,
  long_oval,
  parallelogram,
  rectangle,
  trapezoid,
  triangle,
  textblock,
  arrow,
  double_arrow,
  line,
};

inline constexpr std::size_t kElementClassCount = 12;

inline constexpr std::array<ElementClass, kElementClassCount> kAllClasses = {
    ElementClass::circle,       ElementClass::diamond,   ElementClass::hexagon,
    ElementClass::long_oval,    ElementClass::parallelogram,
    ElementClass::rectangle,    ElementClass::trapezoid, ElementClass::triangle,
    ElementClass::textblock,    ElementClass::arrow,     ElementClass::double_arrow,
    ElementClass::line,
};

constexpr bool is_connector(ElementClass c) {
  return c == ElementClass::arrow || c == ElementClass::double_arrow || c == ElementClass::line;
}

constexpr bool is_text(ElementClass c) { return c == ElementClass::textblock; }

constexpr bool is_shape(ElementClass c) { return !is_connector(c) && !is_text(c); }

/// Shapes whose outline is a polygon; circle and long_oval use candidate points instead.
constexpr bool is_polygon(ElementClass c) {
  return is_shape(c) && c != ElementClass::circle && c != ElementClass::long_oval;
}

constexpr std::size_t class_index(ElementClass c) { return static_cast<std::size_t>(c); }

/// Canonical wire name ("double_arrow", "long_oval", ...).
std::string_view class_name(ElementClass c);

/// Case-insensitive lookup; '_', '-' and ' ' are interchangeable.
std::optional<ElementClass> parse_class_name(std::string_view name);

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Identifier shared by shapes and connectors of one diagram.
struct ElementId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(ElementId, ElementId) = default;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2d = Point2<double>;

/// Axis-aligned box by corners. Pixel convention: origin top-left, y downward.
template <typename Scalar>
struct CornerBox {
  Scalar x0{}, y0{}, x1{}, y1{};

  Scalar width() const { return x1 - x0; }
  Scalar height() const { return y1 - y0; }
  Scalar area() const { return width() * height(); }
  Point2<Scalar> center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }

  bool valid() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1) &&
           x0 <= x1 && y0 <= y1;
  }

  bool operator==(const CornerBox&) const = default;
};

/// Axis-aligned box by center and extent.
template <typename Scalar>
struct CenterBox {
  Scalar xc{}, yc{}, w{}, h{};

  bool valid() const {
    return std::isfinite(xc) && std::isfinite(yc) && std::isfinite(w) && std::isfinite(h) &&
           w >= 0 && h >= 0;
  }

  bool operator==(const CenterBox&) const = default;
};

using CornerBoxd = CornerBox<double>;
using CenterBoxd = CenterBox<double>;

template <typename Scalar>
CenterBox<Scalar> corner_to_center(const CornerBox<Scalar>& b) {
  using std::abs;
  return {abs(b.x0 + b.x1) / 2, abs(b.y0 + b.y1) / 2, abs(b.x0 - b.x1), abs(b.y0 - b.y1)};
}

// Exact inverse of corner_to_center on dyadic (pixel or sub-pixel grid) coordinates.
template <typename Scalar>
CornerBox<Scalar> center_to_corner(const CenterBox<Scalar>& c) {
  return {c.xc - c.w / 2, c.yc - c.h / 2, c.xc + c.w / 2, c.yc + c.h / 2};
}

/// Intersection of two boxes; empty intersections collapse to a zero-area box.
template <typename Scalar>
CornerBox<Scalar> intersection(const CornerBox<Scalar>& a, const CornerBox<Scalar>& b) {
  using std::max;
  using std::min;
  CornerBox<Scalar> r{max(a.x0, b.x0), max(a.y0, b.y0), min(a.x1, b.x1), min(a.y1, b.y1)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

/// Smallest box covering both.
template <typename Scalar>
CornerBox<Scalar> union_box(const CornerBox<Scalar>& a, const CornerBox<Scalar>& b) {
  using std::max;
  using std::min;
  return {min(a.x0, b.x0), min(a.y0, b.y0), max(a.x1, b.x1), max(a.y1, b.y1)};
}

template <typename Scalar>
Scalar intersection_area(const CornerBox<Scalar>& a, const CornerBox<Scalar>& b) {
  return intersection(a, b).area();
}

/// Intersection over union; 0 when the union has no area.
template <typename Scalar>
Scalar iou(const CornerBox<Scalar>& a, const CornerBox<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  const Scalar uni = a.area() + b.area() - inter;
  if (!(uni > 0)) return Scalar(0);
  Scalar r = inter / uni;
  return r > Scalar(1) ? Scalar(1) : r;
}

/// Area of `inner` that lies inside `outer`, relative to the area of `inner`.
template <typename Scalar>
Scalar containment(const CornerBox<Scalar>& inner, const CornerBox<Scalar>& outer) {
  const Scalar a = inner.area();
  if (!(a > 0)) return Scalar(0);
  return intersection_area(inner, outer) / a;
}

template <typename Scalar>
struct SegmentDistance {
  Scalar distance{};
  bool foot_on_segment = false;
  /// Parameter along the segment of the nearest point, in [0, 1].
  Scalar t{};
  Point2<Scalar> nearest;
};

/// Distance from `p` to segment ab. When the perpendicular foot falls outside the
/// segment the nearer endpoint is used instead.
template <typename Scalar>
SegmentDistance<Scalar> point_segment_distance(const Point2<Scalar>& p, const Point2<Scalar>& a,
                                               const Point2<Scalar>& b) {
  const Point2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (!(len2 > 0)) return {(p - a).norm(), false, Scalar(0), a};

  const Scalar t = (p - a).dot(ab) / len2;
  if (t >= 0 && t <= 1) {
    // |cross| / |ab| keeps the perpendicular distance exact for axis-aligned edges.
    const Point2<Scalar> ap = p - a;
    using std::abs;
    using std::sqrt;
    const Scalar cross = ab.x() * ap.y() - ab.y() * ap.x();
    const Scalar d = abs(cross) / sqrt(len2);
    return {d, true, t, a + t * ab};
  }
  const Scalar da = (p - a).norm();
  const Scalar db = (p - b).norm();
  if (da <= db) return {da, false, Scalar(0), a};
  return {db, false, Scalar(1), b};
}

// ---------------------------------------------------------------------------
// Detections
// ---------------------------------------------------------------------------

/// Connector endpoints. For arrows `from` is the tail and `to` the head; line and
/// double_arrow keep input order but are orientation-free.
struct KeypointPair {
  Point2d from = Point2d::Zero();
  Point2d to = Point2d::Zero();

  bool operator==(const KeypointPair& o) const { return from == o.from && to == o.to; }
};

struct Detection {
  ElementClass cls = ElementClass::rectangle;
  CornerBoxd bbox;
  double score = 1.0;
  std::optional<KeypointPair> keypoints;
  std::optional<std::string> text;

  bool operator==(const Detection&) const = default;
};

}  // namespace flowmind

#endif  // FLOWMIND_CORE_HPP
