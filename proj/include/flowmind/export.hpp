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

#ifndef FLOWMIND_EXPORT_HPP
#define FLOWMIND_EXPORT_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowmind/diagram.hpp"

namespace flowmind {

class PackageWriteError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::int64_t kEmuPerInch = 914400;

struct ExportOptions {
  /// Pixel density for the pixel-based formats (SVG, drawio).
  double dpi = 96.0;
};

struct ExportReport {
  std::vector<std::string> warnings;
  std::size_t shapes = 0;
  std::size_t connectors = 0;
  std::size_t texts = 0;
};

struct ExportOutput {
  std::string bytes;
  ExportReport report;
};

ExportOutput export_svg(const DiagramDoc& doc, const ExportOptions& opts = {});
ExportOutput export_drawio(const DiagramDoc& doc, const ExportOptions& opts = {});
ExportOutput export_pptx(const DiagramDoc& doc, const ExportOptions& opts = {});

std::int64_t inches_to_emu(double inches);

/// Label font size in points: half the box height, clamped to [8, 40].
double label_font_points(double box_height_inches);

/// A preset connection site, in bbox-normalized coordinates (0..1, y down).
struct ConnectionSite {
  int index = 0;
  double u = 0.0;
  double v = 0.0;
};

/// Connection sites of the preset geometry each shape class is exported as.
/// rect/roundRect/diamond: 0 top, 1 left, 2 bottom, 3 right.
/// ellipse: counter-clockwise from the top in 45 degree steps.
/// triangle: apex, left edge middle, bottom-left, bottom middle, bottom-right, right edge middle.
/// hexagon: its six vertices counter-clockwise from the right one.
std::span<const ConnectionSite> connection_sites(ElementClass cls);

/// Site whose position on `bbox` is nearest to `p` (ties to the first listed).
int nearest_connection_site(ElementClass cls, const CornerBoxd& bbox, const Point2d& p);

/// OOXML preset geometry name for a shape class.
std::string_view preset_geometry(ElementClass cls);

struct ZipEntry {
  std::string name;
  std::string data;
};

/// Uncompressed ZIP archive with every timestamp pinned to 1980-01-01 00:00.
std::string write_zip(std::span<const ZipEntry> entries);

/// Part names of the generated presentation package, in archive order.
std::vector<std::string> pptx_part_names();

}  // namespace flowmind

#endif  // FLOWMIND_EXPORT_HPP
