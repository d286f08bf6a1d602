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

#include "flowmind/export.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include <zlib.h>

namespace flowmind {

namespace {

struct Palette {
  const char* fill;
  const char* stroke;
};

// Indexed by class_index(); connectors and text use the trailing defaults.
constexpr std::array<Palette, kElementClassCount> kPalette = {{
    {"D5E8D4", "82B366"},  // circle
    {"FFF2CC", "D6B656"},  // diamond
    {"E1D5E7", "9673A6"},  // hexagon
    {"F8CECC", "B85450"},  // long_oval
    {"FFE6CC", "D79B00"},  // parallelogram
    {"DAE8FC", "6C8EBF"},  // rectangle
    {"F5F5F5", "666666"},  // trapezoid
    {"D0CEE2", "56517E"},  // triangle
    {"FFFFFF", "000000"},  // textblock
    {"FFFFFF", "333333"},  // arrow
    {"FFFFFF", "333333"},  // double_arrow
    {"FFFFFF", "333333"},  // line
}};

constexpr double kD = 0.5 - 0.5 * std::numbers::sqrt2 / 2.0;

constexpr std::array<ConnectionSite, 4> kFourSites = {{{0, 0.5, 0.0}, {1, 0.0, 0.5}, {2, 0.5, 1.0}, {3, 1.0, 0.5}}};
constexpr std::array<ConnectionSite, 8> kEllipseSites = {{{0, 0.5, 0.0},
                                                          {1, kD, kD},
                                                          {2, 0.0, 0.5},
                                                          {3, kD, 1.0 - kD},
                                                          {4, 0.5, 1.0},
                                                          {5, 1.0 - kD, 1.0 - kD},
                                                          {6, 1.0, 0.5},
                                                          {7, 1.0 - kD, kD}}};
constexpr std::array<ConnectionSite, 6> kTriangleSites = {
    {{0, 0.5, 0.0}, {1, 0.25, 0.5}, {2, 0.0, 1.0}, {3, 0.5, 1.0}, {4, 1.0, 1.0}, {5, 0.75, 0.5}}};
constexpr std::array<ConnectionSite, 6> kHexagonSites = {
    {{0, 1.0, 0.5}, {1, 0.75, 1.0}, {2, 0.25, 1.0}, {3, 0.0, 0.5}, {4, 0.25, 0.0}, {5, 0.75, 0.0}}};
constexpr std::array<ConnectionSite, 4> kSlantedSites = {
    {{0, 0.5, 0.0}, {1, 0.125, 0.5}, {2, 0.5, 1.0}, {3, 0.875, 0.5}}};

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 && c != '\t') break;
        out += c;
    }
  }
  return out;
}

ExportReport base_report(const DiagramDoc& doc) {
  ExportReport r;
  r.shapes = doc.shapes.size();
  r.connectors = doc.connectors.size();
  r.texts = doc.free_texts.size();
  for (const ConnectorEdge& c : doc.connectors) {
    const std::string id = std::to_string(c.id.value);
    if (!is_bound(c.from)) r.warnings.push_back("connector " + id + ": free 'from' endpoint");
    if (!is_bound(c.to)) r.warnings.push_back("connector " + id + ": free 'to' endpoint");
    const auto a = bound_shape(c.from);
    const auto b = bound_shape(c.to);
    if (a && b && *a == *b) {
      r.warnings.push_back("connector " + id + ": self-loop on shape " + std::to_string(a->value));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

void svg_outline(std::ostringstream& os, const ShapeNode& s, double dpi) {
  const CornerBoxd b = shape_bbox(s);
  const CornerBoxd px{b.x0 * dpi, b.y0 * dpi, b.x1 * dpi, b.y1 * dpi};
  const Palette& pal = kPalette[class_index(s.cls)];
  const std::string style = " fill=\"#" + std::string(pal.fill) + "\" stroke=\"#" + pal.stroke + "\" stroke-width=\"2\"";
  if (s.cls == ElementClass::circle) {
    os << "<ellipse cx=\"" << num((px.x0 + px.x1) / 2) << "\" cy=\"" << num((px.y0 + px.y1) / 2) << "\" rx=\""
       << num(px.width() / 2) << "\" ry=\"" << num(px.height() / 2) << '"' << style << "/>";
    return;
  }
  if (s.cls == ElementClass::long_oval) {
    const double r = std::min(px.width(), px.height()) / 2;
    os << "<rect x=\"" << num(px.x0) << "\" y=\"" << num(px.y0) << "\" width=\"" << num(px.width())
       << "\" height=\"" << num(px.height()) << "\" rx=\"" << num(r) << "\" ry=\"" << num(r) << '"' << style << "/>";
    return;
  }
  const ShapeOutline outline = standard_shape_outline(s.cls, px);
  os << "<polygon points=\"";
  for (std::size_t i = 0; i < outline.points.size(); ++i) {
    if (i) os << ' ';
    os << num(outline.points[i].x()) << ',' << num(outline.points[i].y());
  }
  os << '"' << style << "/>";
}

void svg_text(std::ostringstream& os, const Point2d& at, double height_in, const std::string& text) {
  const double pt = label_font_points(height_in);
  os << "<text x=\"" << num(at.x()) << "\" y=\"" << num(at.y()) << "\" font-size=\"" << num(pt)
     << "pt\" text-anchor=\"middle\" dominant-baseline=\"central\">" << xml_escape(text) << "</text>";
}

// ---------------------------------------------------------------------------
// drawio
// ---------------------------------------------------------------------------

std::string drawio_shape_style(ElementClass cls) {
  std::string style;
  switch (cls) {
    case ElementClass::rectangle: style = "rounded=0;"; break;
    case ElementClass::circle: style = "ellipse;"; break;
    case ElementClass::diamond: style = "rhombus;"; break;
    case ElementClass::hexagon: style = "shape=hexagon;perimeter=hexagonPerimeter2;size=0.25;fixedSize=0;"; break;
    case ElementClass::parallelogram:
      style = "shape=parallelogram;perimeter=parallelogramPerimeter;size=0.25;fixedSize=0;";
      break;
    case ElementClass::trapezoid: style = "shape=trapezoid;perimeter=trapezoidPerimeter;size=0.25;fixedSize=0;"; break;
    case ElementClass::triangle: style = "triangle;direction=north;"; break;
    case ElementClass::long_oval: style = "rounded=1;arcSize=50;"; break;
    default: break;
  }
  const Palette& pal = kPalette[class_index(cls)];
  return style + "whiteSpace=wrap;html=1;fillColor=#" + pal.fill + ";strokeColor=#" + pal.stroke + ";";
}

std::string drawio_edge_style(ElementClass kind) {
  switch (kind) {
    case ElementClass::arrow: return "endArrow=classic;startArrow=none;html=1;";
    case ElementClass::double_arrow: return "endArrow=classic;startArrow=classic;html=1;";
    default: return "endArrow=none;startArrow=none;html=1;";
  }
}

// ---------------------------------------------------------------------------
// OOXML
// ---------------------------------------------------------------------------

constexpr const char* kNs =
    "xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" "
    "xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\" "
    "xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\"";

constexpr const char* kXmlDecl = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
constexpr const char* kRelNs = "http://schemas.openxmlformats.org/officeDocument/2006/relationships/";

std::string relationships(std::initializer_list<std::array<const char*, 3>> rels) {
  std::string s = kXmlDecl;
  s += "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">";
  for (const auto& r : rels) {
    s += "<Relationship Id=\"";
    s += r[0];
    s += "\" Type=\"";
    s += (std::string_view(r[1]).find("://") == std::string_view::npos) ? std::string(kRelNs) + r[1] : r[1];
    s += "\" Target=\"";
    s += r[2];
    s += "\"/>";
  }
  return s + "</Relationships>";
}

std::string content_types() {
  std::string s = kXmlDecl;
  s += "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
       "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
       "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
       "<Override PartName=\"/ppt/presentation.xml\" "
       "ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml\"/>"
       "<Override PartName=\"/ppt/slideMasters/slideMaster1.xml\" "
       "ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml\"/>"
       "<Override PartName=\"/ppt/slideLayouts/slideLayout1.xml\" "
       "ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml\"/>"
       "<Override PartName=\"/ppt/slides/slide1.xml\" "
       "ContentType=\"application/vnd.openxmlformats-officedocument.presentationml.slide+xml\"/>"
       "<Override PartName=\"/ppt/theme/theme1.xml\" "
       "ContentType=\"application/vnd.openxmlformats-officedocument.theme+xml\"/>"
       "</Types>";
  return s;
}

std::string presentation_part(std::int64_t cx, std::int64_t cy) {
  std::string s = kXmlDecl;
  s += "<p:presentation ";
  s += kNs;
  s += " saveSubsetFonts=\"1\">"
       "<p:sldMasterIdLst><p:sldMasterId id=\"2147483648\" r:id=\"rId1\"/></p:sldMasterIdLst>"
       "<p:sldIdLst><p:sldId id=\"256\" r:id=\"rId2\"/></p:sldIdLst>";
  s += "<p:sldSz cx=\"" + std::to_string(cx) + "\" cy=\"" + std::to_string(cy) + "\"/>";
  s += "<p:notesSz cx=\"6858000\" cy=\"9144000\"/></p:presentation>";
  return s;
}

constexpr const char* kEmptyTree =
    "<p:nvGrpSpPr><p:cNvPr id=\"1\" name=\"\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>"
    "<p:grpSpPr><a:xfrm><a:off x=\"0\" y=\"0\"/><a:ext cx=\"0\" cy=\"0\"/>"
    "<a:chOff x=\"0\" y=\"0\"/><a:chExt cx=\"0\" cy=\"0\"/></a:xfrm></p:grpSpPr>";

std::string master_part() {
  std::string s = kXmlDecl;
  s += "<p:sldMaster ";
  s += kNs;
  s += "><p:cSld><p:bg><p:bgRef idx=\"1001\"><a:schemeClr val=\"bg1\"/></p:bgRef></p:bg><p:spTree>";
  s += kEmptyTree;
  s += "</p:spTree></p:cSld>"
       "<p:clrMap bg1=\"lt1\" tx1=\"dk1\" bg2=\"lt2\" tx2=\"dk2\" accent1=\"accent1\" accent2=\"accent2\" "
       "accent3=\"accent3\" accent4=\"accent4\" accent5=\"accent5\" accent6=\"accent6\" hlink=\"hlink\" "
       "folHlink=\"folHlink\"/>"
       "<p:sldLayoutIdLst><p:sldLayoutId id=\"2147483649\" r:id=\"rId1\"/></p:sldLayoutIdLst>"
       "<p:txStyles><p:titleStyle/><p:bodyStyle/><p:otherStyle/></p:txStyles>"
       "</p:sldMaster>";
  return s;
}

std::string layout_part() {
  std::string s = kXmlDecl;
  s += "<p:sldLayout ";
  s += kNs;
  s += " type=\"blank\" preserve=\"1\"><p:cSld name=\"Blank\"><p:spTree>";
  s += kEmptyTree;
  s += "</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>";
  return s;
}

std::string theme_part() {
  std::string s = kXmlDecl;
  s += "<a:theme xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\" name=\"Office Theme\">"
       "<a:themeElements><a:clrScheme name=\"Office\">"
       "<a:dk1><a:sysClr val=\"windowText\" lastClr=\"000000\"/></a:dk1>"
       "<a:lt1><a:sysClr val=\"window\" lastClr=\"FFFFFF\"/></a:lt1>"
       "<a:dk2><a:srgbClr val=\"44546A\"/></a:dk2><a:lt2><a:srgbClr val=\"E7E6E6\"/></a:lt2>"
       "<a:accent1><a:srgbClr val=\"4472C4\"/></a:accent1><a:accent2><a:srgbClr val=\"ED7D31\"/></a:accent2>"
       "<a:accent3><a:srgbClr val=\"A5A5A5\"/></a:accent3><a:accent4><a:srgbClr val=\"FFC000\"/></a:accent4>"
       "<a:accent5><a:srgbClr val=\"5B9BD5\"/></a:accent5><a:accent6><a:srgbClr val=\"70AD47\"/></a:accent6>"
       "<a:hlink><a:srgbClr val=\"0563C1\"/></a:hlink><a:folHlink><a:srgbClr val=\"954F72\"/></a:folHlink>"
       "</a:clrScheme><a:fontScheme name=\"Office\">"
       "<a:majorFont><a:latin typeface=\"Calibri Light\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:majorFont>"
       "<a:minorFont><a:latin typeface=\"Calibri\"/><a:ea typeface=\"\"/><a:cs typeface=\"\"/></a:minorFont>"
       "</a:fontScheme><a:fmtScheme name=\"Office\"><a:fillStyleLst>";
  const std::string fill = "<a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>";
  for (int i = 0; i < 3; ++i) s += fill;
  s += "</a:fillStyleLst><a:lnStyleLst>";
  for (const char* w : {"6350", "12700", "19050"}) {
    s += std::string("<a:ln w=\"") + w + "\" cap=\"flat\" cmpd=\"sng\" algn=\"ctr\">" + fill +
         "<a:prstDash val=\"solid\"/><a:miter lim=\"800000\"/></a:ln>";
  }
  s += "</a:lnStyleLst><a:effectStyleLst>";
  for (int i = 0; i < 3; ++i) s += "<a:effectStyle><a:effectLst/></a:effectStyle>";
  s += "</a:effectStyleLst><a:bgFillStyleLst>";
  for (int i = 0; i < 3; ++i) s += fill;
  s += "</a:bgFillStyleLst></a:fmtScheme></a:themeElements><a:objectDefaults/><a:extraClrSchemeLst/></a:theme>";
  return s;
}

std::string xfrm(const CornerBoxd& inches, bool flip_h = false, bool flip_v = false) {
  std::string s = "<a:xfrm";
  if (flip_h) s += " flipH=\"1\"";
  if (flip_v) s += " flipV=\"1\"";
  s += "><a:off x=\"" + std::to_string(inches_to_emu(inches.x0)) + "\" y=\"" +
       std::to_string(inches_to_emu(inches.y0)) + "\"/><a:ext cx=\"" +
       std::to_string(inches_to_emu(inches.width())) + "\" cy=\"" + std::to_string(inches_to_emu(inches.height())) +
       "\"/></a:xfrm>";
  return s;
}

std::string text_body(const std::optional<std::string>& text, double height_in, bool wrap) {
  std::string s = "<p:txBody><a:bodyPr";
  s += wrap ? " wrap=\"square\"" : " wrap=\"none\"";
  s += " anchor=\"ctr\"/><a:lstStyle/><a:p><a:pPr algn=\"ctr\"/>";
  if (text && !text->empty()) {
    const long sz = std::lround(label_font_points(height_in) * 100.0);
    s += "<a:r><a:rPr lang=\"en-US\" sz=\"" + std::to_string(sz) +
         "\" dirty=\"0\"><a:solidFill><a:srgbClr val=\"000000\"/></a:solidFill></a:rPr><a:t>" + xml_escape(*text) +
         "</a:t></a:r>";
  }
  return s + "</a:p></p:txBody>";
}

std::string adjust_list(const ShapeNode& s) {
  const double ss = std::min(s.box.w, s.box.h);
  if (!(ss > 0)) return "<a:avLst/>";
  double fraction = 0.0;
  switch (s.cls) {
    case ElementClass::parallelogram: fraction = kParallelogramShift; break;
    case ElementClass::trapezoid: fraction = kTrapezoidInset; break;
    case ElementClass::hexagon: fraction = kHexagonInset; break;
    default: return "<a:avLst/>";
  }
  const long adj = std::lround(100000.0 * fraction * s.box.w / ss);
  return "<a:avLst><a:gd name=\"adj\" fmla=\"val " + std::to_string(adj) + "\"/></a:avLst>";
}

std::string slide_part(const DiagramDoc& doc) {
  std::string s = kXmlDecl;
  s += "<p:sld ";
  s += kNs;
  s += "><p:cSld><p:spTree>";
  s += kEmptyTree;

  std::uint32_t next_id = 2;
  std::map<ElementId, std::uint32_t> drawing_ids;
  for (const ShapeNode& shape : doc.shapes) {
    const std::uint32_t id = next_id++;
    drawing_ids[shape.id] = id;
    const Palette& pal = kPalette[class_index(shape.cls)];
    s += "<p:sp><p:nvSpPr><p:cNvPr id=\"" + std::to_string(id) + "\" name=\"" +
         std::string(class_name(shape.cls)) + " " + std::to_string(shape.id.value) +
         "\"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr><p:spPr>";
    s += xfrm(shape_bbox(shape));
    s += "<a:prstGeom prst=\"" + std::string(preset_geometry(shape.cls)) + "\">" + adjust_list(shape) +
         "</a:prstGeom>";
    s += "<a:solidFill><a:srgbClr val=\"" + std::string(pal.fill) + "\"/></a:solidFill>";
    s += "<a:ln w=\"19050\"><a:solidFill><a:srgbClr val=\"" + std::string(pal.stroke) + "\"/></a:solidFill></a:ln>";
    s += "</p:spPr>" + text_body(shape.label, shape.box.h, true) + "</p:sp>";
  }

  std::vector<std::pair<CornerBoxd, std::string>> text_boxes;
  for (const ConnectorEdge& c : doc.connectors) {
    const std::uint32_t id = next_id++;
    const Point2d a = binding_position(c.from);
    const Point2d b = binding_position(c.to);
    s += "<p:cxnSp><p:nvCxnSpPr><p:cNvPr id=\"" + std::to_string(id) + "\" name=\"" +
         std::string(class_name(c.kind)) + " " + std::to_string(c.id.value) + "\"/><p:cNvCxnSpPr>";
    auto site_ref = [&](const Binding& binding, const char* tag) {
      const auto* bound = std::get_if<Bound>(&binding);
      if (bound == nullptr) return;
      const ShapeNode* shape = doc.find_shape(bound->anchor.shape_id);
      if (shape == nullptr) return;
      const int site = nearest_connection_site(shape->cls, shape_bbox(*shape), bound->anchor.position);
      s += std::string("<a:") + tag + " id=\"" + std::to_string(drawing_ids.at(shape->id)) + "\" idx=\"" +
           std::to_string(site) + "\"/>";
    };
    site_ref(c.from, "stCxn");
    site_ref(c.to, "endCxn");
    s += "</p:cNvCxnSpPr><p:nvPr/></p:nvCxnSpPr><p:spPr>";
    const CornerBoxd span{std::min(a.x(), b.x()), std::min(a.y(), b.y()), std::max(a.x(), b.x()),
                          std::max(a.y(), b.y())};
    s += xfrm(span, b.x() < a.x(), b.y() < a.y());
    s += "<a:prstGeom prst=\"straightConnector1\"><a:avLst/></a:prstGeom>";
    s += "<a:ln w=\"19050\"><a:solidFill><a:srgbClr val=\"333333\"/></a:solidFill>";
    if (c.kind == ElementClass::double_arrow) s += "<a:headEnd type=\"triangle\"/>";
    if (c.kind != ElementClass::line) s += "<a:tailEnd type=\"triangle\"/>";
    s += "</a:ln></p:spPr></p:cxnSp>";
    if (c.label && !c.label->empty()) {
      const Point2d mid = (a + b) / 2.0;
      text_boxes.emplace_back(CornerBoxd{mid.x() - 0.75, mid.y() - 0.15, mid.x() + 0.75, mid.y() + 0.15}, *c.label);
    }
  }
  for (const TextBlock& t : doc.free_texts) text_boxes.emplace_back(t.bbox, t.content.value_or(""));

  for (const auto& [box, text] : text_boxes) {
    const std::uint32_t id = next_id++;
    s += "<p:sp><p:nvSpPr><p:cNvPr id=\"" + std::to_string(id) + "\" name=\"Text " + std::to_string(id) +
         "\"/><p:cNvSpPr txBox=\"1\"/><p:nvPr/></p:nvSpPr><p:spPr>";
    s += xfrm(box);
    s += "<a:prstGeom prst=\"rect\"><a:avLst/></a:prstGeom><a:noFill/></p:spPr>";
    s += text_body(text, box.height(), false) + "</p:sp>";
  }

  s += "</p:spTree></p:cSld><p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>";
  return s;
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::int64_t inches_to_emu(double inches) { return std::llround(inches * static_cast<double>(kEmuPerInch)); }

double label_font_points(double box_height_inches) {
  return std::clamp(0.5 * box_height_inches * 72.0, 8.0, 40.0);
}

std::span<const ConnectionSite> connection_sites(ElementClass cls) {
  switch (cls) {
    case ElementClass::circle: return kEllipseSites;
    case ElementClass::triangle: return kTriangleSites;
    case ElementClass::hexagon: return kHexagonSites;
    case ElementClass::parallelogram:
    case ElementClass::trapezoid: return kSlantedSites;
    case ElementClass::rectangle:
    case ElementClass::diamond:
    case ElementClass::long_oval: return kFourSites;
    default: break;
  }
  throw NotAShape(std::string(class_name(cls)) + " has no connection sites");
}

int nearest_connection_site(ElementClass cls, const CornerBoxd& bbox, const Point2d& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (const ConnectionSite& site : connection_sites(cls)) {
    const Point2d q(bbox.x0 + site.u * bbox.width(), bbox.y0 + site.v * bbox.height());
    const double d = (p - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = site.index;
    }
  }
  return best;
}

std::string_view preset_geometry(ElementClass cls) {
  switch (cls) {
    case ElementClass::rectangle: return "rect";
    case ElementClass::circle: return "ellipse";
    case ElementClass::diamond: return "diamond";
    case ElementClass::hexagon: return "hexagon";
    case ElementClass::parallelogram: return "parallelogram";
    case ElementClass::trapezoid: return "trapezoid";
    case ElementClass::triangle: return "triangle";
    case ElementClass::long_oval: return "roundRect";
    default: break;
  }
  throw NotAShape(std::string(class_name(cls)) + " has no preset geometry");
}

std::string write_zip(std::span<const ZipEntry> entries) {
  constexpr std::uint16_t kTime = 0;
  constexpr std::uint16_t kDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01
  std::string out;
  std::string central;
  for (const ZipEntry& e : entries) {
    if (e.name.size() > 0xffff || e.data.size() > 0xffffffffu || out.size() > 0xffffffffu) {
      throw PackageWriteError("zip entry too large: " + e.name);
    }
    const auto crc = static_cast<std::uint32_t>(
        ::crc32(0L, reinterpret_cast<const Bytef*>(e.data.data()), static_cast<uInt>(e.data.size())));
    const auto size = static_cast<std::uint32_t>(e.data.size());
    const auto offset = static_cast<std::uint32_t>(out.size());

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);
    put16(out, 0);
    put16(out, kTime);
    put16(out, kDate);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, static_cast<std::uint16_t>(e.name.size()));
    put16(out, 0);
    out += e.name;
    out += e.data;

    put32(central, 0x02014b50);
    put16(central, 20);
    put16(central, 20);
    put16(central, 0);
    put16(central, 0);
    put16(central, kTime);
    put16(central, kDate);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, static_cast<std::uint16_t>(e.name.size()));
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put16(central, 0);
    put32(central, 0);
    put32(central, offset);
    central += e.name;
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out += central;
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put16(out, static_cast<std::uint16_t>(entries.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

std::vector<std::string> pptx_part_names() {
  return {"[Content_Types].xml",
          "_rels/.rels",
          "ppt/presentation.xml",
          "ppt/_rels/presentation.xml.rels",
          "ppt/slides/slide1.xml",
          "ppt/slides/_rels/slide1.xml.rels",
          "ppt/slideLayouts/slideLayout1.xml",
          "ppt/slideLayouts/_rels/slideLayout1.xml.rels",
          "ppt/slideMasters/slideMaster1.xml",
          "ppt/slideMasters/_rels/slideMaster1.xml.rels",
          "ppt/theme/theme1.xml"};
}

ExportOutput export_svg(const DiagramDoc& doc, const ExportOptions& opts) {
  validate(doc);
  const double dpi = opts.dpi;
  const double w = doc.page_width * dpi;
  const double h = doc.page_height * dpi;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n"
     << "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
        "markerHeight=\"8\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333333\"/>"
        "</marker></defs>\n"
     << "<rect class=\"page\" x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"#FFFFFF\" stroke=\"#CCCCCC\"/>\n";

  for (const ShapeNode& s : doc.shapes) {
    os << "<g class=\"shape\" data-id=\"" << s.id.value << "\" data-class=\"" << class_name(s.cls) << "\">";
    svg_outline(os, s, dpi);
    if (s.label && !s.label->empty()) svg_text(os, Point2d(s.box.xc * dpi, s.box.yc * dpi), s.box.h, *s.label);
    os << "</g>\n";
  }
  for (const ConnectorEdge& c : doc.connectors) {
    const Point2d a = binding_position(c.from) * dpi;
    const Point2d b = binding_position(c.to) * dpi;
    os << "<g class=\"connector\" data-id=\"" << c.id.value << "\" data-class=\"" << class_name(c.kind) << "\">"
       << "<line x1=\"" << num(a.x()) << "\" y1=\"" << num(a.y()) << "\" x2=\"" << num(b.x()) << "\" y2=\""
       << num(b.y()) << "\" stroke=\"#333333\" stroke-width=\"2\"";
    if (c.kind == ElementClass::double_arrow) os << " marker-start=\"url(#head)\"";
    if (c.kind != ElementClass::line) os << " marker-end=\"url(#head)\"";
    os << "/>";
    if (c.label && !c.label->empty()) svg_text(os, (a + b) / 2.0, 0.3, *c.label);
    os << "</g>\n";
  }
  for (const TextBlock& t : doc.free_texts) {
    os << "<g class=\"text\">";
    svg_text(os, t.bbox.center() * dpi, t.bbox.height(), t.content.value_or(""));
    os << "</g>\n";
  }
  os << "</svg>\n";
  return {os.str(), base_report(doc)};
}

ExportOutput export_drawio(const DiagramDoc& doc, const ExportOptions& opts) {
  validate(doc);
  const double dpi = opts.dpi;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<mxfile host=\"flowmind\" version=\"1\">\n"
     << "<diagram id=\"page-1\" name=\"Page-1\">\n"
     << "<mxGraphModel dx=\"0\" dy=\"0\" grid=\"1\" gridSize=\"10\" guides=\"1\" tooltips=\"1\" connect=\"1\" "
        "arrows=\"1\" fold=\"1\" page=\"1\" pageScale=\"1\" pageWidth=\""
     << num(doc.page_width * dpi) << "\" pageHeight=\"" << num(doc.page_height * dpi)
     << "\" math=\"0\" shadow=\"0\">\n<root>\n<mxCell id=\"0\"/>\n<mxCell id=\"1\" parent=\"0\"/>\n";

  for (const ShapeNode& s : doc.shapes) {
    const CornerBoxd b = shape_bbox(s);
    os << "<mxCell id=\"s" << s.id.value << "\" value=\"" << xml_escape(s.label.value_or("")) << "\" style=\""
       << drawio_shape_style(s.cls) << "\" vertex=\"1\" parent=\"1\"><mxGeometry x=\"" << num(b.x0 * dpi)
       << "\" y=\"" << num(b.y0 * dpi) << "\" width=\"" << num(b.width() * dpi) << "\" height=\""
       << num(b.height() * dpi) << "\" as=\"geometry\"/></mxCell>\n";
  }

  for (const ConnectorEdge& c : doc.connectors) {
    std::string style = drawio_edge_style(c.kind);
    std::string endpoints;
    std::string points;
    auto endpoint = [&](const Binding& binding, const char* attr, const char* prefix, const char* point_as) {
      const Point2d p = binding_position(binding) * dpi;
      if (const auto* bound = std::get_if<Bound>(&binding)) {
        const ShapeNode* shape = doc.find_shape(bound->anchor.shape_id);
        endpoints += std::string(" ") + attr + "=\"s" + std::to_string(shape->id.value) + "\"";
        const CornerBoxd b = shape_bbox(*shape);
        if (shape->cls != ElementClass::triangle && b.width() > 0 && b.height() > 0) {
          style += std::string(prefix) + "X=" + num((bound->anchor.position.x() - b.x0) / b.width()) + ";" + prefix +
                   "Y=" + num((bound->anchor.position.y() - b.y0) / b.height()) + ";" + prefix + "Dx=0;" + prefix +
                   "Dy=0;";
        }
      }
      points += std::string("<mxPoint x=\"") + num(p.x()) + "\" y=\"" + num(p.y()) + "\" as=\"" + point_as + "\"/>";
    };
    endpoint(c.from, "source", "exit", "sourcePoint");
    endpoint(c.to, "target", "entry", "targetPoint");
    os << "<mxCell id=\"c" << c.id.value << "\" value=\"" << xml_escape(c.label.value_or("")) << "\" style=\""
       << style << "\" edge=\"1\" parent=\"1\"" << endpoints << "><mxGeometry relative=\"1\" as=\"geometry\">"
       << points << "</mxGeometry></mxCell>\n";
  }

  for (std::size_t i = 0; i < doc.free_texts.size(); ++i) {
    const TextBlock& t = doc.free_texts[i];
    os << "<mxCell id=\"t" << i << "\" value=\"" << xml_escape(t.content.value_or(""))
       << "\" style=\"text;html=1;align=center;verticalAlign=middle;\" vertex=\"1\" parent=\"1\"><mxGeometry x=\""
       << num(t.bbox.x0 * dpi) << "\" y=\"" << num(t.bbox.y0 * dpi) << "\" width=\"" << num(t.bbox.width() * dpi)
       << "\" height=\"" << num(t.bbox.height() * dpi) << "\" as=\"geometry\"/></mxCell>\n";
  }
  os << "</root>\n</mxGraphModel>\n</diagram>\n</mxfile>\n";
  return {os.str(), base_report(doc)};
}

ExportOutput export_pptx(const DiagramDoc& doc, const ExportOptions&) {
  validate(doc);
  // Slide dimensions must lie within [1, 56] inches.
  const auto clamp_emu = [](double inches) {
    return std::clamp<std::int64_t>(inches_to_emu(inches), 914400, 51206400);
  };
  const std::vector<std::string> names = pptx_part_names();
  const std::vector<std::string> parts = {
      content_types(),
      relationships({{{"rId1", "officeDocument", "ppt/presentation.xml"}}}),
      presentation_part(clamp_emu(doc.page_width), clamp_emu(doc.page_height)),
      relationships({{{"rId1", "slideMaster", "slideMasters/slideMaster1.xml"}},
                     {{"rId2", "slide", "slides/slide1.xml"}},
                     {{"rId3", "theme", "theme/theme1.xml"}}}),
      slide_part(doc),
      relationships({{{"rId1", "slideLayout", "../slideLayouts/slideLayout1.xml"}}}),
      layout_part(),
      relationships({{{"rId1", "slideMaster", "../slideMasters/slideMaster1.xml"}}}),
      master_part(),
      relationships({{{"rId1", "slideLayout", "../slideLayouts/slideLayout1.xml"}},
                     {{"rId2", "theme", "../theme/theme1.xml"}}}),
      theme_part(),
  };
  std::vector<ZipEntry> entries;
  for (std::size_t i = 0; i < names.size(); ++i) entries.push_back({names[i], parts[i]});
  return {write_zip(entries), base_report(doc)};
}

}  // namespace flowmind
