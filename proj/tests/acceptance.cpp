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

// Acceptance runner: one PASS/FAIL line per top-level criterion. Exit status is
// the number of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowmind/export.hpp"
#include "flowmind/pipeline.hpp"
#include "flowmind/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace flowmind;
using namespace flowmind::testing;

namespace {

/// Collects the first few violated expectations of one criterion.
class Tally {
 public:
  void expect(bool condition, const std::string& what) {
    ++checks_;
    if (condition) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << checks_ << " checks";
    if (failures_ > 0) s << ", " << failures_ << " failed: " << notes_;
    return s.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string notes_;
};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

Outcome with_detail(const Tally& t, const std::string& extra = {}) {
  return {t.ok(), extra.empty() ? t.summary() : extra + "; " + t.summary()};
}

// ---------------------------------------------------------------------------

Outcome identity_pipeline() {
  const auto start = std::chrono::steady_clock::now();
  SynthConfig sc;
  sc.n_images = 100;
  sc.seed = 42;
  std::vector<EvalImage> images;
  for (const SynthImage& img : generate(sc)) {
    const ParsedDocument gt = parse_ground_truth(serialize_document(img.ground_truth, WireMode::ground_truth));
    const ConversionResult r = convert_document(gt.document, {}, gt.report);
    const ParsedDocument out = parse_detections(render_output(r, OutputFormat::detections, 96));
    images.push_back({img.stem, out.document, gt.document});
  }
  const MetricsReport m = evaluate(images);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Tally t;
  t.expect(m.weighted.recall == 1.0, "weighted recall " + fmt(m.weighted.recall.value_or(-1)));
  t.expect(m.weighted.precision == 1.0, "weighted precision " + fmt(m.weighted.precision.value_or(-1)));
  t.expect(m.weighted.f1 == 1.0, "weighted F1 " + fmt(m.weighted.f1.value_or(-1)));
  t.expect(m.diagram_accuracy == 1.0, "diagram accuracy " + fmt(m.diagram_accuracy));
  t.expect(seconds < 10.0, "runtime " + fmt(seconds) + " s");
  return with_detail(t, "100 images, seed 42, weighted F1 " + fmt(m.weighted.f1.value_or(-1)) + ", DA " +
                            fmt(m.diagram_accuracy) + ", " + fmt(std::round(seconds * 100) / 100) +
                            " s (limit 10 s)");
}

Outcome box_conversion() {
  Tally t;
  t.expect(corner_to_center(CornerBoxd{0, 0, 4, 2}) == CenterBoxd{2, 1, 4, 2}, "tabled box 1");
  t.expect(corner_to_center(CornerBoxd{3, 3, 3, 3}) == CenterBoxd{3, 3, 0, 0}, "tabled box 2");
  t.expect(corner_to_center(CornerBoxd{10, 20, 30, 60}) == CenterBoxd{20, 40, 20, 40}, "tabled box 3");
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double x0 = rng.dyadic(0, 4000), y0 = rng.dyadic(0, 4000);
    const CornerBoxd b{x0, y0, x0 + rng.dyadic(0, 500), y0 + rng.dyadic(0, 500)};
    const CenterBoxd c = corner_to_center(b);
    t.expect(c.xc == (b.x0 + b.x1) / 2 && c.yc == (b.y0 + b.y1) / 2 && c.w == std::abs(b.x1 - b.x0) &&
                 c.h == std::abs(b.y1 - b.y0),
             "formula on random box " + std::to_string(i));
    t.expect(center_to_corner(c) == b, "round trip on random box " + std::to_string(i));
  }
  return with_detail(t, "10000 random boxes, exact equality");
}

Outcome connection_oracle() {
  Tally t;
  Rng rng(22);
  const double inf = std::numeric_limits<double>::infinity();
  std::size_t endpoints = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Instance in = random_instance(rng);
    const auto edges = resolve_connections(in.shapes, in.connectors);
    t.expect(edges.size() == in.connectors.size(), "edge count");
    for (std::size_t i = 0; i < edges.size() && i < in.connectors.size(); ++i) {
      const KeypointPair& k = *in.connectors[i].keypoints;
      t.expect(agrees(edges[i].from, oracle_bind(k.from, in.shapes, inf)), "instance " + std::to_string(trial));
      t.expect(agrees(edges[i].to, oracle_bind(k.to, in.shapes, inf)), "instance " + std::to_string(trial));
      endpoints += 2;
    }
  }

  // Foot of the perpendicular beyond the edge: the vertex distance applies.
  const auto tri = keypoint_to_shape_distance(Point2d(20, 12), ElementClass::triangle, {0, 0, 10, 10});
  t.expect(std::abs(tri.distance - std::sqrt(104.0)) < 1e-12 && tri.position == Point2d(10, 10), "triangle foot");
  const auto rect = keypoint_to_shape_distance(Point2d(15, -5), ElementClass::rectangle, {0, 0, 10, 10});
  t.expect(std::abs(rect.distance - std::sqrt(50.0)) < 1e-12 && rect.position == Point2d(10, 0), "rectangle corner");
  // Foot on the edge: the perpendicular distance applies.
  const auto side = keypoint_to_shape_distance(Point2d(12, 5), ElementClass::rectangle, {0, 0, 10, 10});
  t.expect(side.distance == 2.0 && side.position == Point2d(10, 5) && side.site_index == 1, "rectangle side");
  const std::vector<ShapeRef> two = {{ElementId{0}, ElementClass::rectangle, {0, 0, 10, 10}},
                                     {ElementId{1}, ElementClass::rectangle, {35, 0, 45, 20}}};
  t.expect(bound_shape(bind_keypoint(Point2d(30, 10.5), two)) == ElementId{1}, "edge extension");
  return with_detail(t, "1000 instances, " + std::to_string(endpoints) + " endpoints");
}

Outcome cross_class_nms_check() {
  Tally t;
  Rng rng(11);
  for (std::size_t n = 0; n <= 6; ++n) {
    for (int layout = 0; layout < 6; ++layout) {
      std::vector<Detection> d = random_detections(rng, n);
      std::vector<int> ranks(n);
      std::iota(ranks.begin(), ranks.end(), 0);
      do {
        for (std::size_t i = 0; i < n; ++i) d[i].score = ranks[i] / 10.0;
        for (double th : {0.5, 0.8}) t.expect(cross_class_nms_indices(d, {th}) == oracle_nms(d, th), "permuted scores");
      } while (std::next_permutation(ranks.begin(), ranks.end()));
    }
  }
  for (std::size_t n = 7; n <= 12; ++n) {
    for (int trial = 0; trial < 300; ++trial) {
      const auto d = random_detections(rng, n);
      for (double th : {0.5, 0.8}) t.expect(cross_class_nms_indices(d, {th}) == oracle_nms(d, th), "oracle n=" + std::to_string(n));
    }
  }
  Rng rng2(13);
  for (int trial = 0; trial < 500; ++trial) {
    const auto d = random_detections(rng2, static_cast<std::size_t>(rng2.integer(0, 25)));
    for (double th : {0.5, 0.8}) {
      const auto once = cross_class_nms(d, {th});
      bool overlap = false;
      for (std::size_t i = 0; i < once.size(); ++i) {
        for (std::size_t j = i + 1; j < once.size(); ++j) overlap |= oracle_iou(once[i].bbox, once[j].bbox) > th;
      }
      t.expect(!overlap, "overlapping pair in output");
      t.expect(cross_class_nms(once, {th}) == once, "idempotence");
    }
  }
  auto survivors = [](double other_height, double th) {
    const std::vector<Detection> in = {{ElementClass::rectangle, {0, 0, 10, 10}, 0.9, std::nullopt, std::nullopt},
                                       {ElementClass::diamond, {0, 0, 10, other_height}, 0.5, std::nullopt, std::nullopt}};
    return cross_class_nms(in, {th}).size();
  };
  t.expect(survivors(5, 0.5) == 2 && survivors(6, 0.5) == 1, "pinned at 0.5");
  t.expect(survivors(8, 0.8) == 2 && survivors(9, 0.8) == 1, "pinned at 0.8");
  return with_detail(t, "oracle for n <= 12, 500 random inputs, thresholds 0.5 and 0.8");
}

Outcome layout_check() {
  Tally t;
  const auto echoed = nlohmann::json::parse(pipeline_config_to_json({}));
  t.expect(echoed["layout"]["stage1_t1"] == 1.0, "size threshold default");
  t.expect(echoed["layout"]["stage2_t1"] == 0.8, "position threshold default");
  t.expect(echoed["layout"]["golden_divisor"] == 1.618, "divisor default");

  std::size_t histories = 0;
  auto check_histories = [&](const LayoutTrace& trace) {
    for (const auto& h : trace.objective_histories) {
      ++histories;
      for (std::size_t i = 1; i < h.size(); ++i) t.expect(h[i] <= h[i - 1] + 1e-12 * (1 + h[i - 1]), "objective rose");
    }
  };

  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const DiagramDoc doc = random_diagram(rng);
    LayoutTrace trace;
    const DiagramDoc once = autotypeset(doc, {}, &trace);
    const double diff = max_geometry_difference(once, autotypeset(once));
    worst = std::max(worst, diff);
    t.expect(diff <= 1e-9, "idempotence on document " + std::to_string(trial));
    check_histories(trace);
  }

  DiagramDoc fixture;
  fixture.page_width = 6;
  fixture.page_height = 8;
  fixture.shapes.push_back(node(0, ElementClass::rectangle, {2.00, 1.5, 1.50, 0.60}));
  fixture.shapes.push_back(node(1, ElementClass::rectangle, {2.06, 3.0, 1.46, 0.63}));
  fixture.shapes.push_back(node(2, ElementClass::rectangle, {1.95, 4.5, 1.53, 0.58}));
  fixture.connectors.push_back(edge_between(fixture, 3, {2.0, 1.82}, {2.06, 2.7}));
  fixture.connectors.push_back(edge_between(fixture, 4, {2.06, 3.33}, {1.95, 4.2}));
  LayoutTrace trace;
  const DiagramDoc out = autotypeset(fixture, {}, &trace);
  check_histories(trace);
  for (const ShapeNode& s : out.shapes) {
    t.expect(s.box.w == out.shapes[0].box.w && s.box.h == out.shapes[0].box.h, "fixture sizes differ");
    t.expect(s.box.xc == out.shapes[0].box.xc, "fixture column differs");
  }
  t.expect(trace.x_clusters == 1, "fixture x clusters");
  return with_detail(t, "200 documents, worst drift " + fmt(worst) + " in (limit 1e-9), " +
                            std::to_string(histories) + " objective histories");
}

Outcome metrics_check() {
  Tally t;
  const Scores no_pred = image_scores(0, 0, 5);
  t.expect(!no_pred.precision && !no_pred.f1 && no_pred.recall == 0.0, "zero predictions");
  const Scores zero = image_scores(0, 2, 3);
  t.expect(zero.precision == 0.0 && zero.recall == 0.0 && zero.f1 == 0.0, "zero precision and recall");

  auto rect = [](double x) { return Detection{ElementClass::rectangle, {x, 0, x + 40, 40}, 1.0, std::nullopt, std::nullopt}; };
  DocumentInput five;
  five.image_width = 400;
  five.image_height = 300;
  for (int i = 0; i < 5; ++i) five.elements.push_back(rect(i * 50.0));
  DocumentInput empty = five;
  empty.elements.clear();
  const std::vector<EvalImage> na{{"empty", empty, five}, {"perfect", five, five}};
  const MetricsReport r = evaluate(na);
  t.expect(r.overall.precision == 1.0, "N/A image included in the precision mean");
  t.expect(r.overall.f1 == 1.0, "N/A image included in the F1 mean");
  t.expect(r.overall.recall == 0.5, "recall mean");

  t.expect(cer("abc", "abc") == 0.0, "cer abc");
  t.expect(cer("flaw", "flow") == 0.25, "cer flaw");
  t.expect(cer("", "ab") == 1.0, "cer empty");
  Rng rng(41);
  const std::u32string alphabet = U"abcxyzÜé中文😀 ";
  for (int trial = 0; trial < 1000; ++trial) {
    std::u32string a, b;
    const int la = rng.integer(0, 30), lb = rng.integer(0, 30);
    for (int i = 0; i < la; ++i) a += alphabet[static_cast<std::size_t>(rng.integer(0, static_cast<int>(alphabet.size()) - 1))];
    for (int i = 0; i < lb; ++i) b += alphabet[static_cast<std::size_t>(rng.integer(0, static_cast<int>(alphabet.size()) - 1))];
    const double expected = static_cast<double>(levenshtein_oracle(a, b)) / static_cast<double>(std::max<std::size_t>(1, b.size()));
    t.expect(std::abs(cer(utf8(a), utf8(b)) - expected) <= 1e-12, "cer pair " + std::to_string(trial));
  }

  std::vector<EvalImage> four;
  DocumentInput d = five;
  d.elements = {rect(10), Detection{ElementClass::diamond, {150, 10, 230, 90}, 1.0, std::nullopt, std::nullopt}};
  for (int i = 0; i < 4; ++i) four.push_back({"img" + std::to_string(i), d, d});
  t.expect(evaluate(four).diagram_accuracy == 1.0, "four correct images");
  four[2].pred.elements.push_back({ElementClass::circle, {300, 200, 340, 240}, 1.0, std::nullopt, std::nullopt});
  t.expect(evaluate(four).diagram_accuracy == 0.75, "three of four correct");
  return with_detail(t, "1000 CER pairs within 1e-12, DA fixture 0.75");
}

std::vector<CornerBoxd> sorted_boxes(std::vector<CornerBoxd> v) {
  std::sort(v.begin(), v.end(), [](const CornerBoxd& a, const CornerBoxd& b) {
    return std::tie(a.x0, a.y0, a.x1, a.y1) < std::tie(b.x0, b.y0, b.x1, b.y1);
  });
  return v;
}

std::vector<CornerBoxd> boxes_of(const std::vector<TextBlock>& blocks) {
  std::vector<CornerBoxd> out;
  for (const TextBlock& b : blocks) out.push_back(b.bbox);
  return sorted_boxes(out);
}

Outcome text_association() {
  Tally t;
  const std::vector<ShapeRef> shapes = {{ElementId{4}, ElementClass::rectangle, {0, 0, 10, 10}}};
  const auto blocks = blocks_from_detections(std::vector<Detection>{
      text_detection({2, 2, 8, 4}), text_detection({20, 20, 30, 25}), text_detection({5, 2, 15, 4})});
  const auto out = assign_text(blocks, shapes, {});
  t.expect(out[0].attachment == Attachment{AttachmentKind::shape, ElementId{4}}, "inside text");
  t.expect(out[1].attachment.kind == AttachmentKind::standalone, "outside text");
  t.expect(text_overlap({5, 2, 15, 4}, shapes[0].bbox, {}) == 0.5, "half-covered ratio");
  t.expect(out[2].attachment.kind == AttachmentKind::standalone, "half-covered text");

  Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const TextLayout l = random_layout(rng);
    std::vector<CornerBoxd> boxes;
    for (const Detection& d : l.texts) boxes.push_back(d.bbox);
    t.expect(boxes_of(merge_pass(blocks_from_detections(l.texts), l.shapes)) == sorted_boxes(oracle_merge(boxes, l.shapes)),
             "merge pass on layout " + std::to_string(trial));
    std::vector<CornerBoxd> expected = oracle_merge(boxes, l.shapes);
    for (auto next = oracle_merge(expected, l.shapes); next.size() != expected.size(); next = oracle_merge(expected, l.shapes)) {
      expected = std::move(next);
    }
    const auto merged = merge_text_boxes(l.texts, l.shapes);
    t.expect(boxes_of(merged) == sorted_boxes(expected), "fixed point on layout " + std::to_string(trial));
    t.expect(merge_text_blocks(merged, l.shapes) == merged, "idempotence on layout " + std::to_string(trial));
  }
  return with_detail(t, "3 tabled cases, 500 layouts against union-find");
}

std::string part(const std::vector<ZipMember>& members, const std::string& name) {
  for (const ZipMember& m : members) {
    if (m.name == name) return m.data;
  }
  return {};
}

Outcome exports_check() {
  Tally t;
  std::vector<DiagramDoc> docs;
  docs.emplace_back();
  docs.back().page_width = 8.5;
  docs.back().page_height = 11;
  SynthConfig sc;
  sc.n_images = 10;
  sc.seed = 5;
  for (const SynthImage& img : generate(sc)) docs.push_back(convert_document(img.ground_truth).diagram);

  const std::vector<std::string> parts = {"[Content_Types].xml",
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
  std::size_t shapes_checked = 0;
  for (std::size_t k = 0; k < docs.size(); ++k) {
    const DiagramDoc& doc = docs[k];
    const std::string tag = "document " + std::to_string(k);
    const std::string svg = export_svg(doc).bytes;
    const std::string drawio = export_drawio(doc).bytes;
    const std::string pptx = export_pptx(doc).bytes;
    t.expect(svg == export_svg(doc).bytes, tag + " svg not deterministic");
    t.expect(drawio == export_drawio(doc).bytes, tag + " drawio not deterministic");
    t.expect(pptx == export_pptx(doc).bytes, tag + " pptx not deterministic");
    try {
      t.expect(count_tag(parse_xml(svg), "svg") == 1, tag + " svg root");
      const std::size_t cells = count_tag(parse_xml(drawio), "mxCell");
      t.expect(cells == doc.shapes.size() + doc.connectors.size() + doc.free_texts.size() + 2, tag + " drawio cells");
      const auto members = read_zip(pptx);
      std::vector<std::string> names;
      for (const ZipMember& m : members) {
        names.push_back(m.name);
        t.expect(m.crc_ok, tag + " crc");
        parse_xml(m.data);
      }
      t.expect(names == parts, tag + " part list");
      std::size_t i = 0;
      for_each_tag(parse_xml(part(members, "ppt/slides/slide1.xml")), "p:sp", [&](const auto& sp) {
        if (i >= doc.shapes.size()) return;
        const CornerBoxd b = shape_bbox(doc.shapes[i++]);
        const auto& x = sp.get_child("p:spPr.a:xfrm");
        const double ox = x.template get<double>("a:off.<xmlattr>.x");
        const double oy = x.template get<double>("a:off.<xmlattr>.y");
        const double cx = x.template get<double>("a:ext.<xmlattr>.cx");
        const double cy = x.template get<double>("a:ext.<xmlattr>.cy");
        t.expect(std::abs(ox - b.x0 * 914400) <= 1 && std::abs(oy - b.y0 * 914400) <= 1 &&
                     std::abs(cx - b.width() * 914400) <= 1 && std::abs(cy - b.height() * 914400) <= 1,
                 tag + " EMU geometry");
        ++shapes_checked;
      });
      t.expect(i == doc.shapes.size(), tag + " slide shape count");
    } catch (const std::exception& e) {
      t.expect(false, tag + " structure: " + e.what());
    }
  }
  return with_detail(t, std::to_string(docs.size()) + " documents incl. empty, " + std::to_string(shapes_checked) +
                            " shapes within 1 EMU");
}

Outcome monotonicity() {
  const std::vector<double> drops = {0.0, 0.1, 0.2, 0.4};
  std::vector<double> means;
  for (double p : drops) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      SynthConfig sc;
      sc.seed = seed;
      sc.n_images = 4;
      sc.perturbation.drop_prob = p;
      std::vector<EvalImage> images;
      for (const SynthImage& img : generate(sc)) {
        const ConversionResult r = convert_document(img.detections);
        images.push_back({img.stem, r.detections, img.ground_truth});
      }
      sum += evaluate(images).weighted.f1.value_or(0.0);
    }
    means.push_back(sum / 50);
  }
  Tally t;
  for (std::size_t i = 1; i < means.size(); ++i) t.expect(means[i] <= means[i - 1], "mean F1 rose at drop " + fmt(drops[i]));
  std::string detail = "50 seeds, mean weighted F1";
  for (std::size_t i = 0; i < means.size(); ++i) detail += " " + fmt(drops[i]) + ":" + fmt(std::round(means[i] * 1e4) / 1e4);
  return with_detail(t, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"identity-pipeline", identity_pipeline},
      {"box-conversion", box_conversion},
      {"connection-oracle", connection_oracle},
      {"cross-class-nms", cross_class_nms_check},
      {"layout", layout_check},
      {"metrics", metrics_check},
      {"text-association", text_association},
      {"exports", exports_check},
      {"perturbation-monotonicity", monotonicity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %-26s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
