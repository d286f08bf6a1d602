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

#include <string>

#include "flowmind/ingest.hpp"
#include "flowmind/synth.hpp"
#include "support.hpp"

using namespace flowmind;

namespace {

std::string doc(const std::string& elements, int w = 640, int h = 480) {
  return R"({"image":{"width":)" + std::to_string(w) + R"(,"height":)" + std::to_string(h) +
         R"(},"elements":[)" + elements + "]}";
}

bool has_reason(const std::vector<IngestIssue>& issues, const std::string& reason) {
  for (const IngestIssue& i : issues) {
    if (i.reason == reason) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a single rectangle is accepted as is") {
  const ParsedDocument p = parse_detections(doc(R"({"class":"rectangle","score":0.97,"bbox":[0,0,100,50]})"));
  REQUIRE(p.document.elements.size() == 1);
  CHECK(p.report.rejected.empty());
  CHECK(p.report.accepted_count == 1);
  const Detection& d = p.document.elements[0];
  CHECK(d.cls == ElementClass::rectangle);
  CHECK(d.score == 0.97);
  CHECK(d.bbox == CornerBoxd{0, 0, 100, 50});
}

TEST_CASE("a connector without keypoints is rejected") {
  const ParsedDocument p = parse_detections(doc(R"({"class":"arrow","score":0.9,"bbox":[0,0,10,10]})"));
  CHECK(p.document.elements.empty());
  REQUIRE(p.report.rejected.size() == 1);
  CHECK(p.report.rejected[0].reason == "connector missing keypoints");
}

TEST_CASE("out-of-image coordinates are clamped") {
  const ParsedDocument p = parse_detections(doc(R"({"class":"circle","score":0.5,"bbox":[-5,10,50,40]})"));
  REQUIRE(p.document.elements.size() == 1);
  CHECK(p.document.elements[0].bbox.x0 == 0.0);
  CHECK(p.report.clamped_count == 1);
}

TEST_CASE("swapped corners are put in order") {
  const ParsedDocument p = parse_detections(doc(R"({"class":"diamond","score":0.5,"bbox":[50,40,10,20]})"));
  REQUIRE(p.document.elements.size() == 1);
  CHECK(p.document.elements[0].bbox == CornerBoxd{10, 20, 50, 40});
  CHECK(p.report.clamped_count == 0);
}

TEST_CASE("ground truth ignores scores with a warning") {
  const ParsedDocument p = parse_ground_truth(doc(R"({"class":"hexagon","score":0.3,"bbox":[1,1,20,20]})"));
  REQUIRE(p.document.elements.size() == 1);
  CHECK(p.document.elements[0].score == 1.0);
  CHECK(has_reason(p.report.warnings, "score ignored in ground truth"));
}

TEST_CASE("empty element list is valid") {
  const ParsedDocument p = parse_ground_truth(doc(""));
  CHECK(p.document.elements.empty());
  CHECK(p.document.image_width == 640);
  CHECK(p.report.rejected.empty());
}

TEST_CASE("element level problems are reported, never thrown") {
  const std::string elements =
      R"(42,)"
      R"({"bbox":[0,0,1,1],"score":0.5},)"
      R"({"class":"star","score":0.5,"bbox":[0,0,1,1]},)"
      R"({"class":"rectangle","score":0.5,"bbox":[0,0,1]},)"
      R"({"class":"rectangle","score":1.5,"bbox":[0,0,1,1]},)"
      R"({"class":"line","score":0.5,"bbox":[0,0,1,1],"keypoints":[[0,0]]},)"
      R"({"class":"textblock","score":0.5,"bbox":[3,3,3,9]},)"
      R"({"class":"rectangle","score":0.5,"bbox":[0,0,5,5],"keypoints":[[0,0],[1,1]]},)"
      R"({"class":"Double Arrow","score":0.5,"bbox":[0,0,5,5],"keypoints":[[0,0],[9,9]]})";
  const ParsedDocument p = parse_detections(doc(elements));
  const auto& r = p.report.rejected;
  REQUIRE(r.size() == 7);
  CHECK(r[0].reason == "element is not an object");
  CHECK(r[1].reason == "missing class");
  CHECK(r[2].reason == "unknown class 'star'");
  CHECK(r[3].reason == "invalid bbox");
  CHECK(r[4].reason == "invalid score");
  CHECK(r[5].reason == "invalid keypoints");
  CHECK(r[6].reason == "zero-area box");
  CHECK(p.report.accepted_count + r.size() == 9);
  REQUIRE(p.document.elements.size() == 2);
  CHECK_FALSE(p.document.elements[0].keypoints.has_value());
  CHECK(p.document.elements[1].cls == ElementClass::double_arrow);
  CHECK(has_reason(p.report.warnings, "keypoints dropped from non-connector element"));
  CHECK(has_reason(p.report.warnings, "keypoint outside connector bbox"));
}

TEST_CASE("document level problems throw") {
  CHECK_THROWS_AS(parse_detections("not json"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections("[]"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections(R"({"elements":[]})"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections(R"({"image":{"width":0,"height":5},"elements":[]})"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections(R"({"image":{"width":5.5,"height":5},"elements":[]})"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections(R"({"image":{"width":5,"height":5}})"), MalformedDocument);
  CHECK_THROWS_AS(parse_detections(R"({"image":{"width":5,"height":5,"path":3},"elements":[]})"), MalformedDocument);
}

TEST_CASE("keypoints outside the image are clamped") {
  const ParsedDocument p =
      parse_detections(doc(R"({"class":"arrow","score":0.5,"bbox":[0,0,20,20],"keypoints":[[-4,5],[25,700]]})", 20, 20));
  REQUIRE(p.document.elements.size() == 1);
  const KeypointPair& k = *p.document.elements[0].keypoints;
  CHECK(k.from == Point2d(0, 5));
  CHECK(k.to == Point2d(20, 20));
  CHECK(p.report.clamped_count == 1);
}

TEST_CASE("serialization reparses to the same document") {
  SynthConfig cfg;
  cfg.n_images = 20;
  cfg.perturbation.bbox_jitter_px = 3;
  cfg.perturbation.score_min = 0.4;
  for (const SynthImage& img : generate(cfg)) {
    const ParsedDocument gt = parse_ground_truth(serialize_document(img.ground_truth, WireMode::ground_truth));
    CHECK(gt.report.rejected.empty());
    CHECK(gt.report.warnings.empty());
    CHECK(gt.document == img.ground_truth);
    const ParsedDocument det = parse_detections(serialize_document(img.detections));
    CHECK(det.document == img.detections);
    CHECK(serialize_document(det.document) == serialize_document(img.detections));
  }
}

TEST_CASE("parsing is deterministic") {
  const std::string bytes = doc(R"({"class":"line","score":0.25,"bbox":[1,2,30,40],"keypoints":[[1,2],[30,40]],"text":"x"})");
  const ParsedDocument a = parse_detections(bytes);
  const ParsedDocument b = parse_detections(bytes);
  CHECK(a.document == b.document);
  CHECK(a.report == b.report);
  CHECK(a.document.elements[0].text == "x");
}

TEST_CASE("pixels to inches") {
  CHECK(pixels_to_inches(96) == 1.0);
  CHECK(pixels_to_inches(48, 96) == 0.5);
  CHECK(pixels_to_inches(300, 150) == 2.0);
  CHECK_THROWS_AS(pixels_to_inches(10, 0), NonPositiveDpi);
  CHECK_THROWS_AS(pixels_to_inches(10, -3), NonPositiveDpi);
}

TEST_CASE("accepted detections satisfy the keypoint invariant") {
  testing::Rng rng(3);
  std::string elements;
  for (int i = 0; i < 300; ++i) {
    const ElementClass c = kAllClasses[static_cast<std::size_t>(rng.integer(0, 11))];
    const double x = rng.uniform(-20, 200), y = rng.uniform(-20, 200);
    elements += std::string(i ? "," : "") + R"({"class":")" + std::string(class_name(c)) + R"(","score":0.5,"bbox":[)" +
                std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(x + rng.uniform(0, 40)) + "," +
                std::to_string(y + rng.uniform(0, 40)) + "]";
    if (rng.chance(0.5)) elements += R"(,"keypoints":[[1,2],[3,4]])";
    elements += "}";
  }
  const ParsedDocument p = parse_detections(doc(elements, 150, 150));
  CHECK(p.report.accepted_count + p.report.rejected.size() == 300);
  for (const Detection& d : p.document.elements) {
    CHECK(d.keypoints.has_value() == is_connector(d.cls));
    CHECK(d.bbox.valid());
    CHECK(d.bbox.x1 <= 150);
    CHECK(d.bbox.y0 >= 0);
  }
}
