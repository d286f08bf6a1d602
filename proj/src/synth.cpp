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

#include "flowmind/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "flowmind/connect.hpp"
#include "flowmind/textassoc.hpp"

namespace flowmind {

namespace {

enum Stream : std::uint64_t { kLayout = 1, kDrop, kScore, kConfuse, kBoxNoise, kKeypointNoise, kDuplicate };

constexpr std::array<ElementClass, 8> kShapeClasses = {
    ElementClass::circle,        ElementClass::diamond,   ElementClass::hexagon,  ElementClass::long_oval,
    ElementClass::parallelogram, ElementClass::rectangle, ElementClass::trapezoid, ElementClass::triangle,
};

constexpr std::array<ElementClass, 3> kConnectorClasses = {ElementClass::arrow, ElementClass::double_arrow,
                                                           ElementClass::line};

constexpr std::array<const char*, 14> kWords = {
    "Start", "End", "Yes", "No", "Process", "Input", "Check", "Loop", "Output", "Init", "Read", "Save", "Übung",
    "Done",
};

constexpr double kMargin = 10.0;
constexpr double kConnectorPad = 6.0;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Engine keyed on (seed, image, element, stream); draws never depend on other keys.
class KeyedRng {
 public:
  KeyedRng(std::uint64_t seed, std::uint64_t image, std::uint64_t element, Stream stream)
      : engine_(splitmix(splitmix(splitmix(splitmix(seed) ^ image) ^ element) ^ stream)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double gaussian() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <std::size_t N>
  std::size_t weighted(const std::array<double, N>& w) {
    double total = 0.0;
    for (double v : w) total += v;
    double r = uniform() * total;
    for (std::size_t i = 0; i < N; ++i) {
      if (r < w[i]) return i;
      r -= w[i];
    }
    for (std::size_t i = N; i-- > 0;) {
      if (w[i] > 0) return i;
    }
    return 0;
  }

 private:
  std::mt19937_64 engine_;
};

struct PlacedShape {
  ElementClass cls;
  CornerBoxd bbox;
};

Point2d anchor_toward(const PlacedShape& s, const Point2d& direction) {
  const Point2d c = s.bbox.center();
  const double reach = 2.0 * std::max(s.bbox.width(), s.bbox.height());
  return keypoint_to_shape_distance(c + reach * direction, s.cls, s.bbox).position;
}

CornerBoxd clamp_box(CornerBoxd b, double w, double h) {
  b.x0 = std::clamp(b.x0, 0.0, w);
  b.x1 = std::clamp(b.x1, 0.0, w);
  b.y0 = std::clamp(b.y0, 0.0, h);
  b.y1 = std::clamp(b.y1, 0.0, h);
  return b;
}

std::string stem_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%04zu", index);
  return buf;
}

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

CornerBoxd jitter_box(const CornerBoxd& b, double sigma, KeyedRng& rng, double w, double h) {
  const double a = b.x0 + sigma * rng.gaussian();
  const double c = b.y0 + sigma * rng.gaussian();
  const double d = b.x1 + sigma * rng.gaussian();
  const double e = b.y1 + sigma * rng.gaussian();
  return clamp_box({std::min(a, d), std::min(c, e), std::max(a, d), std::max(c, e)}, w, h);
}

}  // namespace

void validate(const SynthConfig& cfg) {
  const Perturbation& p = cfg.perturbation;
  if (cfg.rows < 1 || cfg.cols < 1) throw InvalidConfig("synth grid needs at least one row and column");
  for (double v : {cfg.cell_fill, cfg.connector_density, cfg.label_prob, p.drop_prob, p.duplicate_prob,
                   p.class_confusion_prob, p.score_min}) {
    if (!probability(v)) throw InvalidConfig("synth probabilities must lie in [0, 1]");
  }
  for (double v : {p.bbox_jitter_px, p.keypoint_jitter_px}) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidConfig("synth noise deviations must be non-negative");
  }
  double total = 0.0;
  for (double w : cfg.shape_class_weights) {
    if (!std::isfinite(w) || w < 0.0) throw InvalidConfig("shape class weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidConfig("at least one shape class weight must be positive");
}

DocumentInput perturb(const DocumentInput& gt, const SynthConfig& cfg, std::size_t image_index) {
  const Perturbation& p = cfg.perturbation;
  const double w = gt.image_width;
  const double h = gt.image_height;
  DocumentInput out;
  out.image_width = gt.image_width;
  out.image_height = gt.image_height;
  out.image_path = gt.image_path;
  std::vector<Detection> duplicates;

  for (std::size_t i = 0; i < gt.elements.size(); ++i) {
    auto rng = [&](Stream s) { return KeyedRng(cfg.seed, image_index, i, s); };
    if (KeyedRng drop = rng(kDrop); drop.uniform() < p.drop_prob) continue;

    Detection d = gt.elements[i];
    if (p.score_min < 1.0) {
      KeyedRng r = rng(kScore);
      d.score = r.uniform(p.score_min, 1.0);
    }
    if (KeyedRng r = rng(kConfuse); r.uniform() < p.class_confusion_prob) {
      if (is_shape(d.cls)) {
        const std::size_t shift = 1 + static_cast<std::size_t>(r.integer(0, 6));
        d.cls = kShapeClasses[(class_index(d.cls) + shift) % kShapeClasses.size()];
      } else if (is_connector(d.cls)) {
        const std::size_t slot = class_index(d.cls) - class_index(ElementClass::arrow);
        d.cls = kConnectorClasses[(slot + 1 + static_cast<std::size_t>(r.integer(0, 1))) % 3];
      }
    }
    if (p.bbox_jitter_px > 0.0) {
      KeyedRng r = rng(kBoxNoise);
      const CornerBoxd moved = jitter_box(d.bbox, p.bbox_jitter_px, r, w, h);
      if (moved.area() > 0.0 || is_connector(d.cls)) d.bbox = moved;
    }
    if (p.keypoint_jitter_px > 0.0 && d.keypoints) {
      KeyedRng r = rng(kKeypointNoise);
      for (Point2d* pt : {&d.keypoints->from, &d.keypoints->to}) {
        const double x = pt->x() + p.keypoint_jitter_px * r.gaussian();
        const double y = pt->y() + p.keypoint_jitter_px * r.gaussian();
        *pt = Point2d(std::clamp(x, 0.0, w), std::clamp(y, 0.0, h));
      }
    }
    if (KeyedRng r = rng(kDuplicate); r.uniform() < p.duplicate_prob) {
      Detection dup = d;
      const CornerBoxd moved = jitter_box(d.bbox, std::max(1.5, p.bbox_jitter_px), r, w, h);
      if (moved.area() > 0.0 || is_connector(d.cls)) dup.bbox = moved;
      dup.score = 0.9 * d.score;
      duplicates.push_back(std::move(dup));
    }
    out.elements.push_back(std::move(d));
  }
  for (Detection& d : duplicates) out.elements.push_back(std::move(d));
  return out;
}

SynthImage generate_image(const SynthConfig& cfg, std::size_t image_index) {
  KeyedRng rng(cfg.seed, image_index, 0, kLayout);
  const int width = cfg.cols * kSynthCellWidth;
  const int height = cfg.rows * kSynthCellHeight;

  std::vector<std::optional<PlacedShape>> grid(static_cast<std::size_t>(cfg.rows * cfg.cols));
  bool any = false;
  for (auto& cell : grid) {
    if (rng.uniform() < cfg.cell_fill) {
      cell.emplace();
      any = true;
    }
  }
  if (!any) grid.front().emplace();

  DocumentInput gt;
  gt.image_width = width;
  gt.image_height = height;
  gt.image_path = stem_for(image_index) + ".png";
  std::vector<Detection> labels;

  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      auto& cell = grid[static_cast<std::size_t>(r * cfg.cols + c)];
      if (!cell) continue;
      const ElementClass cls = kShapeClasses[rng.weighted(cfg.shape_class_weights)];
      int sw = rng.integer(100, 140);
      int sh = rng.integer(60, 90);
      if (cls == ElementClass::circle) sw = sh = rng.integer(70, 90);
      const double x0 = c * kSynthCellWidth + kMargin + rng.integer(0, kSynthCellWidth - sw - 2 * static_cast<int>(kMargin));
      const double y0 = r * kSynthCellHeight + kMargin + rng.integer(0, kSynthCellHeight - sh - 2 * static_cast<int>(kMargin));
      cell = PlacedShape{cls, {x0, y0, x0 + sw, y0 + sh}};
      gt.elements.push_back({cls, cell->bbox, 1.0, std::nullopt, std::nullopt});

      if (rng.uniform() < cfg.label_prob) {
        const Point2d center = cell->bbox.center();
        const double tw = std::round(0.5 * sw);
        const double th = std::round(0.3 * sh);
        const double tx0 = std::round(center.x() - tw / 2);
        const double ty0 = std::round(center.y() - th / 2);
        Detection label{ElementClass::textblock, {tx0, ty0, tx0 + tw, ty0 + th}, 1.0, std::nullopt,
                        std::string(kWords[static_cast<std::size_t>(rng.integer(0, kWords.size() - 1))])};
        labels.push_back(std::move(label));
      }
    }
  }
  for (Detection& d : labels) gt.elements.push_back(std::move(d));

  const std::array<double, 3> connector_weights = {0.6, 0.2, 0.2};
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      const auto& a = grid[static_cast<std::size_t>(r * cfg.cols + c)];
      if (!a) continue;
      const std::array<std::pair<int, int>, 2> neighbours = {std::pair{r, c + 1}, std::pair{r + 1, c}};
      for (const auto& [nr, nc] : neighbours) {
        if (nr >= cfg.rows || nc >= cfg.cols) continue;
        const auto& b = grid[static_cast<std::size_t>(nr * cfg.cols + nc)];
        if (!b) continue;
        if (!(rng.uniform() < cfg.connector_density)) continue;
        const ElementClass kind = kConnectorClasses[rng.weighted(connector_weights)];
        const Point2d dir = nr == r ? Point2d(1, 0) : Point2d(0, 1);
        const Point2d from = anchor_toward(*a, dir);
        const Point2d to = anchor_toward(*b, -dir);
        const CornerBoxd box = clamp_box({std::min(from.x(), to.x()) - kConnectorPad,
                                          std::min(from.y(), to.y()) - kConnectorPad,
                                          std::max(from.x(), to.x()) + kConnectorPad,
                                          std::max(from.y(), to.y()) + kConnectorPad},
                                         width, height);
        gt.elements.push_back({kind, box, 1.0, KeypointPair{from, to}, std::nullopt});
      }
    }
  }

  SynthImage img;
  img.stem = stem_for(image_index);
  img.detections = perturb(gt, cfg, image_index);
  img.ground_truth = std::move(gt);
  return img;
}

std::vector<SynthImage> generate(const SynthConfig& cfg) {
  validate(cfg);
  std::vector<SynthImage> out;
  out.reserve(cfg.n_images);
  for (std::size_t i = 0; i < cfg.n_images; ++i) out.push_back(generate_image(cfg, i));
  return out;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["n_images"] = cfg.n_images;
  j["rows"] = cfg.rows;
  j["cols"] = cfg.cols;
  j["shape_class_weights"] = cfg.shape_class_weights;
  j["cell_fill"] = cfg.cell_fill;
  j["connector_density"] = cfg.connector_density;
  j["label_prob"] = cfg.label_prob;
  const Perturbation& p = cfg.perturbation;
  j["perturbation"] = {{"bbox_jitter_px", p.bbox_jitter_px},         {"drop_prob", p.drop_prob},
                       {"duplicate_prob", p.duplicate_prob},         {"class_confusion_prob", p.class_confusion_prob},
                       {"keypoint_jitter_px", p.keypoint_jitter_px}, {"score_min", p.score_min}};
  return j.dump(1);
}

std::string corpus_manifest(const SynthConfig& cfg, const std::vector<SynthImage>& images) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(synth_config_to_json(cfg));
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const SynthImage& img : images) {
    list.push_back({{"stem", img.stem}, {"ground_truth", img.stem + ".gt"}, {"detections", img.stem + ".det"}});
  }
  j["images"] = std::move(list);
  return j.dump(1) + "\n";
}

}  // namespace flowmind
