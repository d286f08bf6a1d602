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

#ifndef FLOWMIND_SYNTH_HPP
#define FLOWMIND_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flowmind/core.hpp"
#include "flowmind/ingest.hpp"

namespace flowmind {

struct Perturbation {
  /// Standard deviation of the per-coordinate box noise, pixels.
  double bbox_jitter_px = 0.0;
  double drop_prob = 0.0;
  double duplicate_prob = 0.0;
  double class_confusion_prob = 0.0;
  /// Standard deviation of the keypoint noise, pixels.
  double keypoint_jitter_px = 0.0;
  /// Scores are drawn uniformly from [score_min, 1].
  double score_min = 1.0;
};

struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t n_images = 10;
  int rows = 3;
  int cols = 3;
  /// Relative weights in shape order: circle, diamond, hexagon, long_oval,
  /// parallelogram, rectangle, trapezoid, triangle.
  std::array<double, 8> shape_class_weights{1, 1, 1, 1, 1, 1, 1, 1};
  /// Probability that a grid cell holds a shape.
  double cell_fill = 0.85;
  /// Probability that two adjacent occupied cells are connected.
  double connector_density = 0.7;
  /// Probability that a shape carries a text label.
  double label_prob = 0.8;
  Perturbation perturbation;
};

void validate(const SynthConfig& cfg);

struct SynthImage {
  std::string stem;
  DocumentInput ground_truth;
  DocumentInput detections;
};

inline constexpr int kSynthCellWidth = 200;
inline constexpr int kSynthCellHeight = 160;

/// Applies the configured noise to one ground-truth document.
DocumentInput perturb(const DocumentInput& gt, const SynthConfig& cfg, std::size_t image_index);

SynthImage generate_image(const SynthConfig& cfg, std::size_t image_index);

std::vector<SynthImage> generate(const SynthConfig& cfg);

std::string synth_config_to_json(const SynthConfig& cfg);

/// Corpus manifest listing every stem with its file pair and the generating config.
std::string corpus_manifest(const SynthConfig& cfg, const std::vector<SynthImage>& images);

}  // namespace flowmind

#endif  // FLOWMIND_SYNTH_HPP
