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

#include "flowmind/textassoc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <tuple>

#include <sys/wait.h>

namespace flowmind {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

auto block_key(const TextBlock& b) {
  return std::tie(b.bbox.y0, b.bbox.x0, b.bbox.y1, b.bbox.x1);
}

bool block_less(const TextBlock& a, const TextBlock& b) {
  if (block_key(a) != block_key(b)) return block_key(a) < block_key(b);
  if (a.content != b.content) return a.content < b.content;
  return a.fragments.size() < b.fragments.size();
}

TextBlock unite_blocks(std::span<const TextBlock* const> members) {
  TextBlock out;
  out.bbox = members.front()->bbox;
  out.score = members.front()->score;
  for (const TextBlock* m : members) {
    out.bbox = union_box(out.bbox, m->bbox);
    out.score = std::max(out.score, m->score);
    out.fragments.insert(out.fragments.end(), m->fragments.begin(), m->fragments.end());
  }
  std::sort(out.fragments.begin(), out.fragments.end(),
            [](const TextFragment& a, const TextFragment& b) { return a.source < b.source; });
  out.content = reading_order_content(out.fragments);
  return out;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

double text_overlap(const CornerBoxd& text, const CornerBoxd& target, const TextAssocConfig& cfg) {
  return cfg.criterion == AssignCriterion::containment ? containment(text, target) : iou(text, target);
}

std::optional<ElementId> best_shape_for(const CornerBoxd& text, std::span<const ShapeRef> shapes,
                                        const TextAssocConfig& cfg) {
  const ShapeRef* best = nullptr;
  double best_ratio = 0.0;
  for (const ShapeRef& s : shapes) {
    const double r = text_overlap(text, s.bbox, cfg);
    if (r < cfg.assign_threshold) continue;
    bool better = best == nullptr || r > best_ratio;
    if (!better && r == best_ratio) {
      const double area = s.bbox.area();
      const double best_area = best->bbox.area();
      better = area < best_area || (area == best_area && s.id < best->id);
    }
    if (better) {
      best = &s;
      best_ratio = r;
    }
  }
  if (best == nullptr) return std::nullopt;
  return best->id;
}

std::optional<std::string> reading_order_content(std::span<const TextFragment> fragments) {
  std::vector<const TextFragment*> with_text;
  for (const TextFragment& f : fragments) {
    if (f.text) with_text.push_back(&f);
  }
  if (with_text.empty()) return std::nullopt;

  std::vector<double> heights;
  double top = std::numeric_limits<double>::infinity();
  for (const TextFragment* f : with_text) {
    heights.push_back(f->bbox.height());
    top = std::min(top, f->bbox.center().y());
  }
  std::sort(heights.begin(), heights.end());
  const std::size_t n = heights.size();
  const double median = n % 2 ? heights[n / 2] : (heights[n / 2 - 1] + heights[n / 2]) / 2;

  auto band = [&](const TextFragment* f) -> long {
    if (!(median > 0)) return 0;
    return static_cast<long>(std::floor((f->bbox.center().y() - top) / median));
  };
  std::stable_sort(with_text.begin(), with_text.end(), [&](const TextFragment* a, const TextFragment* b) {
    const auto ka = std::make_tuple(band(a), a->bbox.center().x(), a->bbox.center().y(), a->source);
    const auto kb = std::make_tuple(band(b), b->bbox.center().x(), b->bbox.center().y(), b->source);
    return ka < kb;
  });

  std::string out;
  for (const TextFragment* f : with_text) {
    if (f->text->empty()) continue;
    if (!out.empty()) out += ' ';
    out += *f->text;
  }
  return out;
}

std::vector<TextBlock> blocks_from_detections(std::span<const Detection> texts) {
  std::vector<TextBlock> blocks;
  blocks.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const Detection& d = texts[i];
    if (!is_text(d.cls)) throw Error("text association expects textblock detections");
    TextBlock b;
    b.bbox = d.bbox;
    b.score = d.score;
    b.fragments.push_back({i, d.bbox, d.text});
    b.content = reading_order_content(b.fragments);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<TextBlock> merge_pass(std::span<const TextBlock> blocks, std::span<const ShapeRef> shapes,
                                  const TextAssocConfig& cfg) {
  const std::size_t n = blocks.size();
  DisjointSets sets(n);
  std::vector<std::optional<ElementId>> owner(n);
  std::map<ElementId, std::size_t> first_for_shape;
  for (std::size_t i = 0; i < n; ++i) {
    owner[i] = best_shape_for(blocks[i].bbox, shapes, cfg);
    if (!owner[i]) continue;
    auto [it, inserted] = first_for_shape.emplace(*owner[i], i);
    if (!inserted) sets.unite(it->second, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (owner[j]) continue;
      if (iou(blocks[i].bbox, blocks[j].bbox) > cfg.standalone_merge_iou) sets.unite(i, j);
    }
  }

  std::map<std::size_t, std::vector<const TextBlock*>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(&blocks[i]);

  std::vector<TextBlock> out;
  out.reserve(groups.size());
  for (const auto& [root, members] : groups) {
    if (members.size() == 1) {
      out.push_back(*members.front());
    } else {
      out.push_back(unite_blocks(members));
    }
  }
  std::sort(out.begin(), out.end(), block_less);
  return out;
}

std::vector<TextBlock> merge_text_blocks(std::span<const TextBlock> blocks,
                                         std::span<const ShapeRef> shapes,
                                         const TextAssocConfig& cfg) {
  std::vector<TextBlock> current = merge_pass(blocks, shapes, cfg);
  while (true) {
    std::vector<TextBlock> next = merge_pass(current, shapes, cfg);
    if (next.size() == current.size()) return next;
    current = std::move(next);
  }
}

std::vector<TextBlock> merge_text_boxes(std::span<const Detection> texts,
                                        std::span<const ShapeRef> shapes,
                                        const TextAssocConfig& cfg) {
  const std::vector<TextBlock> blocks = blocks_from_detections(texts);
  return merge_text_blocks(blocks, shapes, cfg);
}

std::vector<TextBlock> assign_text(std::span<const TextBlock> blocks, std::span<const ShapeRef> shapes,
                                   std::span<const ConnectorEdge> connectors,
                                   const TextAssocConfig& cfg) {
  std::vector<TextBlock> out(blocks.begin(), blocks.end());
  for (TextBlock& b : out) {
    b.attachment = {};
    if (const auto shape = best_shape_for(b.bbox, shapes, cfg)) {
      b.attachment = {AttachmentKind::shape, *shape};
      continue;
    }
    const Point2d center = b.bbox.center();
    const ConnectorEdge* best = nullptr;
    double best_d = 0.0;
    for (const ConnectorEdge& c : connectors) {
      if (text_overlap(b.bbox, c.bbox, cfg) < cfg.assign_threshold) continue;
      const Point2d mid = (binding_position(c.from) + binding_position(c.to)) / 2.0;
      const double d = (center - mid).norm();
      if (best == nullptr || d < best_d || (d == best_d && c.id < best->id)) {
        best = &c;
        best_d = d;
      }
    }
    if (best != nullptr) b.attachment = {AttachmentKind::connector, best->id};
  }
  return out;
}

void validate(const RecognizerSpec& spec) {
  if (spec.mode == RecognizerSpec::Mode::external_command &&
      spec.command_template.find("{box}") == std::string::npos) {
    throw InvalidConfig("recognizer command template must contain the {box} placeholder");
  }
}

RecognizerSpec parse_recognizer(const std::string& text) {
  RecognizerSpec spec;
  if (text == "echo" || text == "ground_truth_echo") {
    spec.mode = RecognizerSpec::Mode::ground_truth_echo;
  } else if (text == "none") {
    spec.mode = RecognizerSpec::Mode::none;
  } else if (text.rfind("cmd:", 0) == 0) {
    spec.mode = RecognizerSpec::Mode::external_command;
    spec.command_template = text.substr(4);
  } else {
    throw InvalidConfig("unknown recognizer '" + text + "' (expected echo, none or cmd:<template>)");
  }
  validate(spec);
  return spec;
}

std::string describe(const RecognizerSpec& spec) {
  switch (spec.mode) {
    case RecognizerSpec::Mode::ground_truth_echo:
      return "echo";
    case RecognizerSpec::Mode::none:
      return "none";
    case RecognizerSpec::Mode::external_command:
      return "cmd:" + spec.command_template;
  }
  return "none";
}

CropBox crop_box(const CornerBoxd& bbox) {
  CropBox c{static_cast<long>(std::ceil(bbox.x0)), static_cast<long>(std::ceil(bbox.y0)),
            static_cast<long>(std::floor(bbox.x1)), static_cast<long>(std::floor(bbox.y1))};
  if (c.x1 < c.x0) c.x1 = c.x0;
  if (c.y1 < c.y0) c.y1 = c.y0;
  return c;
}

RecognitionResult recognize(std::span<const TextBlock> blocks, const RecognizerSpec& spec,
                            const std::optional<std::string>& image_path) {
  validate(spec);
  RecognitionResult result;
  result.blocks.assign(blocks.begin(), blocks.end());

  for (std::size_t i = 0; i < result.blocks.size(); ++i) {
    TextBlock& b = result.blocks[i];
    switch (spec.mode) {
      case RecognizerSpec::Mode::none:
        b.content.reset();
        b.confidence.reset();
        break;
      case RecognizerSpec::Mode::ground_truth_echo:
        b.content = reading_order_content(b.fragments);
        if (b.content) b.confidence = 1.0;
        else b.confidence.reset();
        break;
      case RecognizerSpec::Mode::external_command: {
        b.content.reset();
        b.confidence.reset();
        if (!image_path) {
          result.issues.push_back({i, "recognizer failure: no image source"});
          break;
        }
        const CropBox c = crop_box(b.bbox);
        const std::string box = std::to_string(c.x0) + " " + std::to_string(c.y0) + " " +
                                std::to_string(c.x1) + " " + std::to_string(c.y1);
        std::string cmd = replace_all(spec.command_template, "{image}", shell_quote(*image_path));
        cmd = replace_all(cmd, "{box}", box);

        FILE* pipe = ::popen(cmd.c_str(), "r");
        if (pipe == nullptr) {
          result.issues.push_back({i, "recognizer failure: could not start command"});
          break;
        }
        std::string output;
        std::array<char, 4096> buf{};
        while (std::size_t got = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), got);
        const int status = ::pclose(pipe);
        if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
          result.issues.push_back({i, "recognizer failure: nonzero exit"});
          break;
        }

        auto strip = [](std::string s) {
          while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
          return s;
        };
        const std::size_t nl = output.find('\n');
        b.content = strip(output.substr(0, nl));
        if (b.content->empty()) result.issues.push_back({i, "recognizer returned empty string"});
        if (nl != std::string::npos) {
          const std::string second = strip(output.substr(nl + 1, output.find('\n', nl + 1) - nl - 1));
          if (!second.empty()) {
            char* end = nullptr;
            const double conf = std::strtod(second.c_str(), &end);
            if (end != second.c_str() && *end == '\0' && conf >= 0.0 && conf <= 1.0) {
              b.confidence = conf;
            } else {
              result.issues.push_back({i, "recognizer confidence unreadable"});
            }
          }
        }
        break;
      }
    }
  }
  return result;
}

}  // namespace flowmind
