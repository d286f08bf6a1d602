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

#include "flowmind/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace flowmind {

namespace {

int connector_slot(ElementClass c) {
  switch (c) {
    case ElementClass::arrow: return 0;
    case ElementClass::double_arrow: return 1;
    case ElementClass::line: return 2;
    default: return -1;
  }
}

constexpr std::array<ElementClass, 3> kConnectorKinds = {ElementClass::arrow, ElementClass::double_arrow,
                                                         ElementClass::line};

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 1;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = c < 0xF0 ? 3 : 1;
      cp = len == 3 ? (c & 0x0F) : c;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) len = 1, cp = c;
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      len = 1;
      cp = c;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

Scores counts_scores(std::size_t tp, std::size_t n_pred, std::size_t n_gt, std::size_t unscored,
                     const EvalConfig& cfg) {
  if (cfg.lenient_unscored) return image_scores(tp, n_pred - unscored, n_gt - unscored);
  return image_scores(tp, n_pred, n_gt);
}

Scores average(std::span<const Scores> rows) {
  std::vector<std::optional<double>> r, p, f;
  for (const Scores& s : rows) {
    r.push_back(s.recall);
    p.push_back(s.precision);
    f.push_back(s.f1);
  }
  return {mean_defined(r), mean_defined(p), mean_defined(f)};
}

template <std::size_t N>
Scores weighted_average(const std::array<ClassRow, N>& rows) {
  auto one = [&](auto member) -> std::optional<double> {
    double num = 0.0;
    double den = 0.0;
    for (const ClassRow& row : rows) {
      const std::optional<double>& v = row.scores.*member;
      if (!v || row.count == 0) continue;
      num += static_cast<double>(row.count) * *v;
      den += static_cast<double>(row.count);
    }
    if (den == 0.0) return std::nullopt;
    return num / den;
  };
  return {one(&Scores::recall), one(&Scores::precision), one(&Scores::f1)};
}

bool same_endpoint(const std::optional<std::size_t>& pred_mapped, bool pred_free,
                   const std::optional<ElementId>& gt_shape) {
  if (!gt_shape) return pred_free;
  return pred_mapped && *pred_mapped == gt_shape->value;
}

}  // namespace

void validate(const EvalConfig& cfg) {
  for (double v : {cfg.match_iou, cfg.score_iou, cfg.da_iou}) {
    if (!(v > 0.0 && v <= 1.0)) throw Error("evaluation IoU thresholds must lie in (0, 1]");
  }
}

std::size_t Matching::scored_count() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const MatchedPair& p) { return p.scored; }));
}

std::optional<std::size_t> Matching::gt_for_pred(std::size_t pred, bool scored_only) const {
  for (const MatchedPair& p : pairs) {
    if (p.pred == pred && (p.scored || !scored_only)) return p.gt;
  }
  return std::nullopt;
}

Matching match_detections(const DocumentInput& pred, const DocumentInput& gt, double match_iou, double score_iou) {
  if (pred.image_width != gt.image_width || pred.image_height != gt.image_height) {
    throw ImageMismatch("prediction and ground truth describe images of different size");
  }
  if (pred.image_path && gt.image_path && *pred.image_path != *gt.image_path) {
    throw ImageMismatch("prediction and ground truth reference different images");
  }
  struct Candidate {
    double iou;
    std::size_t p, g;
  };
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < pred.elements.size(); ++p) {
    for (std::size_t g = 0; g < gt.elements.size(); ++g) {
      if (pred.elements[p].cls != gt.elements[g].cls) continue;
      const double v = iou(pred.elements[p].bbox, gt.elements[g].bbox);
      if (v >= match_iou) candidates.push_back({v, p, g});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.p, a.g) < std::tie(b.p, b.g);
  });

  Matching m;
  std::vector<bool> used_p(pred.elements.size(), false);
  std::vector<bool> used_g(gt.elements.size(), false);
  for (const Candidate& c : candidates) {
    if (used_p[c.p] || used_g[c.g]) continue;
    used_p[c.p] = used_g[c.g] = true;
    m.pairs.push_back({c.p, c.g, c.iou, c.iou >= score_iou});
  }
  std::sort(m.pairs.begin(), m.pairs.end(), [](const MatchedPair& a, const MatchedPair& b) { return a.pred < b.pred; });
  for (std::size_t p = 0; p < used_p.size(); ++p) {
    if (!used_p[p]) m.unmatched_pred.push_back(p);
  }
  for (std::size_t g = 0; g < used_g.size(); ++g) {
    if (!used_g[g]) m.unmatched_gt.push_back(g);
  }
  return m;
}

Matching match_detections(const DocumentInput& pred, const DocumentInput& gt, const EvalConfig& cfg) {
  return match_detections(pred, gt, cfg.match_iou, cfg.score_iou);
}

Scores image_scores(std::size_t tp, std::size_t n_pred, std::size_t n_gt) {
  Scores s;
  if (n_pred > 0) s.precision = static_cast<double>(tp) / static_cast<double>(n_pred);
  if (n_gt > 0) s.recall = static_cast<double>(tp) / static_cast<double>(n_gt);
  if (s.precision && s.recall) {
    const double p = *s.precision;
    const double r = *s.recall;
    s.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return s;
}

std::optional<double> mean_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

MetricsReport detection_metrics(std::span<const DocumentInput> preds, std::span<const DocumentInput> gts,
                                std::span<const Matching> matchings, const EvalConfig& cfg) {
  if (preds.size() != gts.size() || preds.size() != matchings.size()) {
    throw Error("detection_metrics needs one prediction, ground truth and matching per image");
  }
  MetricsReport report;
  std::vector<Scores> image_rows;
  std::array<std::vector<Scores>, kElementClassCount> class_rows;

  for (std::size_t i = 0; i < preds.size(); ++i) {
    const DocumentInput& pred = preds[i];
    const DocumentInput& gt = gts[i];
    const Matching& m = matchings[i];

    std::array<std::size_t, kElementClassCount> n_pred{}, n_gt{}, tp{}, unscored{};
    for (const Detection& d : pred.elements) ++n_pred[class_index(d.cls)];
    for (const Detection& d : gt.elements) ++n_gt[class_index(d.cls)];
    for (const MatchedPair& p : m.pairs) {
      const std::size_t c = class_index(gt.elements[p.gt].cls);
      if (p.scored) ++tp[c];
      else ++unscored[c];
    }
    const std::size_t total_tp = std::accumulate(tp.begin(), tp.end(), std::size_t{0});
    const std::size_t total_unscored = std::accumulate(unscored.begin(), unscored.end(), std::size_t{0});

    ImageRow row;
    row.n_pred = pred.elements.size();
    row.n_gt = gt.elements.size();
    row.tp = total_tp;
    row.scores = counts_scores(total_tp, row.n_pred, row.n_gt, total_unscored, cfg);
    image_rows.push_back(row.scores);
    report.per_image.push_back(std::move(row));

    for (std::size_t c = 0; c < kElementClassCount; ++c) {
      report.per_class[c].count += n_gt[c];
      class_rows[c].push_back(counts_scores(tp[c], n_pred[c], n_gt[c], unscored[c], cfg));
    }
  }
  for (std::size_t c = 0; c < kElementClassCount; ++c) report.per_class[c].scores = average(class_rows[c]);
  report.overall = average(image_rows);
  report.weighted = weighted_average(report.per_class);
  return report;
}

bool diagram_correct(const DocumentInput& pred, const DocumentInput& gt, const EvalConfig& cfg) {
  if (pred.elements.size() != gt.elements.size()) return false;
  const Matching m = match_detections(pred, gt, cfg.da_iou, cfg.da_iou);
  return m.unmatched_gt.empty() && m.unmatched_pred.empty();
}

double diagram_accuracy(std::span<const DocumentInput> preds, std::span<const DocumentInput> gts,
                        const EvalConfig& cfg) {
  if (preds.size() != gts.size()) throw Error("diagram_accuracy needs paired documents");
  if (preds.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += diagram_correct(preds[i], gts[i], cfg) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

ResolvedDocument resolve_document(const DocumentInput& doc, const ConnectConfig& cfg) {
  ResolvedDocument out;
  std::vector<Detection> connectors;
  for (std::size_t i = 0; i < doc.elements.size(); ++i) {
    const Detection& d = doc.elements[i];
    if (is_shape(d.cls)) out.shapes.push_back({ElementId{static_cast<std::uint32_t>(i)}, d.cls, d.bbox});
    if (is_connector(d.cls) && d.keypoints) {
      connectors.push_back(d);
      out.connector_elements.push_back(i);
    }
  }
  out.edges = resolve_connections(out.shapes, connectors, cfg);
  return out;
}

ConnectorCounts connector_counts(const DocumentInput& pred, const ResolvedDocument& pred_resolved,
                                 const DocumentInput& gt, const ResolvedDocument& gt_resolved,
                                 const Matching& matching, const EvalConfig& cfg) {
  auto check = [](const DocumentInput& doc, const ResolvedDocument& r) {
    const auto n = std::count_if(doc.elements.begin(), doc.elements.end(),
                                 [](const Detection& d) { return is_connector(d.cls); });
    if (r.edges.size() != static_cast<std::size_t>(n) || r.connector_elements.size() != r.edges.size()) {
      throw UnresolvedConnections("connector endpoints were not resolved for every connector");
    }
  };
  check(pred, pred_resolved);
  check(gt, gt_resolved);

  ConnectorCounts counts;
  for (const Detection& d : pred.elements) {
    if (const int s = connector_slot(d.cls); s >= 0) ++counts.pred_kind[static_cast<std::size_t>(s)];
  }
  for (const Detection& d : gt.elements) {
    if (const int s = connector_slot(d.cls); s >= 0) ++counts.gt_kind[static_cast<std::size_t>(s)];
  }
  counts.n_pred = std::accumulate(counts.pred_kind.begin(), counts.pred_kind.end(), std::size_t{0});
  counts.n_gt = std::accumulate(counts.gt_kind.begin(), counts.gt_kind.end(), std::size_t{0});

  auto edge_of = [](const ResolvedDocument& r, std::size_t element) -> const ConnectorEdge* {
    for (std::size_t k = 0; k < r.connector_elements.size(); ++k) {
      if (r.connector_elements[k] == element) return &r.edges[k];
    }
    return nullptr;
  };
  auto mapped = [&](const Binding& b) -> std::optional<std::size_t> {
    const auto shape = bound_shape(b);
    if (!shape) return std::nullopt;
    return matching.gt_for_pred(shape->value, true);
  };

  for (const MatchedPair& p : matching.pairs) {
    if (!p.scored) continue;
    const Detection& pd = pred.elements[p.pred];
    const int slot = connector_slot(pd.cls);
    if (slot < 0 || gt.elements[p.gt].cls != pd.cls) continue;
    const ConnectorEdge* pe = edge_of(pred_resolved, p.pred);
    const ConnectorEdge* ge = edge_of(gt_resolved, p.gt);
    if (pe == nullptr || ge == nullptr) continue;

    const auto pf = mapped(pe->from);
    const auto pt = mapped(pe->to);
    const bool pf_free = !is_bound(pe->from);
    const bool pt_free = !is_bound(pe->to);
    const auto gf = bound_shape(ge->from);
    const auto gt_to = bound_shape(ge->to);

    const bool straight = same_endpoint(pf, pf_free, gf) && same_endpoint(pt, pt_free, gt_to);
    const bool crossed = same_endpoint(pf, pf_free, gt_to) && same_endpoint(pt, pt_free, gf);
    const bool ordered = pd.cls == ElementClass::arrow && cfg.ordered_arrows;
    if (straight || (!ordered && crossed)) {
      ++counts.tp;
      ++counts.tp_kind[static_cast<std::size_t>(slot)];
    }
  }
  return counts;
}

ConnectorSlice connector_metrics(std::span<const ConnectorCounts> images) {
  ConnectorSlice slice;
  std::vector<Scores> overall;
  std::array<std::vector<Scores>, 3> kinds;
  for (const ConnectorCounts& c : images) {
    overall.push_back(image_scores(c.tp, c.n_pred, c.n_gt));
    for (std::size_t k = 0; k < 3; ++k) {
      kinds[k].push_back(image_scores(c.tp_kind[k], c.pred_kind[k], c.gt_kind[k]));
      slice.per_kind[k].count += c.gt_kind[k];
    }
  }
  for (std::size_t k = 0; k < 3; ++k) slice.per_kind[k].scores = average(kinds[k]);
  slice.overall = average(overall);
  slice.weighted = weighted_average(slice.per_kind);
  return slice;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const std::vector<char32_t> x = decode_utf8(a);
  const std::vector<char32_t> y = decode_utf8(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double cer(std::string_view pred, std::string_view gt) {
  const std::size_t n = decode_utf8(gt).size();
  return static_cast<double>(edit_distance(pred, gt)) / static_cast<double>(std::max<std::size_t>(1, n));
}

MetricsReport evaluate(std::span<const EvalImage> images, const EvalConfig& cfg, bool with_cer) {
  validate(cfg);
  std::vector<DocumentInput> preds;
  std::vector<DocumentInput> gts;
  std::vector<Matching> matchings;
  std::vector<ConnectorCounts> connectors;
  for (const EvalImage& img : images) {
    preds.push_back(img.pred);
    gts.push_back(img.gt);
    matchings.push_back(match_detections(img.pred, img.gt, cfg));
    connectors.push_back(connector_counts(img.pred, resolve_document(img.pred), img.gt, resolve_document(img.gt),
                                          matchings.back(), cfg));
  }
  MetricsReport report = detection_metrics(preds, gts, matchings, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    report.per_image[i].name = images[i].name;
    report.per_image[i].diagram_correct = diagram_correct(preds[i], gts[i], cfg);
    correct += report.per_image[i].diagram_correct ? 1 : 0;
  }
  report.diagram_accuracy =
      images.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(images.size());
  report.connectors = connector_metrics(connectors);

  report.cer_requested = with_cer;
  if (with_cer) {
    std::vector<std::optional<double>> values;
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (const MatchedPair& p : matchings[i].pairs) {
        if (!p.scored) continue;
        const Detection& g = gts[i].elements[p.gt];
        if (!is_text(g.cls) || !g.text) continue;
        const double v = cer(preds[i].elements[p.pred].text.value_or(""), *g.text);
        report.cer_rows.push_back({images[i].name, p.pred, p.gt, v});
        values.push_back(v);
      }
    }
    report.mean_cer = mean_defined(values);
  }
  return report;
}

namespace {

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

nlohmann::ordered_json scores_json(const Scores& s) {
  nlohmann::ordered_json j;
  j["recall"] = opt_json(s.recall);
  j["precision"] = opt_json(s.precision);
  j["f1"] = opt_json(s.f1);
  return j;
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "   N/A";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.3f", *v);
  return buf;
}

}  // namespace

std::string report_to_json(const MetricsReport& report, const EvalConfig& cfg) {
  nlohmann::ordered_json root;
  root["config"] = {{"match_iou", cfg.match_iou},
                    {"score_iou", cfg.score_iou},
                    {"da_iou", cfg.da_iou},
                    {"lenient_unscored", cfg.lenient_unscored},
                    {"ordered_arrows", cfg.ordered_arrows}};
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < kElementClassCount; ++c) {
    auto row = scores_json(report.per_class[c].scores);
    nlohmann::ordered_json j;
    j["class"] = std::string(class_name(kAllClasses[c]));
    j.update(row);
    j["count"] = report.per_class[c].count;
    classes.push_back(std::move(j));
  }
  root["per_class"] = std::move(classes);
  root["weighted"] = scores_json(report.weighted);
  root["overall"] = scores_json(report.overall);
  root["diagram_accuracy"] = report.diagram_accuracy;
  if (report.connectors) {
    nlohmann::ordered_json conn;
    nlohmann::ordered_json kinds = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < 3; ++k) {
      nlohmann::ordered_json j;
      j["class"] = std::string(class_name(kConnectorKinds[k]));
      j.update(scores_json(report.connectors->per_kind[k].scores));
      j["count"] = report.connectors->per_kind[k].count;
      kinds.push_back(std::move(j));
    }
    conn["per_kind"] = std::move(kinds);
    conn["weighted"] = scores_json(report.connectors->weighted);
    conn["overall"] = scores_json(report.connectors->overall);
    root["connectors"] = std::move(conn);
  }
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const ImageRow& r : report.per_image) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["n_pred"] = r.n_pred;
    j["n_gt"] = r.n_gt;
    j["tp"] = r.tp;
    j.update(scores_json(r.scores));
    j["diagram_correct"] = r.diagram_correct;
    images.push_back(std::move(j));
  }
  root["per_image"] = std::move(images);
  if (report.cer_requested) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const CerRow& r : report.cer_rows) {
      rows.push_back({{"image", r.image}, {"pred", r.pred}, {"gt", r.gt}, {"cer", r.cer}});
    }
    root["cer"] = {{"mean", opt_json(report.mean_cer)}, {"rows", std::move(rows)}};
  }
  return root.dump(1) + "\n";
}

std::string report_table(const MetricsReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %6s %6s %6s %7s\n", "class", "rec", "prec", "f1", "count");
  os << line;
  for (std::size_t c = 0; c < kElementClassCount; ++c) {
    const ClassRow& r = report.per_class[c];
    std::snprintf(line, sizeof line, "%-14s %s %s %s %7zu\n", std::string(class_name(kAllClasses[c])).c_str(),
                  cell(r.scores.recall).c_str(), cell(r.scores.precision).c_str(), cell(r.scores.f1).c_str(),
                  r.count);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %s %s %s\n", "weighted", cell(report.weighted.recall).c_str(),
                cell(report.weighted.precision).c_str(), cell(report.weighted.f1).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-14s %s %s %s\n", "per-image", cell(report.overall.recall).c_str(),
                cell(report.overall.precision).c_str(), cell(report.overall.f1).c_str());
  os << line;
  if (report.connectors) {
    const Scores& s = report.connectors->weighted;
    std::snprintf(line, sizeof line, "%-14s %s %s %s\n", "connections", cell(s.recall).c_str(),
                  cell(s.precision).c_str(), cell(s.f1).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "diagram accuracy %.4f over %zu images\n", report.diagram_accuracy,
                report.per_image.size());
  os << line;
  if (report.cer_requested && !report.mean_cer) os << "mean CER n/a (no scored text boxes with ground-truth text)\n";
  if (report.mean_cer) {
    std::snprintf(line, sizeof line, "mean CER %.4f over %zu text boxes\n", *report.mean_cer, report.cer_rows.size());
    os << line;
  }
  return os.str();
}

}  // namespace flowmind
