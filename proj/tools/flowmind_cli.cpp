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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowmind/export.hpp"
#include "flowmind/pipeline.hpp"
#include "flowmind/synth.hpp"

namespace fs = std::filesystem;
using namespace flowmind;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejects = 1;
constexpr int kExitInput = 2;
constexpr int kExitWrite = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<double> dpi;
  std::optional<double> nms_iou;
  bool no_nms = false;
  bool no_layout = false;
  std::optional<std::string> recognizer;
  std::optional<double> match_iou;
  std::optional<double> score_iou;
  std::optional<double> da_iou;
  bool lenient = false;
  bool unordered_arrows = false;
};

void add_pipeline_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (overrides FLOWMIND_CONFIG)");
  cmd->add_option("--dpi", f.dpi, "Pixels per inch of the input");
  cmd->add_option("--nms-iou", f.nms_iou, "Cross-class NMS IoU threshold");
  cmd->add_flag("--no-nms", f.no_nms, "Skip cross-class suppression");
  cmd->add_flag("--no-layout", f.no_layout, "Skip automatic typesetting");
  cmd->add_option("--recognizer", f.recognizer, "echo, none or cmd:<template with {box} and {image}>");
}

void add_eval_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--match-iou", f.match_iou, "IoU needed for a candidate match");
  cmd->add_option("--score-iou", f.score_iou, "IoU needed for a match to count as correct");
  cmd->add_option("--da-iou", f.da_iou, "IoU used by diagram accuracy");
  cmd->add_flag("--lenient", f.lenient, "Discard matches below the score IoU instead of counting them as errors");
  cmd->add_flag("--unordered-arrows", f.unordered_arrows, "Compare arrow endpoints as unordered pairs");
}

PipelineConfig effective_config(const CommonFlags& f) {
  PipelineConfig cfg;
  if (const char* env = std::getenv("FLOWMIND_CONFIG"); env != nullptr && *env != '\0') {
    cfg = apply_config_json(read_file(env), cfg);
  }
  if (!f.config_path.empty()) cfg = apply_config_json(read_file(f.config_path), cfg);
  if (f.dpi) cfg.layout.dpi = *f.dpi;
  if (f.nms_iou) cfg.nms.iou_threshold = *f.nms_iou;
  if (f.no_nms) cfg.nms_enabled = false;
  if (f.no_layout) cfg.layout.enabled = false;
  if (f.recognizer) cfg.recognizer = parse_recognizer(*f.recognizer);
  if (f.match_iou) cfg.eval.match_iou = *f.match_iou;
  if (f.score_iou) cfg.eval.score_iou = *f.score_iou;
  if (f.da_iou) cfg.eval.da_iou = *f.da_iou;
  if (f.lenient) cfg.eval.lenient_unscored = true;
  if (f.unordered_arrows) cfg.eval.ordered_arrows = false;
  validate(cfg);
  return cfg;
}

bool is_input_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return fs::is_regular_file(p) && (ext == ".det" || ext == ".gt");
}

std::vector<fs::path> list_inputs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (is_input_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void print_warnings(const std::string& source, const ConversionReport& report) {
  for (const std::string& w : report.warnings) std::cerr << source << ": " << w << "\n";
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

struct ConvertArgs {
  CommonFlags flags;
  std::vector<std::string> inputs;
  std::vector<std::string> outs;
  std::string out_dir;
  std::vector<std::string> formats;
  std::string report_path;
};

/// Converts one document and writes every target. Returns an exit code.
int convert_one(const fs::path& input, const std::vector<fs::path>& targets, const PipelineConfig& cfg,
                nlohmann::ordered_json* reports) {
  ParsedDocument parsed;
  try {
    parsed = load_document(input);
  } catch (const Error& e) {
    std::cerr << input.string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  ConversionResult result;
  std::vector<std::string> rendered;
  try {
    result = convert_document(parsed.document, cfg, parsed.report);
    for (const fs::path& t : targets) rendered.push_back(render_output(result, output_format_for(t), cfg.layout.dpi));
  } catch (const Error& e) {
    std::cerr << input.string() << ": " << e.what() << "\n";
    return kExitInput;
  }
  print_warnings(input.string(), result.report);
  try {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (targets[i].has_parent_path()) fs::create_directories(targets[i].parent_path());
      write_file_atomic(targets[i], rendered[i]);
    }
  } catch (const std::exception& e) {
    std::cerr << input.string() << ": " << e.what() << "\n";
    return kExitWrite;
  }
  if (reports != nullptr) {
    reports->push_back(nlohmann::ordered_json::parse(conversion_report_json(result.report, cfg, input.string())));
  }
  return kExitOk;
}

int run_convert(const ConvertArgs& args) {
  PipelineConfig cfg;
  try {
    cfg = effective_config(args.flags);
  } catch (const Error& e) {
    std::cerr << "convert: " << e.what() << "\n";
    return kExitInput;
  }

  std::vector<fs::path> inputs;
  for (const std::string& in : args.inputs) {
    if (fs::is_directory(in)) {
      const auto listed = list_inputs(in);
      inputs.insert(inputs.end(), listed.begin(), listed.end());
    } else {
      inputs.emplace_back(in);
    }
  }
  const bool batch = inputs.size() != 1 || fs::is_directory(args.inputs.front());
  if (batch && (args.out_dir.empty() || args.formats.empty())) {
    std::cerr << "convert: batch input needs --out-dir and at least one --format\n";
    return kExitInput;
  }
  if (!batch && args.outs.empty() && (args.out_dir.empty() || args.formats.empty())) {
    std::cerr << "convert: select at least one output with --out (or --out-dir with --format)\n";
    return kExitInput;
  }
  try {
    for (const std::string& o : args.outs) output_format_for(o);
    for (const std::string& f : args.formats) output_format_for("x." + f);
  } catch (const Error& e) {
    std::cerr << "convert: " << e.what() << "\n";
    return kExitInput;
  }

  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  std::size_t failures = 0;
  int last_code = kExitOk;
  for (const fs::path& input : inputs) {
    std::vector<fs::path> targets;
    if (!batch) targets.assign(args.outs.begin(), args.outs.end());
    if (!args.out_dir.empty()) {
      for (const std::string& f : args.formats) targets.push_back(fs::path(args.out_dir) / (input.stem().string() + "." + f));
    }
    const int code = convert_one(input, targets, cfg, &reports);
    if (code != kExitOk) {
      ++failures;
      last_code = code;
    }
  }
  if (!args.report_path.empty()) {
    nlohmann::ordered_json root;
    root["config"] = nlohmann::ordered_json::parse(pipeline_config_to_json(cfg));
    root["documents"] = std::move(reports);
    try {
      write_file_atomic(args.report_path, root.dump(1) + "\n");
    } catch (const Error& e) {
      std::cerr << "convert: " << e.what() << "\n";
      return kExitWrite;
    }
  }
  if (!batch) return last_code;
  if (failures > 0) std::cerr << "convert: " << failures << " of " << inputs.size() << " file(s) failed\n";
  return failures == inputs.size() && !inputs.empty() ? last_code : kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  CommonFlags flags;
  std::string pred;
  std::string gt;
  std::string manifest;
  std::string report_path;
  bool cer = false;
};

/// Input files keyed by stem; `preferred` wins when a stem has both a .det and a .gt.
std::map<std::string, fs::path> by_stem(const fs::path& dir, const std::string& preferred) {
  std::map<std::string, fs::path> out;
  for (const fs::path& p : list_inputs(dir)) {
    auto [it, inserted] = out.emplace(p.stem().string(), p);
    if (!inserted && p.extension() == preferred) it->second = p;
  }
  return out;
}

std::vector<std::pair<fs::path, fs::path>> pair_inputs(const EvalArgs& args) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (!fs::is_directory(args.pred) || !fs::is_directory(args.gt)) {
    if (fs::is_directory(args.pred) || fs::is_directory(args.gt)) {
      throw Error("prediction and ground truth must both be files or both be directories");
    }
    pairs.emplace_back(args.pred, args.gt);
    return pairs;
  }
  if (!args.manifest.empty()) {
    const auto root = nlohmann::json::parse(read_file(args.manifest), nullptr, false);
    if (root.is_discarded() || !root.contains("images") || !root["images"].is_array()) {
      throw Error("manifest must hold an images array");
    }
    for (const auto& img : root["images"]) {
      if (!img.contains("stem") || !img["stem"].is_string()) throw Error("manifest entry without stem");
      const std::string stem = img["stem"].get<std::string>();
      const std::string det = img.value("detections", stem + ".det");
      const std::string gt = img.value("ground_truth", stem + ".gt");
      const fs::path p = fs::path(args.pred) / det;
      const fs::path g = fs::path(args.gt) / gt;
      if (!fs::exists(p) || !fs::exists(g)) throw Error("manifest stem '" + stem + "' has no file pair");
      pairs.emplace_back(p, g);
    }
    return pairs;
  }
  const auto preds = by_stem(args.pred, ".det");
  const auto gts = by_stem(args.gt, ".gt");
  std::vector<std::string> missing;
  for (const auto& [stem, path] : preds) {
    if (!gts.count(stem)) missing.push_back(stem + " (no ground truth)");
  }
  for (const auto& [stem, path] : gts) {
    if (!preds.count(stem)) missing.push_back(stem + " (no prediction)");
  }
  if (!missing.empty()) {
    std::string msg = "unpaired stems:";
    for (const std::string& m : missing) msg += " " + m;
    throw Error(msg);
  }
  for (const auto& [stem, path] : preds) pairs.emplace_back(path, gts.at(stem));
  if (pairs.empty()) throw Error("no .det or .gt files to evaluate");
  return pairs;
}

int run_eval(const EvalArgs& args) {
  PipelineConfig cfg;
  std::vector<EvalImage> images;
  try {
    cfg = effective_config(args.flags);
    for (const auto& [p, g] : pair_inputs(args)) {
      ParsedDocument pred = load_document(p);
      ParsedDocument gt = load_document(g);
      images.push_back({p.stem().string(), std::move(pred.document), std::move(gt.document)});
    }
  } catch (const std::exception& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return kExitInput;
  }
  MetricsReport report;
  try {
    report = evaluate(images, cfg.eval, args.cer);
  } catch (const Error& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return kExitInput;
  }
  std::cout << report_table(report);
  if (!args.report_path.empty()) {
    try {
      write_file_atomic(args.report_path, report_to_json(report, cfg.eval));
    } catch (const Error& e) {
      std::cerr << "eval: " << e.what() << "\n";
      return kExitWrite;
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  SynthConfig cfg;
  std::string out_dir = "corpus";
};

int run_synth(const SynthArgs& args) {
  std::vector<SynthImage> images;
  try {
    images = generate(args.cfg);
  } catch (const Error& e) {
    std::cerr << "synth: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) throw OutputWriteError("cannot create " + args.out_dir + ": " + ec.message());
    const fs::path dir(args.out_dir);
    for (const SynthImage& img : images) {
      write_file_atomic(dir / (img.stem + ".gt"), serialize_document(img.ground_truth, WireMode::ground_truth));
      write_file_atomic(dir / (img.stem + ".det"), serialize_document(img.detections, WireMode::detections));
    }
    write_file_atomic(dir / "manifest.json", corpus_manifest(args.cfg, images));
  } catch (const std::exception& e) {
    std::cerr << "synth: " << e.what() << "\n";
    return kExitWrite;
  }
  std::cout << "wrote " << images.size() << " image pair(s) to " << args.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// layout
// ---------------------------------------------------------------------------

struct LayoutArgs {
  CommonFlags flags;
  std::string input;
  std::vector<std::string> outs;
};

int run_layout(const LayoutArgs& args) {
  std::vector<std::string> rendered;
  try {
    const PipelineConfig cfg = effective_config(args.flags);
    const DiagramDoc doc = diagram_from_json(read_file(args.input));
    validate(doc);
    const DiagramDoc laid = cfg.layout.enabled ? autotypeset(doc, cfg.layout) : doc;
    for (const std::string& o : args.outs) rendered.push_back(render_diagram(laid, output_format_for(o), cfg.layout.dpi));
  } catch (const std::exception& e) {
    std::cerr << "layout: " << e.what() << "\n";
    return kExitInput;
  }
  try {
    for (std::size_t i = 0; i < args.outs.size(); ++i) write_file_atomic(args.outs[i], rendered[i]);
  } catch (const std::exception& e) {
    std::cerr << "layout: " << e.what() << "\n";
    return kExitWrite;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

int run_validate(const std::vector<std::string>& inputs) {
  int code = kExitOk;
  for (const std::string& in : inputs) {
    try {
      const ParsedDocument parsed = load_document(in);
      const IngestReport& r = parsed.report;
      std::cout << in << ": " << r.accepted_count << " accepted, " << r.rejected.size() << " rejected, "
                << r.clamped_count << " clamped\n";
      for (const IngestIssue& i : r.rejected) std::cout << "  reject " << i.index << ": " << i.reason << "\n";
      for (const IngestIssue& i : r.warnings) std::cout << "  warning " << i.index << ": " << i.reason << "\n";
      if (!r.rejected.empty() && code == kExitOk) code = kExitRejects;
    } catch (const Error& e) {
      std::cerr << in << ": " << e.what() << "\n";
      code = kExitInput;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turns flowchart and mind-map element detections into editable diagrams"};
  app.require_subcommand(1);

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "Convert detection files into diagrams");
  c->add_option("inputs", convert.inputs, "Detection files (.det, .gt) or directories")->required();
  c->add_option("--out", convert.outs, "Output file; format from extension (.svg .drawio .pptx .det .json)");
  c->add_option("--out-dir", convert.out_dir, "Output directory for batch conversion");
  c->add_option("--format", convert.formats, "Batch output extension without the dot (svg, drawio, pptx, det, json)");
  c->add_option("--report", convert.report_path, "Write the conversion report as JSON");
  add_pipeline_flags(c, convert.flags);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score predictions against ground truth");
  e->add_option("pred", eval.pred, "Prediction file or directory")->required();
  e->add_option("gt", eval.gt, "Ground-truth file or directory")->required();
  e->add_option("--manifest", eval.manifest, "Corpus manifest that pairs the files");
  e->add_option("--report", eval.report_path, "Write the metrics report as JSON");
  e->add_flag("--cer", eval.cer, "Append the character error rate table");
  e->add_option("--config", eval.flags.config_path, "JSON config file (overrides FLOWMIND_CONFIG)");
  add_eval_flags(e, eval.flags);

  SynthArgs synth;
  Perturbation& noise = synth.cfg.perturbation;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus");
  s->add_option("--out-dir", synth.out_dir, "Corpus directory")->capture_default_str();
  s->add_option("--seed", synth.cfg.seed, "Random seed")->capture_default_str();
  s->add_option("--n", synth.cfg.n_images, "Number of images")->capture_default_str();
  s->add_option("--rows", synth.cfg.rows, "Grid rows")->capture_default_str();
  s->add_option("--cols", synth.cfg.cols, "Grid columns")->capture_default_str();
  s->add_option("--connector-density", synth.cfg.connector_density)->capture_default_str();
  s->add_option("--label-prob", synth.cfg.label_prob)->capture_default_str();
  s->add_option("--drop-prob", noise.drop_prob)->capture_default_str();
  s->add_option("--duplicate-prob", noise.duplicate_prob)->capture_default_str();
  s->add_option("--confusion-prob", noise.class_confusion_prob)->capture_default_str();
  s->add_option("--bbox-jitter", noise.bbox_jitter_px, "Box noise, pixels")->capture_default_str();
  s->add_option("--keypoint-jitter", noise.keypoint_jitter_px, "Keypoint noise, pixels")->capture_default_str();
  s->add_option("--score-min", noise.score_min, "Lowest synthetic score")->capture_default_str();

  LayoutArgs layout;
  auto* l = app.add_subcommand("layout", "Typeset an existing diagram document");
  l->add_option("input", layout.input, "Diagram document (.json)")->required();
  l->add_option("--out", layout.outs, "Output file (.svg .drawio .pptx .json)")->required();
  add_pipeline_flags(l, layout.flags);

  std::vector<std::string> validate_inputs;
  auto* v = app.add_subcommand("validate", "Check detection files without converting");
  v->add_option("inputs", validate_inputs, "Files to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitInput;
  }

  if (c->parsed()) return run_convert(convert);
  if (e->parsed()) return run_eval(eval);
  if (s->parsed()) return run_synth(synth);
  if (l->parsed()) return run_layout(layout);
  return run_validate(validate_inputs);
}
