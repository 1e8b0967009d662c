/* Copyright 2026 The liftaxle Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "liftaxle/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "liftaxle/annotations.hpp"
#include "liftaxle/backend.hpp"
#include "liftaxle/cascade.hpp"
#include "liftaxle/error.hpp"
#include "liftaxle/metrics.hpp"
#include "liftaxle/overlay.hpp"
#include "liftaxle/report.hpp"
#include "liftaxle/synthetic.hpp"

namespace liftaxle {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

json RunManifest::to_json() const {
  json digests = json::object();
  for (const auto& [path, digest] : input_digests) digests[path] = digest;
  return {{"command", command},
          {"config", config},
          {"input_digests", digests},
          {"tool_version", tool_version},
          {"duration_seconds", duration_seconds}};
}

namespace {

using Clock = std::chrono::steady_clock;

// Files are staged in memory and written only once the command has succeeded.
class StagedOutputs {
 public:
  void add(fs::path path, std::string content) {
    files_.push_back({std::move(path), std::move(content)});
  }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        fs::path tmp = path;
        tmp += ".partial";
        {
          std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
          if (!out) throw Error("cannot open " + tmp.string() + " for writing");
          out.write(content.data(), static_cast<std::streamsize>(content.size()));
          if (!out) throw Error("failed writing " + tmp.string());
        }
        fs::rename(tmp, path);
        written.push_back(path);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      for (const auto& [path, content] : files_) {
        fs::path tmp = path;
        tmp += ".partial";
        fs::remove(tmp, ec);
      }
      throw;
    }
  }

 private:
  struct File {
    fs::path path;
    std::string content;
  };
  std::vector<File> files_;
};

std::string read_input(const fs::path& path, RunManifest& run) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  std::string text = os.str();
  run.input_digests[path.string()] = sha256_hex(text);
  return text;
}

void finish(RunManifest& run, Clock::time_point start) {
  run.duration_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
}

// Writes to `out_path` when given, stdout otherwise.
void emit(StagedOutputs& staged, const std::string& out_path, std::string content,
          std::ostream& out) {
  if (out_path.empty()) {
    out << content;
  } else {
    staged.add(out_path, std::move(content));
  }
}

std::string file_stem_for(const std::string& image_id) {
  std::string s = image_id;
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '/' || c == '\\' || c == ':'; }, '_');
  return s;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string gt;
  std::string predictions;
  std::string classes;
  std::string labels = "detection";
  std::string split = "all";
  double iou = 0.5;
  double conf = 0.25;
  double ap_conf = 0.001;
  std::string iou_kind = "box";
  std::string format = "json";
  std::string out;
  std::string pr_csv;
  std::string model_name = "model";
  bool no_manifest = false;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  RunManifest run;
  run.command = "evaluate";
  run.config = {{"iou", a.iou},       {"conf", a.conf},     {"ap_conf", a.ap_conf},
                {"iou_kind", a.iou_kind}, {"format", a.format}, {"labels", a.labels},
                {"split", a.split},   {"classes", a.classes}};

  EvalOptions opts;
  opts.iou_threshold = a.iou;
  opts.confidence_threshold = a.conf;
  opts.ranking_confidence = a.ap_conf;
  opts.iou_kind = parse_iou_kind(a.iou_kind);
  if (!a.classes.empty()) opts.classes = parse_class_list(a.classes);
  const LabelKind kind =
      a.labels == "segmentation" ? LabelKind::segmentation : LabelKind::detection;

  DatasetManifest manifest = parse_manifest(read_input(a.gt, run), opts.classes);
  if (a.split != "all") {
    const SplitTag tag = parse_split_tag(a.split);
    std::erase_if(manifest.entries, [tag](const ManifestEntry& e) { return e.split != tag; });
  }
  const auto truth = load_ground_truth(manifest, fs::path(a.gt).parent_path(), kind);
  const PredictionSet preds = load_predictions(read_input(a.predictions, run), opts.classes);

  std::vector<EvalImage> images;
  for (const auto& e : manifest.entries) {
    EvalImage img;
    img.image_id = e.image_id;
    img.size = e.size();
    img.ground_truth = truth.at(e.image_id);
    if (const auto it = preds.find(e.image_id); it != preds.end()) {
      img.predictions = it->second.detections;
    }
    images.push_back(std::move(img));
  }
  std::size_t ignored = 0;
  for (const auto& [id, ip] : preds) ignored += manifest.find(id) == nullptr;
  if (ignored > 0) {
    err << "warning: ignoring predictions for " << ignored
        << " image(s) not present in the ground-truth manifest\n";
  }

  const EvalReport report = evaluate(images, opts);
  finish(run, start);

  std::string body;
  if (a.format == "json") {
    json doc = report_to_json(report);
    if (!a.no_manifest) doc["run"] = run.to_json();
    body = doc.dump(2) + "\n";
  } else if (a.format == "markdown") {
    body = report_to_markdown(report, a.model_name);
    if (!a.no_manifest) body += "\n<!-- run: " + run.to_json().dump() + " -->\n";
  } else {
    if (!a.no_manifest) body = "# run: " + run.to_json().dump() + "\n";
    body += report_to_csv(report);
    body += "\n" + confusion_to_csv(report.confusion, opts.classes.empty()
                                                          ? ClassMap{}
                                                          : opts.classes);
  }
  StagedOutputs staged;
  emit(staged, a.out, std::move(body), out);
  if (!a.pr_csv.empty()) staged.add(a.pr_csv, envelopes_to_csv(report));
  staged.commit();
  return 0;
}

// ---- cascade ---------------------------------------------------------------

struct CascadeArgs {
  std::string predictions;
  std::string lifted;
  std::string config;
  std::string out;
  std::string direction;
  std::string images;
  bool overlay = false;
  bool no_manifest = false;
};

std::vector<Detection> of_class(const std::vector<Detection>& dets, int cls, bool need_mask) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (d.class_id == cls && (!need_mask || d.mask)) out.push_back(d);
  }
  return out;
}

int cmd_cascade(const CascadeArgs& a, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  RunManifest run;
  run.command = "cascade";

  CascadeConfig cfg;
  if (!a.config.empty()) cfg = parse_cascade_config(read_input(a.config, run));
  if (!a.direction.empty()) cfg.direction = parse_travel_direction(a.direction);
  cfg.validate();
  if (a.overlay && a.images.empty()) throw ConfigError("--overlay requires --images DIR");
  if (a.overlay && !overlay_supported()) {
    throw ConfigError("--overlay is not available in this build (OpenCV not found)");
  }
  run.config = to_json(cfg);

  const PredictionSet dets = load_predictions(read_input(a.predictions, run));
  std::optional<PredictionSet> lifted;
  if (!a.lifted.empty()) lifted = load_predictions(read_input(a.lifted, run));

  std::set<std::string> ids;
  for (const auto& [id, ip] : dets) ids.insert(id);
  if (lifted) {
    for (const auto& [id, ip] : *lifted) ids.insert(id);
  }

  StagedOutputs staged;
  const fs::path out_dir(a.out);
  json index = json::array();
  std::size_t trucks = 0;
  for (const std::string& id : ids) {
    std::vector<Detection> t, ax, masks;
    if (const auto it = dets.find(id); it != dets.end()) {
      t = of_class(it->second.detections, cfg.truck_class, false);
      ax = of_class(it->second.detections, cfg.axle_class, false);
      if (!lifted && cfg.lifted_class != cfg.truck_class && cfg.lifted_class != cfg.axle_class) {
        masks = of_class(it->second.detections, cfg.lifted_class, true);
      }
    }
    if (lifted) {
      if (const auto it = lifted->find(id); it != lifted->end()) {
        masks = of_class(it->second.detections, cfg.lifted_class, false);
      }
    }
    const CascadeResult result = run_cascade(t, ax, masks, cfg);
    trucks += result.trucks.size();
    const std::string file = file_stem_for(id) + ".json";
    staged.add(out_dir / file, to_json(result, id).dump(2) + "\n");
    index.push_back({{"image_id", id}, {"records", file}, {"trucks", result.trucks.size()}});

    if (a.overlay) {
      const fs::path image = find_image(a.images, id);
      if (image.empty()) {
        err << "warning: no image found for '" << id << "' in " << a.images << "\n";
      } else {
        read_input(image, run);  // records the digest
        staged.add(out_dir / "overlay" / (file_stem_for(id) + ".png"),
                   render_overlay(image, result));
      }
    }
  }
  finish(run, start);
  json doc = {{"images", index}};
  if (!a.no_manifest) doc["run"] = run.to_json();
  staged.add(out_dir / "index.json", doc.dump(2) + "\n");
  staged.commit();
  out << "processed " << ids.size() << " image(s), " << trucks << " truck record(s)\n";
  return 0;
}

// ---- dataset ---------------------------------------------------------------

struct SplitArgs {
  std::string manifest;
  std::string out;
  double fraction = 0.8;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
  RunManifest run;
  DatasetManifest m = parse_manifest(read_input(a.manifest, run));
  for (auto& e : m.entries) e.split = SplitTag::unassigned;
  const DatasetManifest split = split_dataset(m, a.fraction, a.seed);
  StagedOutputs staged;
  emit(staged, a.out, serialize_manifest(split), out);
  staged.commit();
  if (!a.out.empty()) {
    out << "train " << split.count(SplitTag::train) << ", val " << split.count(SplitTag::val)
        << "\n";
  }
  return 0;
}

struct SummarizeArgs {
  std::string manifest;
  std::string predictions;
  std::string config;
  std::string format = "markdown";
  std::string out;
  int min_axles = 3;
  int max_axles = 9;
  bool no_manifest = false;
};

int cmd_summarize(const SummarizeArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  RunManifest run;
  run.command = "dataset summarize";
  CascadeConfig cfg;
  if (!a.config.empty()) cfg = parse_cascade_config(read_input(a.config, run));
  run.config = {{"cascade", to_json(cfg)}, {"source", a.predictions.empty() ? "labels" : "predictions"}};

  const DatasetManifest manifest = parse_manifest(read_input(a.manifest, run));
  std::vector<TruckObservation> observations;
  auto observe = [&](const std::string& id, const std::vector<Detection>& t,
                     const std::vector<Detection>& ax) {
    const CascadeResult r = run_cascade(t, ax, {}, cfg);
    for (const auto& rec : r.trucks) {
      observations.push_back({id, static_cast<int>(rec.axle_count())});
    }
  };

  if (!a.predictions.empty()) {
    const PredictionSet preds = load_predictions(read_input(a.predictions, run));
    for (const auto& [id, ip] : preds) {
      observe(id, of_class(ip.detections, cfg.truck_class, false),
              of_class(ip.detections, cfg.axle_class, false));
    }
  } else {
    const auto truth =
        load_ground_truth(manifest, fs::path(a.manifest).parent_path(), LabelKind::detection);
    for (const auto& [id, instances] : truth) {
      std::vector<Detection> t, ax;
      for (const auto& g : instances) {
        Detection d{g.class_id, g.box(), std::nullopt, 1.0, id};
        if (g.class_id == cfg.truck_class) t.push_back(d);
        if (g.class_id == cfg.axle_class) ax.push_back(d);
      }
      observe(id, t, ax);
    }
  }
  const AxleCountTable table = summarize_dataset(manifest, observations);
  finish(run, start);

  std::string body;
  if (a.format == "json") {
    json doc = {{"table", json::parse(table.to_json())}};
    if (!a.no_manifest) doc["run"] = run.to_json();
    body = doc.dump(2) + "\n";
  } else {
    body = table.to_markdown(a.min_axles, a.max_axles);
    if (!a.no_manifest) body += "\n<!-- run: " + run.to_json().dump() + " -->\n";
  }
  StagedOutputs staged;
  emit(staged, a.out, std::move(body), out);
  staged.commit();
  return 0;
}

struct GenConfigArgs {
  std::string kind = "detection";
  std::vector<std::string> overrides;
  std::string out;
  bool no_manifest = false;
};

int cmd_gen_config(const GenConfigArgs& a, std::ostream& out) {
  RunManifest run;
  run.command = "dataset gen-config";
  run.config = {{"kind", a.kind}, {"set", a.overrides}};
  TrainingOverrides overrides;
  for (const auto& o : a.overrides) overrides.set(o);
  const TrainingConfig cfg = emit_training_config(parse_model_kind(a.kind), overrides);
  std::string body;
  if (!a.no_manifest) body = "# run: " + run.to_json().dump() + "\n";
  body += cfg.to_text();
  StagedOutputs staged;
  emit(staged, a.out, std::move(body), out);
  staged.commit();
  return 0;
}

struct SynthArgs {
  std::string spec;
  std::string out;
  bool no_manifest = false;
};

PredictionSet to_prediction_set(const std::vector<SyntheticScene>& scenes, bool lifted) {
  PredictionSet set;
  for (const auto& s : scenes) {
    set[s.image_id] = {s.image_id, s.size, lifted ? s.lifted_detections : s.detections};
  }
  return set;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto start = Clock::now();
  RunManifest run;
  run.command = "dataset synth";
  const SyntheticSetSpec spec = parse_synthetic_set_spec(read_input(a.spec, run));
  const std::vector<SyntheticScene> scenes = generate_synthetic_set(spec);

  const fs::path dir(a.out);
  StagedOutputs staged;
  DatasetManifest det_manifest, lifted_manifest;
  json truth = json::array();
  for (const auto& s : scenes) {
    const std::string stem = file_stem_for(s.image_id);
    staged.add(dir / "labels" / (stem + ".txt"), write_labels(s.detection_truth, s.size));
    staged.add(dir / "lifted_labels" / (stem + ".txt"), write_labels(s.lifted_truth, s.size));
    det_manifest.entries.push_back(
        {s.image_id, s.size.width, s.size.height, "labels/" + stem + ".txt", SplitTag::unassigned, "synthetic"});
    lifted_manifest.entries.push_back({s.image_id, s.size.width, s.size.height,
                                       "lifted_labels/" + stem + ".txt", SplitTag::unassigned,
                                       "synthetic"});
    json trucks = json::array();
    for (const auto& t : s.trucks) {
      trucks.push_back({{"axles", t.axle_count}, {"lifted", t.lifted_ordinals}});
    }
    truth.push_back({{"id", s.image_id}, {"trucks", trucks}});
  }
  staged.add(dir / "manifest.json", serialize_manifest(det_manifest));
  staged.add(dir / "lifted_manifest.json", serialize_manifest(lifted_manifest));
  staged.add(dir / "predictions.json", serialize_predictions(to_prediction_set(scenes, false)));
  staged.add(dir / "lifted_predictions.json",
             serialize_predictions(to_prediction_set(scenes, true)));
  finish(run, start);
  json doc = {{"images", truth}, {"direction", std::string(to_string(spec.scene.direction))}};
  if (!a.no_manifest) doc["run"] = run.to_json();
  staged.add(dir / "truth.json", doc.dump(2) + "\n");
  staged.commit();
  out << "wrote " << scenes.size() << " synthetic image(s) to " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lifted truck axle detection: evaluation, cascade and dataset tooling", "liftaxle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const std::vector<std::string> kFormats = {"json", "markdown", "csv"};

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score recorded predictions against ground truth");
  evaluate->add_option("--gt", ev.gt, "Ground-truth manifest (JSON)")->required();
  evaluate->add_option("--predictions", ev.predictions, "Predictions file (JSON)")->required();
  evaluate->add_option("--classes", ev.classes, "Comma-separated class names in id order, e.g. truck,axle");
  evaluate->add_option("--labels", ev.labels, "Label file syntax")
      ->check(CLI::IsMember({"detection", "segmentation"}))->capture_default_str();
  evaluate->add_option("--split", ev.split, "Manifest split to evaluate")
      ->check(CLI::IsMember({"all", "train", "val", "unassigned"}))->capture_default_str();
  evaluate->add_option("--iou", ev.iou, "IoU threshold for P/R/F1 and the confusion matrix")->capture_default_str();
  evaluate->add_option("--conf", ev.conf, "Confidence threshold for P/R/F1 and the confusion matrix")->capture_default_str();
  evaluate->add_option("--ap-conf", ev.ap_conf, "Confidence floor for AP ranking")->capture_default_str();
  evaluate->add_option("--iou-kind", ev.iou_kind, "box or mask")
      ->check(CLI::IsMember({"box", "mask"}))->capture_default_str();
  evaluate->add_option("--format", ev.format, "Report format")->check(CLI::IsMember(kFormats))->capture_default_str();
  evaluate->add_option("--out", ev.out, "Report path (stdout when omitted)");
  evaluate->add_option("--pr-csv", ev.pr_csv, "Also write the IoU-0.5 precision envelopes as CSV");
  evaluate->add_option("--model-name", ev.model_name, "Label of the aggregate Markdown row")->capture_default_str();
  evaluate->add_flag("--no-manifest", ev.no_manifest, "Omit the run manifest for byte-stable output");

  CascadeArgs ca;
  auto* cascade = app.add_subcommand("cascade", "Group, order and mark axles per truck");
  cascade->add_option("--predictions", ca.predictions, "Truck/axle predictions (JSON)")->required();
  cascade->add_option("--lifted", ca.lifted, "Lifted-axle mask predictions (JSON)");
  cascade->add_option("--config", ca.config, "Cascade config (JSON)");
  cascade->add_option("--out", ca.out, "Output directory")->required();
  cascade->add_option("--direction", ca.direction, "front-left or front-right (overrides config)");
  cascade->add_flag("--overlay", ca.overlay, "Write annotated image copies (needs --images)");
  cascade->add_option("--images", ca.images, "Directory holding <image_id>.png/.jpg");
  cascade->add_flag("--no-manifest", ca.no_manifest, "Omit the run manifest");

  auto* dataset = app.add_subcommand("dataset", "Dataset tooling");
  dataset->require_subcommand(1);

  SplitArgs sp;
  auto* split = dataset->add_subcommand("split", "Deterministic train/val split");
  split->add_option("--manifest", sp.manifest, "Input manifest (JSON)")->required();
  split->add_option("--out", sp.out, "Output manifest (stdout when omitted)");
  split->add_option("--fraction", sp.fraction, "Train fraction")->capture_default_str();
  split->add_option("--seed", sp.seed, "Shuffle seed")->capture_default_str();

  SummarizeArgs su;
  auto* summarize = dataset->add_subcommand("summarize", "Trucks per source and axle count");
  summarize->add_option("--manifest", su.manifest, "Manifest (JSON)")->required();
  summarize->add_option("--predictions", su.predictions,
                        "Derive axle counts from these predictions instead of the labels");
  summarize->add_option("--config", su.config, "Cascade config (JSON)");
  summarize->add_option("--format", su.format, "markdown or json")
      ->check(CLI::IsMember({"markdown", "json"}))->capture_default_str();
  summarize->add_option("--min-axles", su.min_axles, "First Markdown column")->capture_default_str();
  summarize->add_option("--max-axles", su.max_axles, "Last Markdown column")->capture_default_str();
  summarize->add_option("--out", su.out, "Output path (stdout when omitted)");
  summarize->add_flag("--no-manifest", su.no_manifest, "Omit the run manifest");

  GenConfigArgs gc;
  auto* gen = dataset->add_subcommand("gen-config", "Emit the training hyperparameters");
  gen->add_option("--kind", gc.kind, "detection or segmentation")
      ->check(CLI::IsMember({"detection", "segmentation"}))->capture_default_str();
  gen->add_option("--set", gc.overrides, "Override as key=value (repeatable)");
  gen->add_option("--out", gc.out, "Output path (stdout when omitted)");
  gen->add_flag("--no-manifest", gc.no_manifest, "Omit the run manifest comment");

  SynthArgs sy;
  auto* synth = dataset->add_subcommand("synth", "Materialize synthetic labels and predictions");
  synth->add_option("--spec", sy.spec, "Synthetic set spec (JSON)")->required();
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_flag("--no-manifest", sy.no_manifest, "Omit the run manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(ev, out, err);
    if (cascade->parsed()) return cmd_cascade(ca, out, err);
    if (split->parsed()) return cmd_split(sp, out);
    if (summarize->parsed()) return cmd_summarize(su, out);
    if (gen->parsed()) return cmd_gen_config(gc, out);
    if (synth->parsed()) return cmd_synth(sy, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace liftaxle
