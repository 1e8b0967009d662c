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

#include "liftaxle/annotations.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "liftaxle/error.hpp"
#include "liftaxle/format.hpp"

namespace liftaxle {

namespace {

using nlohmann::json;

// Slack for normalized coordinates that land a rounding step outside [0, 1].
constexpr double kNormalizedSlack = 1e-9;

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// Calls fn(line_number, tokens) for every non-blank line.
template <typename Fn>
void for_each_label_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const auto tokens = split_whitespace(text.substr(pos, end - pos));
    if (!tokens.empty()) fn(line_no, tokens);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

void check_size(ImageSize size) {
  if (size.width <= 0 || size.height <= 0) {
    throw ConfigError("image dimensions must be positive");
  }
}

int parse_class_token(std::size_t line, std::string_view token,
                      const ClassMap& classes) {
  int id = 0;
  if (!parse_int(token, id)) {
    throw LabelParseError(line, std::string(token), "class id is not an integer");
  }
  const bool known = classes.empty() ? id >= 0 : classes.contains(id);
  if (!known) throw LabelParseError(line, std::string(token), "unknown class id");
  return id;
}

double parse_normalized(std::size_t line, std::string_view token) {
  double v = 0.0;
  if (!parse_double(token, v)) {
    throw LabelParseError(line, std::string(token), "field is not a number");
  }
  if (v < 0.0 || v > 1.0) {
    throw LabelParseError(line, std::string(token), "coordinate outside [0, 1]");
  }
  return v;
}

void check_json_object_member(const json& obj, const char* key,
                              const std::string& path) {
  if (!obj.contains(key)) throw ValidationError(path + "/" + key, "missing field");
}

}  // namespace

ClassMap truck_axle_classes() { return {{0, "truck"}, {1, "axle"}}; }

ClassMap lifted_axle_classes() { return {{0, "lifted_axle"}}; }

ClassMap parse_class_list(std::string_view comma_separated) {
  ClassMap out;
  int id = 0;
  std::size_t pos = 0;
  while (pos <= comma_separated.size()) {
    const std::size_t end =
        std::min(comma_separated.find(',', pos), comma_separated.size());
    const std::string_view name = comma_separated.substr(pos, end - pos);
    if (name.empty()) throw ConfigError("empty class name in class list");
    out.emplace(id++, std::string(name));
    if (end == comma_separated.size()) break;
    pos = end + 1;
  }
  return out;
}

BoundingBox GroundTruthInstance::box() const {
  if (const auto* b = std::get_if<BoundingBox>(&geometry)) return *b;
  return std::get<PolygonMask>(geometry).bounds();
}

std::vector<GroundTruthInstance> parse_detection_labels(std::string_view text,
                                                        ImageSize size,
                                                        const ClassMap& classes,
                                                        const std::string& image_id) {
  check_size(size);
  std::vector<GroundTruthInstance> out;
  for_each_label_line(text, [&](std::size_t line, const auto& tokens) {
    if (tokens.size() != 5) {
      throw LabelParseError(line, std::string(tokens.back()),
                            "expected 5 fields, got " + std::to_string(tokens.size()));
    }
    const int cls = parse_class_token(line, tokens[0], classes);
    const double cx = parse_normalized(line, tokens[1]);
    const double cy = parse_normalized(line, tokens[2]);
    const double w = parse_normalized(line, tokens[3]);
    const double h = parse_normalized(line, tokens[4]);
    double x0 = cx - w / 2.0, x1 = cx + w / 2.0;
    double y0 = cy - h / 2.0, y1 = cy + h / 2.0;
    if (x0 < -kNormalizedSlack || x1 > 1.0 + kNormalizedSlack) {
      throw LabelParseError(line, std::string(tokens[3]), "box extends outside the image");
    }
    if (y0 < -kNormalizedSlack || y1 > 1.0 + kNormalizedSlack) {
      throw LabelParseError(line, std::string(tokens[4]), "box extends outside the image");
    }
    x0 = std::clamp(x0, 0.0, 1.0);
    x1 = std::clamp(x1, 0.0, 1.0);
    y0 = std::clamp(y0, 0.0, 1.0);
    y1 = std::clamp(y1, 0.0, 1.0);
    out.push_back({cls,
                   BoundingBox{x0 * size.width, y0 * size.height, x1 * size.width,
                               y1 * size.height},
                   image_id});
  });
  return out;
}

std::vector<GroundTruthInstance> parse_segmentation_labels(
    std::string_view text, ImageSize size, const ClassMap& classes,
    const std::string& image_id) {
  check_size(size);
  std::vector<GroundTruthInstance> out;
  for_each_label_line(text, [&](std::size_t line, const auto& tokens) {
    const std::size_t coords = tokens.size() - 1;
    if (coords % 2 != 0) {
      throw LabelParseError(line, std::string(tokens.back()),
                            "odd coordinate count " + std::to_string(coords));
    }
    if (coords < 6) {
      throw LabelParseError(line, std::string(tokens.back()),
                            "polygon needs at least 3 vertices, got " +
                                std::to_string(coords / 2));
    }
    const int cls = parse_class_token(line, tokens[0], classes);
    std::vector<Point> vertices;
    vertices.reserve(coords / 2);
    for (std::size_t i = 1; i + 1 < tokens.size(); i += 2) {
      vertices.push_back({parse_normalized(line, tokens[i]) * size.width,
                          parse_normalized(line, tokens[i + 1]) * size.height});
    }
    out.push_back({cls, PolygonMask(std::move(vertices)), image_id});
  });
  return out;
}

std::vector<GroundTruthInstance> parse_labels(std::string_view text, ImageSize size,
                                              LabelKind kind, const ClassMap& classes,
                                              const std::string& image_id) {
  return kind == LabelKind::detection
             ? parse_detection_labels(text, size, classes, image_id)
             : parse_segmentation_labels(text, size, classes, image_id);
}

std::string write_labels(std::span<const GroundTruthInstance> instances,
                         ImageSize size) {
  check_size(size);
  const double w = size.width;
  const double h = size.height;
  const double slack_x = kNormalizedSlack * w;
  const double slack_y = kNormalizedSlack * h;
  auto inside = [&](double x, double y) {
    return x >= -slack_x && x <= w + slack_x && y >= -slack_y && y <= h + slack_y;
  };
  auto norm = [](double v, double extent) {
    return format_fixed(std::clamp(v / extent, 0.0, 1.0), 6);
  };

  std::string out;
  for (const auto& inst : instances) {
    std::string line = std::to_string(inst.class_id);
    if (const auto* b = std::get_if<BoundingBox>(&inst.geometry)) {
      if (!b->is_valid() || !inside(b->x_min, b->y_min) || !inside(b->x_max, b->y_max)) {
        throw SerializationError("box of image '" + inst.image_id +
                                 "' exceeds the image bounds");
      }
      const Point c = b->center();
      line += ' ' + norm(c.x, w) + ' ' + norm(c.y, h) + ' ' + norm(b->width(), w) +
              ' ' + norm(b->height(), h);
    } else {
      for (const Point& p : std::get<PolygonMask>(inst.geometry).vertices()) {
        if (!inside(p.x, p.y)) {
          throw SerializationError("polygon of image '" + inst.image_id +
                                   "' exceeds the image bounds");
        }
        line += ' ' + norm(p.x, w) + ' ' + norm(p.y, h);
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

std::string_view to_string(SplitTag tag) noexcept {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::unassigned: break;
  }
  return "unassigned";
}

SplitTag parse_split_tag(std::string_view token) {
  if (token == "train") return SplitTag::train;
  if (token == "val") return SplitTag::val;
  if (token == "unassigned" || token.empty()) return SplitTag::unassigned;
  throw ConfigError("unknown split tag '" + std::string(token) +
                    "' (expected train, val or unassigned)");
}

const ManifestEntry* DatasetManifest::find(std::string_view image_id) const {
  for (const auto& e : entries) {
    if (e.image_id == image_id) return &e;
  }
  return nullptr;
}

std::size_t DatasetManifest::count(SplitTag tag) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [tag](const auto& e) { return e.split == tag; }));
}

DatasetManifest parse_manifest(std::string_view json_text, ClassMap class_map) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("", "manifest must be a JSON array");

  DatasetManifest manifest;
  manifest.class_map = std::move(class_map);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "/" + std::to_string(i);
    const json& item = doc[i];
    if (!item.is_object()) throw ValidationError(path, "entry must be an object");
    for (const char* key : {"image_id", "width", "height", "label_path"}) {
      check_json_object_member(item, key, path);
    }
    ManifestEntry e;
    if (!item["image_id"].is_string()) {
      throw ValidationError(path + "/image_id", "must be a string");
    }
    e.image_id = item["image_id"].get<std::string>();
    for (const char* key : {"width", "height"}) {
      if (!item[key].is_number_integer() || item[key].get<long long>() <= 0) {
        throw ValidationError(path + "/" + key, "must be a positive integer");
      }
    }
    e.width = item["width"].get<int>();
    e.height = item["height"].get<int>();
    if (!item["label_path"].is_string()) {
      throw ValidationError(path + "/label_path", "must be a string");
    }
    e.label_path = item["label_path"].get<std::string>();
    if (item.contains("split")) {
      if (!item["split"].is_string()) throw ValidationError(path + "/split", "must be a string");
      try {
        e.split = parse_split_tag(item["split"].get<std::string>());
      } catch (const ConfigError& err) {
        throw ValidationError(path + "/split", err.what());
      }
    }
    if (item.contains("source")) {
      if (!item["source"].is_string()) {
        throw ValidationError(path + "/source", "must be a string");
      }
      e.source = item["source"].get<std::string>();
    }
    if (!seen.insert(e.image_id).second) {
      throw ValidationError(path + "/image_id", "duplicate image id '" + e.image_id + "'");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  json doc = json::array();
  for (const auto& e : manifest.entries) {
    json item = {{"image_id", e.image_id},
                 {"width", e.width},
                 {"height", e.height},
                 {"label_path", e.label_path},
                 {"split", std::string(to_string(e.split))}};
    if (!e.source.empty()) item["source"] = e.source;
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::map<std::string, std::vector<GroundTruthInstance>> load_ground_truth(
    const DatasetManifest& manifest, const std::filesystem::path& base_dir,
    LabelKind kind) {
  std::map<std::string, std::vector<GroundTruthInstance>> out;
  for (const auto& e : manifest.entries) {
    std::filesystem::path path(e.label_path);
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read label file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
      out[e.image_id] =
          parse_labels(text.str(), e.size(), kind, manifest.class_map, e.image_id);
    } catch (const LabelParseError& err) {
      throw LabelParseError(err.line(), err.token(),
                            path.string() + ": " + std::string(err.what()));
    }
  }
  return out;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction,
                              std::uint64_t seed) {
  if (manifest.entries.empty()) throw ConfigError("cannot split an empty manifest");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  for (const auto& e : manifest.entries) {
    if (e.split != SplitTag::unassigned) {
      throw ConfigError("entry '" + e.image_id + "' already carries a split tag");
    }
  }

  std::vector<std::string> ids;
  ids.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) ids.push_back(e.image_id);
  std::sort(ids.begin(), ids.end());

  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
  }

  const double n = static_cast<double>(ids.size());
  // nearbyint honours the default round-to-nearest-even mode.
  const auto train_count = static_cast<std::size_t>(std::nearbyint(n * train_fraction));
  const std::set<std::string> train(ids.begin(),
                                    ids.begin() + static_cast<std::ptrdiff_t>(train_count));

  DatasetManifest out = manifest;
  for (auto& e : out.entries) {
    e.split = train.contains(e.image_id) ? SplitTag::train : SplitTag::val;
  }
  return out;
}

void AxleCountTable::add(const std::string& source, int axle_count, std::size_t n) {
  rows_[source][axle_count] += n;
}

std::size_t AxleCountTable::count(const std::string& source, int axle_count) const {
  const auto row = rows_.find(source);
  if (row == rows_.end()) return 0;
  const auto cell = row->second.find(axle_count);
  return cell == row->second.end() ? 0 : cell->second;
}

std::size_t AxleCountTable::total(const std::string& source) const {
  const auto row = rows_.find(source);
  if (row == rows_.end()) return 0;
  std::size_t n = 0;
  for (const auto& [axles, c] : row->second) n += c;
  return n;
}

std::size_t AxleCountTable::total() const {
  std::size_t n = 0;
  for (const auto& [source, row] : rows_) n += total(source);
  return n;
}

std::vector<std::string> AxleCountTable::sources() const {
  std::vector<std::string> out;
  for (const auto& [source, row] : rows_) out.push_back(source);
  return out;
}

std::string AxleCountTable::to_markdown(int min_axles, int max_axles) const {
  std::ostringstream os;
  os << "| Source |";
  for (int a = min_axles; a <= max_axles; ++a) os << ' ' << a << "-axles |";
  os << "\n|---|";
  for (int a = min_axles; a <= max_axles; ++a) os << "---|";
  os << '\n';
  for (const auto& [source, row] : rows_) {
    os << "| " << source << " (" << total(source) << " trucks) |";
    for (int a = min_axles; a <= max_axles; ++a) {
      const std::size_t c = count(source, a);
      os << ' ' << (c == 0 ? std::string("-") : std::to_string(c)) << " |";
    }
    os << '\n';
  }
  return os.str();
}

std::string AxleCountTable::to_json() const {
  json doc = json::object();
  for (const auto& [source, row] : rows_) {
    json counts = json::object();
    for (const auto& [axles, c] : row) counts[std::to_string(axles)] = c;
    doc[source] = {{"trucks", total(source)}, {"axle_counts", counts}};
  }
  return doc.dump(2) + "\n";
}

AxleCountTable summarize_dataset(const DatasetManifest& manifest,
                                 std::span<const TruckObservation> observations) {
  AxleCountTable table;
  for (const auto& obs : observations) {
    const ManifestEntry* e = manifest.find(obs.image_id);
    if (e == nullptr) continue;
    table.add(e->source.empty() ? std::string(kUnspecifiedSource) : e->source,
              obs.axle_count);
  }
  return table;
}

ModelKind parse_model_kind(std::string_view token) {
  if (token == "detection") return ModelKind::detection;
  if (token == "segmentation") return ModelKind::segmentation;
  throw ConfigError("unknown model kind '" + std::string(token) +
                    "' (expected detection or segmentation)");
}

std::string TrainingConfig::to_text() const {
  std::string out;
  out += "epochs: " + std::to_string(epochs) + "\n";
  out += "batch: " + std::to_string(batch_size) + "\n";
  out += "optimizer: " + optimizer + "\n";
  out += "lr0: " + format_shortest(learning_rate) + "\n";
  out += "scale: " + format_shortest(scale) + "\n";
  out += "fliplr: " + format_shortest(flip_lr) + "\n";
  if (shear) out += "shear: " + format_shortest(*shear) + "\n";
  return out;
}

void TrainingOverrides::set(std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override must look like key=value: '" + std::string(assignment) + "'");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view value = assignment.substr(eq + 1);
  auto as_int = [&]() {
    int v = 0;
    if (!parse_int(value, v)) throw ConfigError(std::string(key) + " must be an integer");
    return v;
  };
  auto as_double = [&]() {
    double v = 0.0;
    if (!parse_double(value, v)) throw ConfigError(std::string(key) + " must be a number");
    return v;
  };
  if (key == "epochs") {
    epochs = as_int();
  } else if (key == "batch") {
    batch_size = as_int();
  } else if (key == "optimizer") {
    if (value.empty()) throw ConfigError("optimizer must not be empty");
    optimizer = std::string(value);
  } else if (key == "lr0") {
    learning_rate = as_double();
  } else if (key == "scale") {
    scale = as_double();
  } else if (key == "fliplr") {
    flip_lr = as_double();
  } else if (key == "shear") {
    shear = as_double();
  } else {
    throw ConfigError("unknown training key '" + std::string(key) + "'");
  }
}

TrainingConfig default_training_config(ModelKind kind) {
  TrainingConfig cfg;
  cfg.epochs = 400;
  cfg.optimizer = "AdamW";
  cfg.learning_rate = 0.01;
  cfg.scale = 0.5;
  cfg.flip_lr = 0.5;
  if (kind == ModelKind::detection) {
    cfg.batch_size = 3;
    cfg.shear = 0.5;
  } else {
    cfg.batch_size = 32;
  }
  return cfg;
}

TrainingConfig emit_training_config(ModelKind kind, const TrainingOverrides& overrides) {
  auto positive = [](const char* key, auto value) {
    if (!(value > 0)) throw ConfigError(std::string(key) + " must be positive");
    return value;
  };
  TrainingConfig cfg = default_training_config(kind);
  if (overrides.epochs) cfg.epochs = positive("epochs", *overrides.epochs);
  if (overrides.batch_size) cfg.batch_size = positive("batch", *overrides.batch_size);
  if (overrides.optimizer) cfg.optimizer = *overrides.optimizer;
  if (overrides.learning_rate) cfg.learning_rate = positive("lr0", *overrides.learning_rate);
  if (overrides.scale) cfg.scale = positive("scale", *overrides.scale);
  if (overrides.flip_lr) {
    cfg.flip_lr = positive("fliplr", *overrides.flip_lr);
    if (cfg.flip_lr > 1.0) throw ConfigError("fliplr is a probability and must be <= 1");
  }
  if (overrides.shear) cfg.shear = positive("shear", *overrides.shear);
  return cfg;
}

}  // namespace liftaxle
