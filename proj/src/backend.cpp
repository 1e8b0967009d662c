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

#include "liftaxle/backend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "liftaxle/error.hpp"

namespace liftaxle {

namespace {

using nlohmann::json;

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "/" + key, "missing field");
  return *it;
}

double finite_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
  return d;
}

Detection parse_detection(const json& item, const std::string& path,
                          const std::string& image_id, const ClassMap& classes) {
  Detection d;
  d.image_id = image_id;

  const json& cls = member(item, "class", path);
  if (!cls.is_number_integer()) throw ValidationError(path + "/class", "must be an integer");
  d.class_id = cls.get<int>();
  if (classes.empty() ? d.class_id < 0 : !classes.contains(d.class_id)) {
    throw ValidationError(path + "/class", "unknown class id " + std::to_string(d.class_id));
  }

  d.confidence = finite_number(member(item, "conf", path), path + "/conf");
  if (d.confidence < 0.0 || d.confidence > 1.0) {
    throw ValidationError(path + "/conf", "confidence outside [0, 1]");
  }

  const json& box = member(item, "box", path);
  if (!box.is_array() || box.size() != 4) {
    throw ValidationError(path + "/box", "must be [x_min, y_min, x_max, y_max]");
  }
  d.box = {finite_number(box[0], path + "/box/0"), finite_number(box[1], path + "/box/1"),
           finite_number(box[2], path + "/box/2"), finite_number(box[3], path + "/box/3")};
  if (!d.box.is_valid()) throw ValidationError(path + "/box", "requires x_min <= x_max and y_min <= y_max");

  if (const auto it = item.find("mask"); it != item.end() && !it->is_null()) {
    const std::string mpath = path + "/mask";
    if (!it->is_array()) throw ValidationError(mpath, "must be an array of [x, y] points");
    std::vector<Point> vertices;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& pt = (*it)[i];
      const std::string ppath = mpath + "/" + std::to_string(i);
      if (!pt.is_array() || pt.size() != 2) throw ValidationError(ppath, "must be [x, y]");
      vertices.push_back({finite_number(pt[0], ppath + "/0"), finite_number(pt[1], ppath + "/1")});
    }
    try {
      d.mask.emplace(std::move(vertices));
    } catch (const InvalidPolygonError& e) {
      throw ValidationError(mpath, e.what());
    }
  }
  return d;
}

}  // namespace

PredictionSet load_predictions(std::string_view json_text, const ClassMap& classes) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
  const json* images = &doc;
  std::string base;
  if (doc.is_object()) {
    images = &member(doc, "images", "");
    base = "/images";
  }
  if (!images->is_array()) throw ValidationError(base, "must be an array");

  PredictionSet out;
  for (std::size_t i = 0; i < images->size(); ++i) {
    const json& img = (*images)[i];
    const std::string path = base + "/" + std::to_string(i);
    const json& id = member(img, "id", path);
    if (!id.is_string()) throw ValidationError(path + "/id", "must be a string");
    ImagePredictions ip;
    ip.image_id = id.get<std::string>();
    for (const char* key : {"width", "height"}) {
      const json& v = member(img, key, path);
      if (!v.is_number_integer() || v.get<long long>() <= 0) {
        throw ValidationError(path + "/" + key, "must be a positive integer");
      }
    }
    ip.size = {img["width"].get<int>(), img["height"].get<int>()};
    const json& dets = member(img, "detections", path);
    if (!dets.is_array()) throw ValidationError(path + "/detections", "must be an array");
    for (std::size_t k = 0; k < dets.size(); ++k) {
      ip.detections.push_back(parse_detection(
          dets[k], path + "/detections/" + std::to_string(k), ip.image_id, classes));
    }
    if (out.contains(ip.image_id)) {
      throw ValidationError(path + "/id", "duplicate image id '" + ip.image_id + "'");
    }
    out.emplace(ip.image_id, std::move(ip));
  }
  return out;
}

std::string serialize_predictions(const PredictionSet& predictions) {
  json images = json::array();
  for (const auto& [id, ip] : predictions) {
    json dets = json::array();
    for (const auto& d : ip.detections) {
      json item = {{"class", d.class_id},
                   {"conf", d.confidence},
                   {"box", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}}};
      if (d.mask) {
        json mask = json::array();
        for (const Point& p : d.mask->vertices()) mask.push_back({p.x, p.y});
        item["mask"] = std::move(mask);
      }
      dets.push_back(std::move(item));
    }
    images.push_back({{"id", id},
                      {"width", ip.size.width},
                      {"height", ip.size.height},
                      {"detections", std::move(dets)}});
  }
  return json{{"images", std::move(images)}}.dump(2) + "\n";
}

RecordedDetector::RecordedDetector(PredictionSet predictions, ClassMap classes)
    : predictions_(std::move(predictions)), classes_(std::move(classes)) {
  for (const auto& [id, ip] : predictions_) {
    for (const auto& d : ip.detections) {
      if (!classes_.empty() && !classes_.contains(d.class_id)) {
        throw ValidationError("/" + id, "detection class " + std::to_string(d.class_id) +
                                            " is not in the advertised class map");
      }
      if (d.mask) capabilities_.masks = true;
    }
  }
}

std::vector<Detection> RecordedDetector::detect(const ImageRef& image) const {
  const auto it = predictions_.find(image.image_id);
  if (it == predictions_.end()) return {};
  return it->second.detections;
}

std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("NMS IoU threshold must lie in (0, 1)");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });
  std::vector<Detection> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
      return box_iou(k.box, detections[i].box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(detections[i]);
  }
  return kept;
}

std::vector<Detection> nms_per_class(std::span<const Detection> detections,
                                     double iou_threshold) {
  std::map<int, std::vector<Detection>> by_class;
  for (const auto& d : detections) by_class[d.class_id].push_back(d);
  std::vector<Detection> out;
  for (const auto& [cls, dets] : by_class) {
    auto kept = nms(dets, iou_threshold);
    out.insert(out.end(), std::make_move_iterator(kept.begin()),
               std::make_move_iterator(kept.end()));
  }
  return out;
}

}  // namespace liftaxle
