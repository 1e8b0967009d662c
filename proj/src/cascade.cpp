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

#include "liftaxle/cascade.hpp"

#include <algorithm>
#include <numeric>

#include "liftaxle/error.hpp"

namespace liftaxle {

namespace {

using nlohmann::json;

json box_json(const BoundingBox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

std::vector<Detection> above(std::span<const Detection> dets, double threshold) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (d.confidence >= threshold) out.push_back(d);
  }
  return out;
}

}  // namespace

TravelDirection parse_travel_direction(std::string_view token) {
  if (token == "front-left") return TravelDirection::front_left;
  if (token == "front-right") return TravelDirection::front_right;
  throw ConfigError("unknown travel direction '" + std::string(token) +
                    "' (valid: front-left, front-right)");
}

std::string_view to_string(TravelDirection direction) noexcept {
  return direction == TravelDirection::front_left ? "front-left" : "front-right";
}

TravelDirection flipped(TravelDirection direction) noexcept {
  return direction == TravelDirection::front_left ? TravelDirection::front_right
                                                  : TravelDirection::front_left;
}

void CascadeConfig::validate() const {
  const std::pair<const char*, double> checks[] = {{"truck_conf", truck_confidence},
                                                   {"axle_conf", axle_confidence},
                                                   {"lifted_conf", lifted_confidence},
                                                   {"association_iou", association_iou}};
  for (const auto& [name, v] : checks) {
    if (!(v > 0.0 && v < 1.0)) {
      throw ConfigError(std::string(name) + " must lie in (0, 1), got " + std::to_string(v));
    }
  }
}

CascadeConfig parse_cascade_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed cascade config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("cascade config must be a JSON object");
  static const char* const kKeys[] = {"truck_conf",  "axle_conf",  "lifted_conf",
                                      "association_iou", "direction", "truck_class",
                                      "axle_class",  "lifted_class"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("unknown cascade config key '" + key + "'");
    }
  }
  CascadeConfig cfg;
  auto number = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    out = doc[key].get<double>();
  };
  auto integer = [&](const char* key, int& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    out = doc[key].get<int>();
  };
  number("truck_conf", cfg.truck_confidence);
  number("axle_conf", cfg.axle_confidence);
  number("lifted_conf", cfg.lifted_confidence);
  number("association_iou", cfg.association_iou);
  integer("truck_class", cfg.truck_class);
  integer("axle_class", cfg.axle_class);
  integer("lifted_class", cfg.lifted_class);
  if (doc.contains("direction")) {
    if (!doc["direction"].is_string()) throw ConfigError("direction must be a string");
    cfg.direction = parse_travel_direction(doc["direction"].get<std::string>());
  }
  cfg.validate();
  return cfg;
}

json to_json(const CascadeConfig& c) {
  return {{"truck_conf", c.truck_confidence},   {"axle_conf", c.axle_confidence},
          {"lifted_conf", c.lifted_confidence}, {"association_iou", c.association_iou},
          {"direction", std::string(to_string(c.direction))},
          {"truck_class", c.truck_class},       {"axle_class", c.axle_class},
          {"lifted_class", c.lifted_class}};
}

AxleGroups group_axles_by_truck(std::span<const Detection> trucks,
                                std::span<const Detection> axles) {
  AxleGroups groups;
  groups.per_truck.resize(trucks.size());
  for (std::size_t a = 0; a < axles.size(); ++a) {
    const Point c = axles[a].box.center();
    std::size_t best = trucks.size();
    double best_iou = -1.0;
    for (std::size_t t = 0; t < trucks.size(); ++t) {
      if (!trucks[t].box.contains(c)) continue;
      const double v = box_iou(axles[a].box, trucks[t].box);
      const bool better =
          best == trucks.size() || v > best_iou ||
          (v == best_iou && trucks[t].box.x_min < trucks[best].box.x_min);
      if (better) {
        best = t;
        best_iou = v;
      }
    }
    if (best == trucks.size()) {
      groups.orphans.push_back(a);
    } else {
      groups.per_truck[best].push_back(a);
    }
  }
  return groups;
}

std::vector<int> order_axles(std::span<const BoundingBox> axle_boxes,
                             TravelDirection direction) {
  std::vector<std::size_t> idx(axle_boxes.size());
  std::iota(idx.begin(), idx.end(), 0);
  const double sign = direction == TravelDirection::front_right ? -1.0 : 1.0;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return sign * axle_boxes[a].center().x < sign * axle_boxes[b].center().x;
  });
  std::vector<int> ordinals(axle_boxes.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    ordinals[idx[pos]] = static_cast<int>(pos) + 1;
  }
  return ordinals;
}

LiftAssignment mark_lifted_axles(std::span<const BoundingBox> axle_boxes,
                                 std::span<const int> ordinals,
                                 std::span<const Detection> lifted_masks,
                                 double association_floor) {
  if (ordinals.size() != axle_boxes.size()) {
    throw std::invalid_argument("one ordinal per axle box is required");
  }
  LiftAssignment out;
  out.mask_for_axle.resize(axle_boxes.size());
  std::vector<double> held_iou(axle_boxes.size(), -1.0);
  for (std::size_t m = 0; m < lifted_masks.size(); ++m) {
    std::size_t best = axle_boxes.size();
    double best_iou = -1.0;
    for (std::size_t a = 0; a < axle_boxes.size(); ++a) {
      const double v = box_iou(lifted_masks[m].box, axle_boxes[a]);
      if (v < association_floor) continue;
      if (v > best_iou || (v == best_iou && ordinals[a] < ordinals[best])) {
        best = a;
        best_iou = v;
      }
    }
    if (best == axle_boxes.size()) {
      ++out.unassociated;
      continue;
    }
    auto& held = out.mask_for_axle[best];
    bool wins = !held || best_iou > held_iou[best];
    if (held && best_iou == held_iou[best]) {
      // Equal IoU: the more confident mask, then the earlier one.
      wins = lifted_masks[m].confidence > lifted_masks[*held].confidence;
    }
    if (wins) {
      if (held) ++out.unassociated;
      held = m;
      held_iou[best] = best_iou;
    } else {
      ++out.unassociated;
    }
  }
  return out;
}

std::vector<int> TruckRecord::lifted_ordinals() const {
  std::vector<int> out;
  for (const auto& a : axles) {
    if (a.lifted) out.push_back(a.ordinal);
  }
  return out;
}

CascadeResult run_cascade(std::span<const Detection> trucks_in,
                          std::span<const Detection> axles_in,
                          std::span<const Detection> masks_in,
                          const CascadeConfig& config) {
  config.validate();
  std::vector<Detection> trucks = above(trucks_in, config.truck_confidence);
  const std::vector<Detection> axles = above(axles_in, config.axle_confidence);
  const std::vector<Detection> masks = above(masks_in, config.lifted_confidence);

  // Left to right; equal x_min keeps input order.
  std::stable_sort(trucks.begin(), trucks.end(), [](const Detection& a, const Detection& b) {
    return a.box.x_min < b.box.x_min;
  });

  const AxleGroups axle_groups = group_axles_by_truck(trucks, axles);
  const AxleGroups mask_groups = group_axles_by_truck(trucks, masks);

  CascadeResult result;
  result.direction = config.direction;
  result.unassociated_lifted = mask_groups.orphans.size();
  for (std::size_t o : axle_groups.orphans) result.orphan_axles.push_back(axles[o]);

  for (std::size_t t = 0; t < trucks.size(); ++t) {
    TruckRecord record;
    record.truck_box = trucks[t].box;
    record.truck_confidence = trucks[t].confidence;
    record.direction = config.direction;

    std::vector<BoundingBox> boxes;
    for (std::size_t a : axle_groups.per_truck[t]) boxes.push_back(axles[a].box);
    std::vector<Detection> truck_masks;
    for (std::size_t m : mask_groups.per_truck[t]) truck_masks.push_back(masks[m]);

    const std::vector<int> ordinals = order_axles(boxes, config.direction);
    const LiftAssignment lift =
        mark_lifted_axles(boxes, ordinals, truck_masks, config.association_iou);
    record.unassociated_lifted = lift.unassociated;
    result.unassociated_lifted += lift.unassociated;

    for (std::size_t i = 0; i < boxes.size(); ++i) {
      AxleRecord ar;
      ar.ordinal = ordinals[i];
      ar.box = boxes[i];
      ar.confidence = axles[axle_groups.per_truck[t][i]].confidence;
      if (lift.mask_for_axle[i]) {
        ar.lifted = true;
        ar.lift_confidence = truck_masks[*lift.mask_for_axle[i]].confidence;
      }
      record.axles.push_back(ar);
    }
    std::sort(record.axles.begin(), record.axles.end(),
              [](const AxleRecord& a, const AxleRecord& b) { return a.ordinal < b.ordinal; });
    result.trucks.push_back(std::move(record));
  }
  return result;
}

json to_json(const TruckRecord& record) {
  json axles = json::array();
  for (const auto& a : record.axles) {
    axles.push_back({{"ordinal", a.ordinal},
                     {"box", box_json(a.box)},
                     {"conf", a.confidence},
                     {"lifted", a.lifted},
                     {"lift_conf", a.lift_confidence ? json(*a.lift_confidence) : json(nullptr)}});
  }
  return {{"truck", {{"box", box_json(record.truck_box)}, {"conf", record.truck_confidence}}},
          {"axles", axles},
          {"unassociated_lifted", record.unassociated_lifted},
          {"direction", std::string(to_string(record.direction))}};
}

json to_json(const CascadeResult& result, const std::string& image_id) {
  json trucks = json::array();
  for (const auto& r : result.trucks) trucks.push_back(to_json(r));
  json orphans = json::array();
  for (const auto& o : result.orphan_axles) {
    orphans.push_back({{"box", box_json(o.box)}, {"conf", o.confidence}});
  }
  return {{"image_id", image_id},
          {"direction", std::string(to_string(result.direction))},
          {"trucks", trucks},
          {"orphans", orphans},
          {"unassociated_lifted", result.unassociated_lifted}};
}

}  // namespace liftaxle
