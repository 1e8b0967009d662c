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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "liftaxle/geometry.hpp"
#include "liftaxle/metrics.hpp"

namespace liftaxle {

// Which image side the front of a truck faces.
enum class TravelDirection { front_left, front_right };

// Accepts "front-left" and "front-right"; the ConfigError lists both.
TravelDirection parse_travel_direction(std::string_view token);
std::string_view to_string(TravelDirection direction) noexcept;
TravelDirection flipped(TravelDirection direction) noexcept;

struct CascadeConfig {
  double truck_confidence = 0.5;
  double axle_confidence = 0.5;
  double lifted_confidence = 0.5;
  double association_iou = 0.3;  // mask box -> axle box floor
  TravelDirection direction = TravelDirection::front_right;
  // Class ids in the detector outputs feeding each stage.
  int truck_class = 0;
  int axle_class = 1;
  int lifted_class = 0;

  // Throws ConfigError unless every threshold lies in (0, 1).
  void validate() const;
};

// Keys: truck_conf, axle_conf, lifted_conf, association_iou, direction,
// truck_class, axle_class, lifted_class (all optional).
CascadeConfig parse_cascade_config(std::string_view json_text);
nlohmann::json to_json(const CascadeConfig& config);

struct AxleGroups {
  std::vector<std::vector<std::size_t>> per_truck;  // indices into axles
  std::vector<std::size_t> orphans;
};

// An axle joins the truck whose box contains its box center. Among several
// such trucks the highest axle/truck IoU wins, then the leftmost truck.
AxleGroups group_axles_by_truck(std::span<const Detection> trucks,
                                std::span<const Detection> axles);

// 1-based ordinal of each box counting from the front of the truck.
std::vector<int> order_axles(std::span<const BoundingBox> axle_boxes,
                             TravelDirection direction);

struct LiftAssignment {
  std::vector<std::optional<std::size_t>> mask_for_axle;  // index into masks
  std::size_t unassociated = 0;
};

// Each mask box proposes to its best axle by IoU (>= floor, ties to the lower
// ordinal); each axle keeps the proposal of highest IoU and the others stay
// unassociated.
LiftAssignment mark_lifted_axles(std::span<const BoundingBox> axle_boxes,
                                 std::span<const int> ordinals,
                                 std::span<const Detection> lifted_masks,
                                 double association_floor);

struct AxleRecord {
  int ordinal = 0;
  BoundingBox box;
  double confidence = 0.0;
  bool lifted = false;
  std::optional<double> lift_confidence;
};

struct TruckRecord {
  BoundingBox truck_box;
  double truck_confidence = 0.0;
  std::vector<AxleRecord> axles;  // ordinal order
  std::size_t unassociated_lifted = 0;
  TravelDirection direction = TravelDirection::front_right;

  std::size_t axle_count() const noexcept { return axles.size(); }
  std::vector<int> lifted_ordinals() const;
};

struct CascadeResult {
  std::vector<TruckRecord> trucks;  // left to right
  std::vector<Detection> orphan_axles;
  // Every lifted mask not attached to an axle, including those outside all trucks.
  std::size_t unassociated_lifted = 0;
  TravelDirection direction = TravelDirection::front_right;
};

// Filters each stage by its confidence threshold, then groups, orders and
// marks. Inputs are the per-stage detections of one image.
CascadeResult run_cascade(std::span<const Detection> trucks,
                          std::span<const Detection> axles,
                          std::span<const Detection> lifted_masks,
                          const CascadeConfig& config);

nlohmann::json to_json(const TruckRecord& record);
nlohmann::json to_json(const CascadeResult& result, const std::string& image_id);

}  // namespace liftaxle
