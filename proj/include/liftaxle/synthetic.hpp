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
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "liftaxle/annotations.hpp"
#include "liftaxle/cascade.hpp"
#include "liftaxle/metrics.hpp"

namespace liftaxle {

inline constexpr int kMinSyntheticAxles = 2;
inline constexpr int kMaxSyntheticAxles = 9;

struct SyntheticTruckSpec {
  int axle_count = 2;
  std::set<int> lifted_ordinals;  // counted from the steer axle

  friend bool operator==(const SyntheticTruckSpec&, const SyntheticTruckSpec&) = default;
};

struct ConfidenceRange {
  double lo = 0.9;
  double hi = 1.0;
};

struct SyntheticSceneSpec {
  std::string image_id = "synthetic_0000";
  ImageSize size{1280, 720};
  std::vector<SyntheticTruckSpec> trucks;
  double perturbation = 0.0;  // max absolute pixel offset per coordinate
  ConfidenceRange truck_confidence;
  ConfidenceRange axle_confidence;
  ConfidenceRange lifted_confidence;
  std::size_t false_positives = 0;  // spurious truck/axle boxes
  ConfidenceRange false_positive_confidence{0.01, 0.6};
  TravelDirection direction = TravelDirection::front_right;
  std::uint64_t seed = 0;

  // Throws ConfigError on axle counts outside [2, 9], lifted ordinals outside
  // 1..axle_count, negative perturbation or bad confidence ranges.
  void validate() const;
};

struct SyntheticScene {
  std::string image_id;
  ImageSize size;
  std::vector<GroundTruthInstance> detection_truth;  // 0 = truck, 1 = axle
  std::vector<GroundTruthInstance> lifted_truth;     // 0 = lifted_axle polygons
  std::vector<Detection> detections;                 // trucks then axles
  std::vector<Detection> lifted_detections;          // with masks
  std::vector<SyntheticTruckSpec> trucks;            // left to right
};

// Trucks occupy equal-width, non-overlapping slots; axles sit evenly spaced on
// each truck's lower edge and lifted axles are raised by a quarter of their
// size with an octagonal mask. Predictions are the truth moved by at most
// `perturbation` pixels per coordinate. Throws ConfigError when the trucks do
// not fit the image width.
SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec);

// 1..max_trucks trucks with uniform axle counts and independent lifted flags.
std::vector<SyntheticTruckSpec> random_trucks(std::uint64_t seed, int max_trucks);

// A batch of scenes sharing one template; see parse_synthetic_set_spec.
struct SyntheticSetSpec {
  SyntheticSceneSpec scene;  // trucks empty => random_trucks per image
  std::size_t images = 1;
  int max_trucks = 5;
};

// {"seed", "images", "width", "height", "perturbation", "direction",
//  "trucks": [{"axles", "lifted": [...]}], "max_trucks", "false_positives",
//  "confidence": {"truck": [lo, hi], "axle": [...], "lifted": [...]}}
SyntheticSetSpec parse_synthetic_set_spec(std::string_view json_text);

// Image ids "synth_0000", "synth_0001", ...; image i is seeded from seed + i.
std::vector<SyntheticScene> generate_synthetic_set(const SyntheticSetSpec& spec);

}  // namespace liftaxle
