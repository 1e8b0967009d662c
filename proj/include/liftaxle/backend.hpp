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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "liftaxle/annotations.hpp"
#include "liftaxle/metrics.hpp"

namespace liftaxle {

struct ImagePredictions {
  std::string image_id;
  ImageSize size;
  std::vector<Detection> detections;
};

// Keyed (and therefore iterated) by image id.
using PredictionSet = std::map<std::string, ImagePredictions>;

// {"images": [{"id", "width", "height", "detections": [{"class", "conf",
// "box": [x_min, y_min, x_max, y_max], "mask": [[x, y], ...]}]}]}
// A bare top-level array is read as the "images" list. Violations throw
// ValidationError with the JSON pointer of the offending value; unknown
// classes are rejected when `classes` is non-empty.
PredictionSet load_predictions(std::string_view json_text, const ClassMap& classes = {});
std::string serialize_predictions(const PredictionSet& predictions);

struct DetectorCapabilities {
  bool boxes = true;
  bool masks = false;
};

struct ImageRef {
  std::string image_id;
  std::filesystem::path path;  // may be empty for recorded backends
  ImageSize size;
};

// Source of detections for one image at a time. Implementations are safe for
// concurrent detect() calls unless they document otherwise.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectorCapabilities capabilities() const = 0;
  virtual const ClassMap& classes() const = 0;
  virtual std::vector<Detection> detect(const ImageRef& image) const = 0;
};

// Replays a predictions file. Immutable after construction, so concurrent
// detect() calls are safe.
class RecordedDetector final : public Detector {
 public:
  RecordedDetector(PredictionSet predictions, ClassMap classes);

  DetectorCapabilities capabilities() const override { return capabilities_; }
  const ClassMap& classes() const override { return classes_; }
  // Unknown image ids yield no detections.
  std::vector<Detection> detect(const ImageRef& image) const override;

 private:
  PredictionSet predictions_;
  ClassMap classes_;
  DetectorCapabilities capabilities_;
};

// Greedy suppression over detections of a single class: in descending
// confidence (stable), keep a detection iff its IoU with every kept one is
// below `iou_threshold`.
std::vector<Detection> nms(std::span<const Detection> detections, double iou_threshold);

// nms() applied to each class independently; output grouped by class id.
std::vector<Detection> nms_per_class(std::span<const Detection> detections,
                                     double iou_threshold);

}  // namespace liftaxle
