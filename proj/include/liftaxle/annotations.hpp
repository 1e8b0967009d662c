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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "liftaxle/geometry.hpp"

namespace liftaxle {

// Dataset-scoped class id -> name. An empty map accepts any non-negative id.
using ClassMap = std::map<int, std::string>;

ClassMap truck_axle_classes();   // {0: truck, 1: axle}
ClassMap lifted_axle_classes();  // {0: lifted_axle}

// Parses "truck,axle" into {0: truck, 1: axle}.
ClassMap parse_class_list(std::string_view comma_separated);

using Geometry = std::variant<BoundingBox, PolygonMask>;

struct GroundTruthInstance {
  int class_id = 0;
  Geometry geometry;
  std::string image_id;

  // The box itself, or the bounds of the polygon.
  BoundingBox box() const;
  // nullptr for box instances.
  const PolygonMask* mask() const noexcept {
    return std::get_if<PolygonMask>(&geometry);
  }
};

enum class LabelKind { detection, segmentation };

// Normalized YOLO lines: "<class> <cx> <cy> <w> <h>".
std::vector<GroundTruthInstance> parse_detection_labels(
    std::string_view text, ImageSize size, const ClassMap& classes = {},
    const std::string& image_id = {});

// Normalized YOLO polygon lines: "<class> <x1> <y1> ... <xk> <yk>", k >= 3.
std::vector<GroundTruthInstance> parse_segmentation_labels(
    std::string_view text, ImageSize size, const ClassMap& classes = {},
    const std::string& image_id = {});

std::vector<GroundTruthInstance> parse_labels(std::string_view text, ImageSize size,
                                              LabelKind kind,
                                              const ClassMap& classes = {},
                                              const std::string& image_id = {});

// Inverse of the parsers, one '\n'-terminated line per instance with six
// decimals. Box instances are written in detection form, polygons in
// segmentation form. Throws SerializationError for geometry outside the image.
std::string write_labels(std::span<const GroundTruthInstance> instances,
                         ImageSize size);

enum class SplitTag { unassigned, train, val };

std::string_view to_string(SplitTag tag) noexcept;
SplitTag parse_split_tag(std::string_view token);

struct ManifestEntry {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::string label_path;
  SplitTag split = SplitTag::unassigned;
  // Optional acquisition source (e.g. camera site); empty when not recorded.
  std::string source;

  ImageSize size() const noexcept { return {width, height}; }
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  ClassMap class_map;

  const ManifestEntry* find(std::string_view image_id) const;
  std::size_t count(SplitTag tag) const;
};

// JSON array of {image_id, width, height, label_path, split[, source]}.
// Throws ValidationError naming the offending JSON path; ids must be unique.
DatasetManifest parse_manifest(std::string_view json_text, ClassMap class_map = {});
std::string serialize_manifest(const DatasetManifest& manifest);

// Reads and parses every referenced label file. Relative label paths resolve
// against `base_dir`. Errors name the label file.
std::map<std::string, std::vector<GroundTruthInstance>> load_ground_truth(
    const DatasetManifest& manifest, const std::filesystem::path& base_dir,
    LabelKind kind);

// Tags round(n * train_fraction) entries (ties to even) as train and the rest
// as val. The assignment depends only on the seed and the sorted image ids.
DatasetManifest split_dataset(const DatasetManifest& manifest, double train_fraction,
                              std::uint64_t seed);

struct TruckObservation {
  std::string image_id;
  int axle_count = 0;
};

// Trucks per (source, axle count).
class AxleCountTable {
 public:
  void add(const std::string& source, int axle_count, std::size_t n = 1);
  std::size_t count(const std::string& source, int axle_count) const;
  std::size_t total(const std::string& source) const;
  std::size_t total() const;
  std::vector<std::string> sources() const;
  const std::map<std::string, std::map<int, std::size_t>>& rows() const noexcept {
    return rows_;
  }

  // One row per source, one column per axle count in [min_axles, max_axles];
  // zero cells render as "-".
  std::string to_markdown(int min_axles = 3, int max_axles = 9) const;
  std::string to_json() const;

 private:
  std::map<std::string, std::map<int, std::size_t>> rows_;
};

inline constexpr std::string_view kUnspecifiedSource = "unspecified";

// Observations for images absent from the manifest are ignored. Entries with
// no source are grouped under kUnspecifiedSource.
AxleCountTable summarize_dataset(const DatasetManifest& manifest,
                                 std::span<const TruckObservation> observations);

enum class ModelKind { detection, segmentation };

ModelKind parse_model_kind(std::string_view token);

struct TrainingConfig {
  int epochs = 0;
  int batch_size = 0;
  std::string optimizer;
  double learning_rate = 0.0;
  double scale = 0.0;
  double flip_lr = 0.0;
  std::optional<double> shear;

  // "key: value" lines with keys epochs, batch, optimizer, lr0, scale, fliplr
  // and shear (omitted when unset).
  std::string to_text() const;
};

struct TrainingOverrides {
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<std::string> optimizer;
  std::optional<double> learning_rate;
  std::optional<double> scale;
  std::optional<double> flip_lr;
  std::optional<double> shear;

  // Applies "key=value" using the serialized key names.
  void set(std::string_view assignment);
};

TrainingConfig default_training_config(ModelKind kind);

// Defaults for `kind` with every present override applied. Throws ConfigError
// on non-positive numeric overrides.
TrainingConfig emit_training_config(ModelKind kind,
                                    const TrainingOverrides& overrides = {});

}  // namespace liftaxle
