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

// Count-driven evaluation fixtures: each ground truth either gets an exact
// prediction or none, and false positives land on empty cells.

#include <cstddef>
#include <string>
#include <vector>

#include "liftaxle/metrics.hpp"

namespace liftaxle::fixture {

struct ClassCounts {
  int class_id = 0;
  std::size_t ground_truth = 0;
  std::size_t matched = 0;
  std::size_t false_positives = 0;
};

inline constexpr int kCell = 50;
inline constexpr int kGrid = 20;  // cells per row and column

inline BoundingBox cell_box(std::size_t cell) {
  const double x = static_cast<double>(cell % kGrid) * kCell;
  const double y = static_cast<double>(cell / kGrid) * kCell;
  return {x + 5, y + 5, x + 45, y + 45};
}

inline std::vector<EvalImage> from_counts(const std::vector<ClassCounts>& counts,
                                          const std::string& prefix = "fixture_") {
  std::vector<EvalImage> images;
  std::size_t cell = kGrid * kGrid;
  auto next_cell = [&]() -> EvalImage& {
    if (cell == kGrid * kGrid) {
      images.push_back({prefix + std::to_string(images.size()),
                        {kGrid * kCell, kGrid * kCell}, {}, {}});
      cell = 0;
    }
    return images.back();
  };
  for (const ClassCounts& c : counts) {
    for (std::size_t i = 0; i < c.ground_truth; ++i) {
      EvalImage& img = next_cell();
      const BoundingBox b = cell_box(cell++);
      img.ground_truth.push_back({c.class_id, b, img.image_id});
      if (i < c.matched) img.predictions.push_back({c.class_id, b, {}, 0.9, img.image_id});
    }
    for (std::size_t i = 0; i < c.false_positives; ++i) {
      EvalImage& img = next_cell();
      img.predictions.push_back({c.class_id, cell_box(cell++), {}, 0.8, img.image_id});
    }
  }
  return images;
}

// Truck and axle outcomes of the two-class model.
inline std::vector<EvalImage> truck_axle_outcomes() {
  return from_counts({{0, 167, 164, 0}, {1, 623, 618, 0}}, "d1_");
}

// Lifted-axle outcomes of the segmentation model.
inline std::vector<EvalImage> lifted_axle_outcomes() {
  return from_counts({{0, 24, 22, 0}}, "d2_");
}

}  // namespace liftaxle::fixture
