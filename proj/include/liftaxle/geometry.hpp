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
#include <span>
#include <vector>

namespace liftaxle {

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Axis-aligned box in pixel coordinates, origin top-left, y pointing down.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  Point center() const noexcept {
    return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0};
  }
  // Finite coordinates with x_min <= x_max and y_min <= y_max.
  bool is_valid() const noexcept;
  // Closed-interval containment.
  bool contains(Point p) const noexcept {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Simple polygon, implicitly closed. The constructor enforces at least three
// finite, non-negative vertices.
class PolygonMask {
 public:
  explicit PolygonMask(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  BoundingBox bounds() const noexcept;
  // Shoelace area (absolute value).
  double area() const noexcept;

  friend bool operator==(const PolygonMask&, const PolygonMask&) = default;

 private:
  std::vector<Point> vertices_;
};

// Row-major occupancy grid; cell (col, row) covers [col, col+1) x [row, row+1).
class BitGrid {
 public:
  BitGrid(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int col, int row) const { return cells_[index(col, row)] != 0; }
  void set(int col, int row, bool value = true) {
    cells_[index(col, row)] = value ? 1 : 0;
  }
  std::size_t count() const noexcept;

  std::size_t intersection_count(const BitGrid& other) const;
  std::size_t union_count(const BitGrid& other) const;

 private:
  std::size_t index(int col, int row) const;

  int width_;
  int height_;
  std::vector<std::uint8_t> cells_;
};

double box_iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Cell-center sampling with the even-odd rule. Throws InvalidPolygonError for
// fewer than three vertices and ConfigError for non-positive dimensions.
BitGrid rasterize_polygon(std::span<const Point> vertices, int width, int height);
BitGrid rasterize_polygon(const PolygonMask& poly, int width, int height);

// IoU of the two polygons rasterized on a width x height pixel grid.
double mask_iou(const PolygonMask& a, const PolygonMask& b, int width, int height);

// Aspect-preserving resize into a square target with symmetric padding; when
// the total padding is odd the extra pixel goes to the bottom/right.
struct LetterboxTransform {
  double scale = 1.0;
  int pad_left = 0;
  int pad_top = 0;
  int content_width = 0;
  int content_height = 0;
  int source_width = 0;
  int source_height = 0;
  int target = 0;

  int pad_right() const noexcept { return target - content_width - pad_left; }
  int pad_bottom() const noexcept { return target - content_height - pad_top; }

  Point to_target(Point source) const noexcept;
  Point to_source(Point target_point) const noexcept;
  BoundingBox to_target(const BoundingBox& box) const noexcept;
  BoundingBox to_source(const BoundingBox& box) const noexcept;
};

LetterboxTransform letterbox(int source_width, int source_height, int target);

}  // namespace liftaxle
