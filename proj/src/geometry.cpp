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

#include "liftaxle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liftaxle/error.hpp"

namespace liftaxle {

namespace {

// Scanline fill of rows [row_begin, row_end) and columns [col_begin, col_end)
// of the pixel grid. Output cells are written into `grid` relative to the
// (col_begin, row_begin) origin.
void fill_polygon(std::span<const Point> vertices, int col_begin, int col_end,
                  int row_begin, int row_end, BitGrid& grid) {
  std::vector<double> crossings;
  crossings.reserve(vertices.size());
  const std::size_t n = vertices.size();
  for (int row = row_begin; row < row_end; ++row) {
    const double yc = row + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = vertices[i];
      const Point& q = vertices[(i + 1) % n];
      if ((p.y <= yc) != (q.y <= yc)) {
        crossings.push_back(p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      // Cells whose center col + 0.5 lies in [x0, x1).
      const double first = std::ceil(crossings[k] - 0.5);
      const double last = std::ceil(crossings[k + 1] - 0.5);
      const int lo = static_cast<int>(std::max<double>(first, col_begin));
      const int hi = static_cast<int>(std::min<double>(last, col_end));
      for (int col = lo; col < hi; ++col) {
        grid.set(col - col_begin, row - row_begin);
      }
    }
  }
}

void check_vertices(std::span<const Point> vertices) {
  if (vertices.size() < 3) {
    throw InvalidPolygonError("polygon needs at least 3 vertices, got " +
                              std::to_string(vertices.size()));
  }
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0) {
      throw InvalidPolygonError("polygon vertex must be finite and non-negative");
    }
  }
}

void check_grid(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ConfigError("grid dimensions must be positive");
  }
}

}  // namespace

bool BoundingBox::is_valid() const noexcept {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

PolygonMask::PolygonMask(std::vector<Point> vertices)
    : vertices_(std::move(vertices)) {
  check_vertices(vertices_);
}

BoundingBox PolygonMask::bounds() const noexcept {
  BoundingBox box{vertices_.front().x, vertices_.front().y, vertices_.front().x,
                  vertices_.front().y};
  for (const Point& p : vertices_) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

double PolygonMask::area() const noexcept {
  double twice = 0.0;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = vertices_[i];
    const Point& q = vertices_[(i + 1) % n];
    twice += p.x * q.y - q.x * p.y;
  }
  return std::abs(twice) / 2.0;
}

BitGrid::BitGrid(int width, int height)
    : width_(width), height_(height),
      cells_(static_cast<std::size_t>(std::max(width, 0)) *
             static_cast<std::size_t>(std::max(height, 0))) {}

std::size_t BitGrid::index(int col, int row) const {
  if (col < 0 || col >= width_ || row < 0 || row >= height_) {
    throw std::out_of_range("BitGrid cell out of range");
  }
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
         static_cast<std::size_t>(col);
}

std::size_t BitGrid::count() const noexcept {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

std::size_t BitGrid::intersection_count(const BitGrid& other) const {
  if (other.width_ != width_ || other.height_ != height_) {
    throw std::invalid_argument("BitGrid dimensions differ");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) n += cells_[i] & other.cells_[i];
  return n;
}

std::size_t BitGrid::union_count(const BitGrid& other) const {
  if (other.width_ != width_ || other.height_ != height_) {
    throw std::invalid_argument("BitGrid dimensions differ");
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) n += cells_[i] | other.cells_[i];
  return n;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0) || inter <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

BitGrid rasterize_polygon(std::span<const Point> vertices, int width, int height) {
  check_vertices(vertices);
  check_grid(width, height);
  BitGrid grid(width, height);
  fill_polygon(vertices, 0, width, 0, height, grid);
  return grid;
}

BitGrid rasterize_polygon(const PolygonMask& poly, int width, int height) {
  return rasterize_polygon(poly.vertices(), width, height);
}

double mask_iou(const PolygonMask& a, const PolygonMask& b, int width, int height) {
  check_grid(width, height);
  // Only cells inside the joint bounds can be set; rasterize that window.
  const BoundingBox ba = a.bounds();
  const BoundingBox bb = b.bounds();
  const int col_begin = std::clamp(
      static_cast<int>(std::floor(std::min(ba.x_min, bb.x_min))), 0, width);
  const int col_end = std::clamp(
      static_cast<int>(std::ceil(std::max(ba.x_max, bb.x_max))) + 1, 0, width);
  const int row_begin = std::clamp(
      static_cast<int>(std::floor(std::min(ba.y_min, bb.y_min))), 0, height);
  const int row_end = std::clamp(
      static_cast<int>(std::ceil(std::max(ba.y_max, bb.y_max))) + 1, 0, height);
  if (col_end <= col_begin || row_end <= row_begin) return 0.0;

  BitGrid ga(col_end - col_begin, row_end - row_begin);
  BitGrid gb(col_end - col_begin, row_end - row_begin);
  fill_polygon(a.vertices(), col_begin, col_end, row_begin, row_end, ga);
  fill_polygon(b.vertices(), col_begin, col_end, row_begin, row_end, gb);
  const std::size_t uni = ga.union_count(gb);
  if (uni == 0) return 0.0;
  return static_cast<double>(ga.intersection_count(gb)) / static_cast<double>(uni);
}

Point LetterboxTransform::to_target(Point source) const noexcept {
  return {source.x * scale + pad_left, source.y * scale + pad_top};
}

Point LetterboxTransform::to_source(Point target_point) const noexcept {
  return {(target_point.x - pad_left) / scale, (target_point.y - pad_top) / scale};
}

BoundingBox LetterboxTransform::to_target(const BoundingBox& box) const noexcept {
  const Point lo = to_target(Point{box.x_min, box.y_min});
  const Point hi = to_target(Point{box.x_max, box.y_max});
  return {lo.x, lo.y, hi.x, hi.y};
}

BoundingBox LetterboxTransform::to_source(const BoundingBox& box) const noexcept {
  const Point lo = to_source(Point{box.x_min, box.y_min});
  const Point hi = to_source(Point{box.x_max, box.y_max});
  return {lo.x, lo.y, hi.x, hi.y};
}

LetterboxTransform letterbox(int source_width, int source_height, int target) {
  if (source_width <= 0 || source_height <= 0 || target <= 0) {
    throw ConfigError("letterbox dimensions must be positive");
  }
  LetterboxTransform t;
  t.source_width = source_width;
  t.source_height = source_height;
  t.target = target;
  t.scale = static_cast<double>(target) / std::max(source_width, source_height);
  t.content_width = std::min(
      target, static_cast<int>(std::lround(source_width * t.scale)));
  t.content_height = std::min(
      target, static_cast<int>(std::lround(source_height * t.scale)));
  t.pad_left = (target - t.content_width) / 2;
  t.pad_top = (target - t.content_height) / 2;
  return t;
}

}  // namespace liftaxle
