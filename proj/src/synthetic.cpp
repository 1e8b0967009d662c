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

#include "liftaxle/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "liftaxle/error.hpp"
#include "liftaxle/format.hpp"

namespace liftaxle {

namespace {

using nlohmann::json;

constexpr double kMinAxleSide = 6.0;

void check_range(const ConfidenceRange& r, const char* what) {
  if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= 1.0)) {
    throw ConfigError(std::string(what) + " confidence range must satisfy 0 <= lo <= hi <= 1");
  }
}

double draw(std::mt19937_64& rng, const ConfidenceRange& r) {
  return uniform_real(rng, r.lo, r.hi);
}

BoundingBox jitter(const BoundingBox& b, double p, ImageSize size, std::mt19937_64& rng) {
  double x0 = b.x_min + uniform_real(rng, -p, p);
  double y0 = b.y_min + uniform_real(rng, -p, p);
  double x1 = b.x_max + uniform_real(rng, -p, p);
  double y1 = b.y_max + uniform_real(rng, -p, p);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  const double w = size.width, h = size.height;
  return {std::clamp(x0, 0.0, w), std::clamp(y0, 0.0, h), std::clamp(x1, 0.0, w),
          std::clamp(y1, 0.0, h)};
}

PolygonMask jitter(const PolygonMask& m, double p, ImageSize size, std::mt19937_64& rng) {
  std::vector<Point> out;
  for (const Point& v : m.vertices()) {
    out.push_back({std::clamp(v.x + uniform_real(rng, -p, p), 0.0, double(size.width)),
                   std::clamp(v.y + uniform_real(rng, -p, p), 0.0, double(size.height))});
  }
  return PolygonMask(std::move(out));
}

PolygonMask octagon(const BoundingBox& b) {
  const double c = 0.25 * std::min(b.width(), b.height());
  return PolygonMask({{b.x_min + c, b.y_min},
                      {b.x_max - c, b.y_min},
                      {b.x_max, b.y_min + c},
                      {b.x_max, b.y_max - c},
                      {b.x_max - c, b.y_max},
                      {b.x_min + c, b.y_max},
                      {b.x_min, b.y_max - c},
                      {b.x_min, b.y_min + c}});
}

ConfidenceRange parse_range(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("confidence.") + what + " must be [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void SyntheticSceneSpec::validate() const {
  if (size.width <= 0 || size.height <= 0) throw ConfigError("image size must be positive");
  for (const auto& t : trucks) {
    if (t.axle_count < kMinSyntheticAxles || t.axle_count > kMaxSyntheticAxles) {
      throw ConfigError("axle count must lie in [2, 9], got " + std::to_string(t.axle_count));
    }
    for (int o : t.lifted_ordinals) {
      if (o < 1 || o > t.axle_count) {
        throw ConfigError("lifted ordinal " + std::to_string(o) + " outside 1.." +
                          std::to_string(t.axle_count));
      }
    }
  }
  if (!(perturbation >= 0.0) || !std::isfinite(perturbation)) {
    throw ConfigError("perturbation must be a non-negative number of pixels");
  }
  check_range(truck_confidence, "truck");
  check_range(axle_confidence, "axle");
  check_range(lifted_confidence, "lifted");
  check_range(false_positive_confidence, "false positive");
}

SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec) {
  spec.validate();
  SyntheticScene scene;
  scene.image_id = spec.image_id;
  scene.size = spec.size;
  scene.trucks = spec.trucks;

  std::mt19937_64 rng(spec.seed);
  const double w = spec.size.width;
  const double h = spec.size.height;
  const double p = spec.perturbation;
  const std::size_t n = spec.trucks.size();

  std::vector<Detection> truck_dets, axle_dets;
  for (std::size_t t = 0; t < n; ++t) {
    const SyntheticTruckSpec& ts = spec.trucks[t];
    const double slot = w / static_cast<double>(n);
    const BoundingBox truck{slot * t + 0.05 * slot, 0.2 * h, slot * (t + 1) - 0.05 * slot,
                            0.85 * h};
    const int k = ts.axle_count;
    const double side =
        std::min(0.25 * truck.height(), truck.width() / (1.5 * static_cast<double>(k)));
    if (side < kMinAxleSide) {
      throw ConfigError("infeasible layout: " + std::to_string(n) + " trucks with " +
                        std::to_string(k) + " axles do not fit a " +
                        std::to_string(spec.size.width) + " px wide image");
    }
    scene.detection_truth.push_back({0, truck, spec.image_id});
    truck_dets.push_back({0, jitter(truck, p, spec.size, rng), std::nullopt,
                          draw(rng, spec.truck_confidence), spec.image_id});

    const double lift = 0.25 * side;
    for (int i = 0; i < k; ++i) {
      const int ordinal = spec.direction == TravelDirection::front_right ? k - i : i + 1;
      const bool lifted = ts.lifted_ordinals.contains(ordinal);
      const double cx = truck.x_min + truck.width() * (i + 0.5) / k;
      const double y_max = truck.y_max - (lifted ? lift : 0.0);
      const BoundingBox axle{cx - side / 2.0, y_max - side, cx + side / 2.0, y_max};
      scene.detection_truth.push_back({1, axle, spec.image_id});
      axle_dets.push_back({1, jitter(axle, p, spec.size, rng), std::nullopt,
                           draw(rng, spec.axle_confidence), spec.image_id});
      if (lifted) {
        const PolygonMask mask = octagon(axle);
        scene.lifted_truth.push_back({0, mask, spec.image_id});
        PolygonMask predicted = jitter(mask, p, spec.size, rng);
        const BoundingBox bounds = predicted.bounds();
        scene.lifted_detections.push_back({0, bounds, std::move(predicted),
                                           draw(rng, spec.lifted_confidence), spec.image_id});
      }
    }
  }
  scene.detections = std::move(truck_dets);
  scene.detections.insert(scene.detections.end(), axle_dets.begin(), axle_dets.end());

  for (std::size_t f = 0; f < spec.false_positives; ++f) {
    const int cls = static_cast<int>(uniform_index(rng, 2));
    const double bw = uniform_real(rng, 0.02, cls == 0 ? 0.3 : 0.06) * w;
    const double bh = uniform_real(rng, 0.02, cls == 0 ? 0.5 : 0.1) * h;
    const double x0 = uniform_real(rng, 0.0, w - bw);
    const double y0 = uniform_real(rng, 0.0, h - bh);
    scene.detections.push_back({cls, BoundingBox{x0, y0, x0 + bw, y0 + bh}, std::nullopt,
                                draw(rng, spec.false_positive_confidence), spec.image_id});
  }
  return scene;
}

std::vector<SyntheticTruckSpec> random_trucks(std::uint64_t seed, int max_trucks) {
  if (max_trucks < 1) throw ConfigError("max_trucks must be at least 1");
  std::mt19937_64 rng(seed);
  const int n = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_trucks)));
  std::vector<SyntheticTruckSpec> out(static_cast<std::size_t>(n));
  for (auto& t : out) {
    t.axle_count = kMinSyntheticAxles +
                   static_cast<int>(uniform_index(rng, kMaxSyntheticAxles - kMinSyntheticAxles + 1));
    for (int o = 1; o <= t.axle_count; ++o) {
      if (uniform_unit(rng) < 0.3) t.lifted_ordinals.insert(o);
    }
  }
  return out;
}

SyntheticSetSpec parse_synthetic_set_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("synthetic spec must be a JSON object");
  SyntheticSetSpec set;
  SyntheticSceneSpec& s = set.scene;
  try {
    s.seed = doc.value("seed", std::uint64_t{0});
    set.images = doc.value("images", std::size_t{1});
    set.max_trucks = doc.value("max_trucks", 5);
    s.size = {doc.value("width", 1280), doc.value("height", 720)};
    s.perturbation = doc.value("perturbation", 0.0);
    s.false_positives = doc.value("false_positives", std::size_t{0});
    if (doc.contains("direction")) {
      s.direction = parse_travel_direction(doc["direction"].get<std::string>());
    }
    if (doc.contains("trucks")) {
      for (const auto& t : doc["trucks"]) {
        SyntheticTruckSpec ts;
        ts.axle_count = t.at("axles").get<int>();
        for (const auto& o : t.value("lifted", json::array())) ts.lifted_ordinals.insert(o.get<int>());
        s.trucks.push_back(std::move(ts));
      }
    }
    if (doc.contains("confidence")) {
      const json& c = doc["confidence"];
      if (c.contains("truck")) s.truck_confidence = parse_range(c["truck"], "truck");
      if (c.contains("axle")) s.axle_confidence = parse_range(c["axle"], "axle");
      if (c.contains("lifted")) s.lifted_confidence = parse_range(c["lifted"], "lifted");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid synthetic spec: ") + e.what());
  }
  if (set.images == 0) throw ConfigError("images must be at least 1");
  s.validate();
  return set;
}

std::vector<SyntheticScene> generate_synthetic_set(const SyntheticSetSpec& spec) {
  std::vector<SyntheticScene> out;
  out.reserve(spec.images);
  for (std::size_t i = 0; i < spec.images; ++i) {
    SyntheticSceneSpec s = spec.scene;
    s.seed = spec.scene.seed + i;
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%04zu", i);
    s.image_id = id;
    if (s.trucks.empty()) s.trucks = random_trucks(s.seed ^ 0x9e3779b97f4a7c15ULL, spec.max_trucks);
    out.push_back(generate_synthetic_scene(s));
  }
  return out;
}

}  // namespace liftaxle
