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

#include "liftaxle/overlay.hpp"

#include "liftaxle/error.hpp"

#ifdef LIFTAXLE_HAVE_OPENCV
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace liftaxle {

bool overlay_supported() noexcept {
#ifdef LIFTAXLE_HAVE_OPENCV
  return true;
#else
  return false;
#endif
}

std::filesystem::path find_image(const std::filesystem::path& dir, const std::string& image_id) {
  for (const char* ext : {".png", ".jpg", ".jpeg", ".bmp"}) {
    std::filesystem::path candidate = dir / (image_id + ext);
    if (std::filesystem::is_regular_file(candidate)) return candidate;
  }
  return {};
}

#ifdef LIFTAXLE_HAVE_OPENCV

namespace {

cv::Rect to_rect(const BoundingBox& b) {
  return cv::Rect(cv::Point(static_cast<int>(b.x_min), static_cast<int>(b.y_min)),
                  cv::Point(static_cast<int>(b.x_max), static_cast<int>(b.y_max)));
}

}  // namespace

std::string render_overlay(const std::filesystem::path& image, const CascadeResult& result) {
  cv::Mat canvas = cv::imread(image.string(), cv::IMREAD_COLOR);
  if (canvas.empty()) throw Error("cannot read image " + image.string());
  // BGR: truck blue, axle orange, lifted purple.
  const cv::Scalar truck_color(255, 128, 0), axle_color(0, 140, 255), lifted_color(200, 0, 160);
  for (const auto& truck : result.trucks) {
    cv::rectangle(canvas, to_rect(truck.truck_box), truck_color, 2);
    for (const auto& axle : truck.axles) {
      const cv::Scalar& c = axle.lifted ? lifted_color : axle_color;
      cv::rectangle(canvas, to_rect(axle.box), c, axle.lifted ? 3 : 2);
      cv::putText(canvas, std::to_string(axle.ordinal),
                  cv::Point(static_cast<int>(axle.box.x_min), static_cast<int>(axle.box.y_min) - 4),
                  cv::FONT_HERSHEY_SIMPLEX, 0.6, c, 2);
    }
  }
  for (const auto& o : result.orphan_axles) {
    cv::rectangle(canvas, to_rect(o.box), cv::Scalar(128, 128, 128), 1);
  }
  std::vector<unsigned char> png;
  if (!cv::imencode(".png", canvas, png)) throw Error("cannot encode overlay for " + image.string());
  return std::string(png.begin(), png.end());
}

#else

std::string render_overlay(const std::filesystem::path&, const CascadeResult&) {
  throw Error("overlay rendering is not available in this build (OpenCV not found)");
}

#endif

}  // namespace liftaxle
