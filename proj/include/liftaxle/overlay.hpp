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

#include <filesystem>
#include <string>
#include <vector>

#include "liftaxle/cascade.hpp"

namespace liftaxle {

bool overlay_supported() noexcept;

// Draws truck boxes, axle boxes with their ordinals and lifted axles in a
// highlight colour onto a copy of `image` and returns it PNG-encoded. Throws
// Error when the image cannot be read or overlays were not built.
std::string render_overlay(const std::filesystem::path& image, const CascadeResult& result);

// First existing <dir>/<image_id>.{png,jpg,jpeg,bmp}, or empty.
std::filesystem::path find_image(const std::filesystem::path& dir, const std::string& image_id);

}  // namespace liftaxle
