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

#include <chrono>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace liftaxle {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance block embedded in every emitted report.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;  // path -> sha256 hex
  std::string tool_version = kToolVersion;
  double duration_seconds = 0.0;

  nlohmann::json to_json() const;
};

std::string sha256_hex(const std::string& bytes);

// Entry point behind the `liftaxle` executable. `args` excludes the program
// name. Reports go to `out` (or files), diagnostics to `err`. Returns the
// process exit code; nothing is written to disk unless the command succeeds.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace liftaxle
