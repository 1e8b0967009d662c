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

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace liftaxle {

// printf("%.Nf")
std::string format_fixed(double value, int decimals);

// Shortest round-trip representation ("0.01", "400").
std::string format_shortest(double value);

// Whole-token numeric parses; return false on any trailing garbage.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, int& out);

// Unbiased draw in [0, bound) from the raw engine output, so sequences do not
// depend on the standard library's distribution implementations.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);
// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform_unit(std::mt19937_64& rng);
double uniform_real(std::mt19937_64& rng, double lo, double hi);

}  // namespace liftaxle
