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

#include <string>
#include <string_view>

#include <json.hpp>

#include "liftaxle/annotations.hpp"
#include "liftaxle/metrics.hpp"

namespace liftaxle {

// Every ratio is rounded to four decimals in all three formats; undefined
// APs become null (JSON) or "-" (Markdown, CSV).
nlohmann::json report_to_json(const EvalReport& report);

// Precision | Recall | F1-score | mAP50 | mAP50-95, one aggregate row labelled
// `model_name` followed by one row per class, then the confusion matrix.
std::string report_to_markdown(const EvalReport& report,
                               std::string_view model_name = "model");

std::string report_to_csv(const EvalReport& report);

// Rows are true classes, columns predicted classes; background last in both.
nlohmann::json confusion_to_json(const ConfusionMatrix& cm, const ClassMap& names);
std::string confusion_to_markdown(const ConfusionMatrix& cm, const ClassMap& names);
std::string confusion_to_csv(const ConfusionMatrix& cm, const ClassMap& names);

// class,recall,precision rows for the 101 sampled recall levels.
std::string envelopes_to_csv(const EvalReport& report);

double round4(double v);

}  // namespace liftaxle
