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

#include "liftaxle/report.hpp"

#include <cmath>
#include <sstream>

#include "liftaxle/format.hpp"

namespace liftaxle {

namespace {

using nlohmann::json;

std::string class_name(int id, const ClassMap& names) {
  if (id == kBackground) return "background";
  const auto it = names.find(id);
  return it != names.end() ? it->second : "class_" + std::to_string(id);
}

json optional_ratio(const std::optional<double>& v) {
  return v ? json(round4(*v)) : json(nullptr);
}

std::string cell(double v) { return format_fixed(v, 4); }
std::string cell(const std::optional<double>& v) { return v ? format_fixed(*v, 4) : "-"; }

ClassMap names_of(const EvalReport& report) {
  ClassMap names = report.options.classes;
  for (const auto& c : report.classes) names.emplace(c.class_id, c.name);
  return names;
}

// Class ids followed by background.
std::vector<int> axis(const ConfusionMatrix& cm) {
  std::vector<int> ids = cm.class_ids();
  ids.push_back(kBackground);
  return ids;
}

}  // namespace

double round4(double v) { return std::round(v * 1e4) / 1e4; }

json report_to_json(const EvalReport& report) {
  json classes = json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"class", c.class_id},
                       {"name", c.name},
                       {"ground_truth", c.ground_truth},
                       {"predictions", c.predictions},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"precision", round4(c.precision)},
                       {"recall", round4(c.recall)},
                       {"f1", round4(c.f1)},
                       {"ap50", optional_ratio(c.ap50)},
                       {"ap50_95", optional_ratio(c.ap50_95)}});
  }
  const auto& o = report.options;
  return {{"options",
           {{"iou_threshold", o.iou_threshold},
            {"confidence_threshold", o.confidence_threshold},
            {"ranking_confidence", o.ranking_confidence},
            {"iou_kind", std::string(to_string(o.iou_kind))}}},
          {"precision", round4(report.precision)},
          {"recall", round4(report.recall)},
          {"f1", round4(report.f1)},
          {"map50", optional_ratio(report.map50)},
          {"map50_95", optional_ratio(report.map50_95)},
          {"classes", classes},
          {"confusion_matrix", confusion_to_json(report.confusion, names_of(report))}};
}

std::string report_to_markdown(const EvalReport& report, std::string_view model_name) {
  std::ostringstream os;
  os << "| Model | Precision | Recall | F1-score | mAP50 | mAP50-95 |\n"
     << "|---|---|---|---|---|---|\n";
  os << "| " << model_name << " | " << cell(report.precision) << " | "
     << cell(report.recall) << " | " << cell(report.f1) << " | " << cell(report.map50)
     << " | " << cell(report.map50_95) << " |\n";
  for (const auto& c : report.classes) {
    os << "| " << c.name << " | " << cell(c.precision) << " | " << cell(c.recall)
       << " | " << cell(c.f1) << " | " << cell(c.ap50) << " | " << cell(c.ap50_95)
       << " |\n";
  }
  os << "\n" << confusion_to_markdown(report.confusion, names_of(report));
  return os.str();
}

std::string report_to_csv(const EvalReport& report) {
  auto csv_cell = [](const std::optional<double>& v) {
    return v ? format_fixed(*v, 4) : std::string();
  };
  std::ostringstream os;
  os << "class,name,ground_truth,predictions,tp,fp,fn,precision,recall,f1,map50,map50_95\n";
  std::size_t gt = 0, preds = 0, tp = 0, fp = 0, fn = 0;
  for (const auto& c : report.classes) {
    gt += c.ground_truth;
    preds += c.predictions;
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  os << "all,all," << gt << ',' << preds << ',' << tp << ',' << fp << ',' << fn << ','
     << cell(report.precision) << ',' << cell(report.recall) << ',' << cell(report.f1)
     << ',' << csv_cell(report.map50) << ',' << csv_cell(report.map50_95) << '\n';
  for (const auto& c : report.classes) {
    os << c.class_id << ',' << c.name << ',' << c.ground_truth << ',' << c.predictions
       << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << cell(c.precision) << ','
       << cell(c.recall) << ',' << cell(c.f1) << ',' << csv_cell(c.ap50) << ','
       << csv_cell(c.ap50_95) << '\n';
  }
  return os.str();
}

json confusion_to_json(const ConfusionMatrix& cm, const ClassMap& names) {
  const auto ids = axis(cm);
  json labels = json::array();
  for (int id : ids) labels.push_back(class_name(id, names));
  json rows = json::array();
  for (int t : ids) {
    json row = json::array();
    for (int p : ids) row.push_back(t == kBackground && p == kBackground ? 0 : cm.at(t, p));
    rows.push_back(std::move(row));
  }
  json recalls = json::object();
  for (int id : cm.class_ids()) recalls[class_name(id, names)] = optional_ratio(cm.recall(id));
  return {{"labels", labels},
          {"rows_true_cols_predicted", rows},
          {"recall", recalls},
          {"confidence_threshold", cm.confidence_threshold()},
          {"iou_threshold", cm.iou_threshold()}};
}

std::string confusion_to_markdown(const ConfusionMatrix& cm, const ClassMap& names) {
  const auto ids = axis(cm);
  std::ostringstream os;
  os << "| true \\ predicted |";
  for (int id : ids) os << ' ' << class_name(id, names) << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < ids.size(); ++i) os << "---|";
  os << '\n';
  for (int t : ids) {
    os << "| " << class_name(t, names) << " |";
    for (int p : ids) os << ' ' << (t == kBackground && p == kBackground ? 0 : cm.at(t, p)) << " |";
    os << '\n';
  }
  return os.str();
}

std::string confusion_to_csv(const ConfusionMatrix& cm, const ClassMap& names) {
  const auto ids = axis(cm);
  std::ostringstream os;
  os << "true\\predicted";
  for (int id : ids) os << ',' << class_name(id, names);
  os << '\n';
  for (int t : ids) {
    os << class_name(t, names);
    for (int p : ids) os << ',' << (t == kBackground && p == kBackground ? 0 : cm.at(t, p));
    os << '\n';
  }
  return os.str();
}

std::string envelopes_to_csv(const EvalReport& report) {
  const ClassMap names = names_of(report);
  std::ostringstream os;
  os << "class,recall,precision\n";
  for (const auto& [cls, env] : report.envelopes) {
    for (std::size_t r = 0; r < env.size(); ++r) {
      os << class_name(cls, names) << ',' << format_fixed(static_cast<double>(r) / 100.0, 2)
         << ',' << format_fixed(env[r], 4) << '\n';
    }
  }
  return os.str();
}

}  // namespace liftaxle
