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

#include "liftaxle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "liftaxle/error.hpp"

namespace liftaxle {

namespace {

// Grid for mask IoU when the caller did not supply the image size.
ImageSize infer_grid(std::span<const Detection> predictions,
                     std::span<const GroundTruthInstance> ground_truth) {
  double max_x = 1.0, max_y = 1.0;
  auto extend = [&](const BoundingBox& b) {
    max_x = std::max(max_x, b.x_max);
    max_y = std::max(max_y, b.y_max);
  };
  for (const auto& p : predictions) {
    if (p.mask) extend(p.mask->bounds());
  }
  for (const auto& g : ground_truth) extend(g.box());
  return {static_cast<int>(std::ceil(max_x)) + 1, static_cast<int>(std::ceil(max_y)) + 1};
}

double pair_iou(const Detection& p, const GroundTruthInstance& g, IouKind kind,
                ImageSize grid) {
  if (kind == IouKind::box) return box_iou(p.box, g.box());
  const PolygonMask* gm = g.mask();
  if (!p.mask || gm == nullptr) {
    throw Error("mask IoU requested but a " +
                std::string(!p.mask ? "prediction" : "ground-truth instance") +
                " of image '" + (!p.mask ? p.image_id : g.image_id) +
                "' has no mask");
  }
  return mask_iou(*p.mask, *gm, grid.width, grid.height);
}

// Indices sorted by descending confidence, stable on input order.
std::vector<std::size_t> confidence_order(std::span<const Detection> predictions,
                                          std::span<const std::size_t> subset) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });
  return order;
}

// Per-class IoU table shared by every threshold of a sweep.
struct ClassIouTable {
  std::vector<std::size_t> predictions;  // confidence order
  std::vector<std::size_t> ground_truth;
  std::vector<double> iou;               // predictions x ground_truth

  double at(std::size_t p, std::size_t g) const {
    return iou[p * ground_truth.size() + g];
  }
};

std::map<int, ClassIouTable> build_iou_tables(
    std::span<const Detection> predictions,
    std::span<const GroundTruthInstance> ground_truth, IouKind kind, ImageSize size,
    double min_confidence) {
  if (kind == IouKind::mask && (size.width <= 0 || size.height <= 0)) {
    size = infer_grid(predictions, ground_truth);
  }
  std::map<int, std::vector<std::size_t>> pred_by_class;
  std::map<int, ClassIouTable> tables;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].confidence < min_confidence) continue;
    pred_by_class[predictions[i].class_id].push_back(i);
    tables[predictions[i].class_id];
  }
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    tables[ground_truth[i].class_id].ground_truth.push_back(i);
  }
  for (auto& [cls, table] : tables) {
    table.predictions = confidence_order(predictions, pred_by_class[cls]);
    table.iou.resize(table.predictions.size() * table.ground_truth.size());
    for (std::size_t p = 0; p < table.predictions.size(); ++p) {
      for (std::size_t g = 0; g < table.ground_truth.size(); ++g) {
        table.iou[p * table.ground_truth.size() + g] =
            pair_iou(predictions[table.predictions[p]],
                     ground_truth[table.ground_truth[g]], kind, size);
      }
    }
  }
  return tables;
}

MatchResult greedy_match(const std::map<int, ClassIouTable>& tables,
                         double iou_threshold) {
  MatchResult result;
  result.iou_threshold = iou_threshold;
  std::vector<char> taken;
  for (const auto& [cls, table] : tables) {
    ClassMatches& m = result.classes[cls];
    taken.assign(table.ground_truth.size(), 0);
    for (std::size_t p = 0; p < table.predictions.size(); ++p) {
      std::size_t best = table.ground_truth.size();
      double best_iou = -1.0;
      for (std::size_t g = 0; g < table.ground_truth.size(); ++g) {
        if (taken[g]) continue;
        const double v = table.at(p, g);
        if (v >= iou_threshold && v > best_iou) {
          best = g;
          best_iou = v;
        }
      }
      if (best < table.ground_truth.size()) {
        taken[best] = 1;
        m.true_positives.push_back({table.predictions[p], table.ground_truth[best], best_iou});
      } else {
        m.false_positives.push_back(table.predictions[p]);
      }
    }
    for (std::size_t g = 0; g < table.ground_truth.size(); ++g) {
      if (!taken[g]) m.false_negatives.push_back(table.ground_truth[g]);
    }
  }
  return result;
}

void check_unit_interval(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw ConfigError(std::string(what) + " must lie in (0, 1)");
  }
}

}  // namespace

IouKind parse_iou_kind(std::string_view token) {
  if (token == "box") return IouKind::box;
  if (token == "mask") return IouKind::mask;
  throw ConfigError("unknown IoU kind '" + std::string(token) + "' (expected box or mask)");
}

std::string_view to_string(IouKind kind) noexcept {
  return kind == IouKind::box ? "box" : "mask";
}

const ClassMatches& MatchResult::at(int class_id) const {
  static const ClassMatches kEmpty;
  const auto it = classes.find(class_id);
  return it == classes.end() ? kEmpty : it->second;
}

MatchResult match_predictions(std::span<const Detection> predictions,
                              std::span<const GroundTruthInstance> ground_truth,
                              double iou_threshold, IouKind kind, ImageSize size) {
  check_unit_interval(iou_threshold, "IoU threshold");
  return greedy_match(build_iou_tables(predictions, ground_truth, kind, size, 0.0),
                      iou_threshold);
}

double f1_score(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrecisionRecall compute_prf(std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
  if (tp + fp == 0 && tp + fn == 0) return {1.0, 1.0, 1.0};
  PrecisionRecall out;
  out.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  out.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  out.f1 = f1_score(out.precision, out.recall);
  return out;
}

std::array<double, kRecallPoints> precision_envelope(const std::vector<bool>& ranked_outcomes,
                                                     std::size_t ground_truth_count) {
  std::array<double, kRecallPoints> env{};
  const std::size_t n = ranked_outcomes.size();
  if (ground_truth_count == 0 || n == 0) return env;
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranked_outcomes[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(ground_truth_count);
  }
  for (std::size_t k = n - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  // Recall is non-decreasing, so one forward sweep finds each first index
  // with recall >= r.
  std::size_t idx = 0;
  for (std::size_t r = 0; r < kRecallPoints; ++r) {
    const double level = static_cast<double>(r) / 100.0;
    while (idx < n && recall[idx] < level) ++idx;
    env[r] = idx < n ? precision[idx] : 0.0;
  }
  return env;
}

std::optional<double> average_precision(const std::vector<bool>& ranked_outcomes,
                                        std::size_t ground_truth_count) {
  if (ground_truth_count == 0) return std::nullopt;
  const auto env = precision_envelope(ranked_outcomes, ground_truth_count);
  double sum = 0.0;
  for (double p : env) sum += p;
  return sum / static_cast<double>(kRecallPoints);
}

double mean_ap(std::span<const std::optional<double>> per_class_aps) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& ap : per_class_aps) {
    if (ap) {
      sum += *ap;
      ++n;
    }
  }
  if (n == 0) throw Error("mAP is undefined: no class has a defined AP");
  return sum / static_cast<double>(n);
}

std::vector<bool> ClassTally::ranked_outcomes() const {
  std::vector<const Entry*> order;
  order.reserve(entries.size());
  for (const auto& e : entries) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const Entry* a, const Entry* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    if (a->image_id != b->image_id) return a->image_id < b->image_id;
    return a->index < b->index;
  });
  std::vector<bool> out;
  out.reserve(order.size());
  for (const Entry* e : order) out.push_back(e->true_positive);
  return out;
}

void EvaluationTally::add(const MatchResult& result, std::span<const Detection> predictions,
                          std::span<const GroundTruthInstance> ground_truth,
                          const std::string& image_id) {
  (void)ground_truth;
  for (const auto& [cls, m] : result.classes) {
    ClassTally& t = classes_[cls];
    t.ground_truth_count += m.tp() + m.fn();
    for (const auto& tp : m.true_positives) {
      t.entries.push_back({predictions[tp.prediction].confidence, true, image_id, tp.prediction});
    }
    for (std::size_t fp : m.false_positives) {
      t.entries.push_back({predictions[fp].confidence, false, image_id, fp});
    }
  }
}

void EvaluationTally::merge(const EvaluationTally& other) {
  for (const auto& [cls, t] : other.classes_) {
    ClassTally& mine = classes_[cls];
    mine.ground_truth_count += t.ground_truth_count;
    mine.entries.insert(mine.entries.end(), t.entries.begin(), t.entries.end());
  }
}

std::optional<double> EvaluationTally::average_precision(int class_id) const {
  const auto it = classes_.find(class_id);
  if (it == classes_.end()) return std::nullopt;
  return liftaxle::average_precision(it->second.ranked_outcomes(),
                                     it->second.ground_truth_count);
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) out.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return out;
}

ThresholdSweep map_over_thresholds(std::span<const EvalImage> images,
                                   std::span<const double> thresholds, IouKind kind,
                                   double min_confidence) {
  if (thresholds.empty()) throw ConfigError("at least one IoU threshold is required");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    check_unit_interval(thresholds[i], "IoU threshold");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw ConfigError("IoU thresholds must be strictly increasing");
    }
  }

  std::vector<EvaluationTally> tallies(thresholds.size());
  std::set<int> class_ids;
  for (const auto& image : images) {
    const auto tables = build_iou_tables(image.predictions, image.ground_truth, kind,
                                         image.size, min_confidence);
    for (const auto& [cls, table] : tables) class_ids.insert(cls);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      tallies[t].add(greedy_match(tables, thresholds[t]), image.predictions,
                     image.ground_truth, image.image_id);
    }
  }

  ThresholdSweep sweep;
  sweep.thresholds.assign(thresholds.begin(), thresholds.end());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<std::optional<double>> aps;
    for (int cls : class_ids) {
      aps.push_back(tallies[t].average_precision(cls));
      sweep.class_ap[cls].push_back(aps.back());
    }
    sweep.map.push_back(mean_ap(aps));
  }
  sweep.mean = std::accumulate(sweep.map.begin(), sweep.map.end(), 0.0) /
               static_cast<double>(sweep.map.size());
  sweep.tallies = std::move(tallies);
  return sweep;
}

void ConfusionMatrix::add(int true_class, int predicted_class, std::size_t n) {
  if (true_class == kBackground && predicted_class == kBackground) {
    throw std::invalid_argument("background/background is not a confusion cell");
  }
  if (true_class != kBackground) class_ids_.insert(true_class);
  if (predicted_class != kBackground) class_ids_.insert(predicted_class);
  counts_[{true_class, predicted_class}] += n;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  class_ids_.insert(other.class_ids_.begin(), other.class_ids_.end());
  for (const auto& [cell, n] : other.counts_) counts_[cell] += n;
}

std::size_t ConfusionMatrix::at(int true_class, int predicted_class) const {
  const auto it = counts_.find({true_class, predicted_class});
  return it == counts_.end() ? 0 : it->second;
}

std::size_t ConfusionMatrix::row_total(int true_class) const {
  std::size_t n = 0;
  for (const auto& [cell, c] : counts_) {
    if (cell.first == true_class) n += c;
  }
  return n;
}

std::optional<double> ConfusionMatrix::recall(int class_id) const {
  const std::size_t total = row_total(class_id);
  if (total == 0) return std::nullopt;
  return static_cast<double>(at(class_id, class_id)) / static_cast<double>(total);
}

ConfusionMatrix confusion_matrix(std::span<const Detection> predictions,
                                 std::span<const GroundTruthInstance> ground_truth,
                                 double confidence_threshold, double iou_threshold,
                                 IouKind kind, ImageSize size) {
  check_unit_interval(confidence_threshold, "confidence threshold");
  check_unit_interval(iou_threshold, "IoU threshold");
  if (kind == IouKind::mask && (size.width <= 0 || size.height <= 0)) {
    size = infer_grid(predictions, ground_truth);
  }
  ConfusionMatrix cm(confidence_threshold, iou_threshold);
  for (const auto& g : ground_truth) cm.add_class(g.class_id);

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].confidence >= confidence_threshold) kept.push_back(i);
  }
  const auto order = confidence_order(predictions, kept);

  std::vector<char> taken(ground_truth.size(), 0);
  for (std::size_t p : order) {
    const Detection& pred = predictions[p];
    cm.add_class(pred.class_id);
    std::size_t best = ground_truth.size();
    double best_iou = -1.0;
    bool best_same = false;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) continue;
      const double v = pair_iou(pred, ground_truth[g], kind, size);
      if (v < iou_threshold) continue;
      const bool same = ground_truth[g].class_id == pred.class_id;
      if (v > best_iou || (v == best_iou && same && !best_same)) {
        best = g;
        best_iou = v;
        best_same = same;
      }
    }
    if (best < ground_truth.size()) {
      taken[best] = 1;
      cm.add(ground_truth[best].class_id, pred.class_id);
    } else {
      cm.add(kBackground, pred.class_id);
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!taken[g]) cm.add(ground_truth[g].class_id, kBackground);
  }
  return cm;
}

EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& options) {
  check_unit_interval(options.iou_threshold, "IoU threshold");
  check_unit_interval(options.confidence_threshold, "confidence threshold");
  if (!(options.ranking_confidence >= 0.0 && options.ranking_confidence < 1.0)) {
    throw ConfigError("ranking confidence must lie in [0, 1)");
  }

  EvalReport report;
  report.options = options;
  report.confusion = ConfusionMatrix(options.confidence_threshold, options.iou_threshold);

  // Operating-point counts: one match per image at the report's thresholds.
  std::map<int, std::array<std::size_t, 5>> counts;  // gt, preds, tp, fp, fn
  for (const auto& image : images) {
    const auto tables = build_iou_tables(image.predictions, image.ground_truth,
                                         options.iou_kind, image.size,
                                         options.confidence_threshold);
    const MatchResult m = greedy_match(tables, options.iou_threshold);
    for (const auto& [cls, cm] : m.classes) {
      auto& c = counts[cls];
      c[0] += cm.tp() + cm.fn();
      c[1] += cm.tp() + cm.fp();
      c[2] += cm.tp();
      c[3] += cm.fp();
      c[4] += cm.fn();
    }
    report.confusion.merge(confusion_matrix(image.predictions, image.ground_truth,
                                            options.confidence_threshold,
                                            options.iou_threshold, options.iou_kind,
                                            image.size));
  }

  const auto thresholds = coco_iou_thresholds();
  const ThresholdSweep sweep =
      [&]() -> ThresholdSweep {
        bool any_truth = false;
        for (const auto& image : images) any_truth |= !image.ground_truth.empty();
        if (!any_truth) return {};
        return map_over_thresholds(images, thresholds, options.iou_kind,
                                   options.ranking_confidence);
      }();

  std::set<int> class_ids;
  for (const auto& [cls, c] : counts) class_ids.insert(cls);
  for (const auto& [cls, aps] : sweep.class_ap) class_ids.insert(cls);

  for (int cls : class_ids) {
    ClassReport r;
    r.class_id = cls;
    const auto name = options.classes.find(cls);
    r.name = name != options.classes.end() ? name->second : "class_" + std::to_string(cls);
    const auto& c = counts[cls];
    r.ground_truth = c[0];
    r.predictions = c[1];
    r.tp = c[2];
    r.fp = c[3];
    r.fn = c[4];
    const PrecisionRecall prf = compute_prf(r.tp, r.fp, r.fn);
    r.precision = prf.precision;
    r.recall = prf.recall;
    r.f1 = prf.f1;
    if (const auto it = sweep.class_ap.find(cls); it != sweep.class_ap.end()) {
      r.ap50 = it->second.front();
      if (std::all_of(it->second.begin(), it->second.end(),
                      [](const auto& v) { return v.has_value(); })) {
        double sum = 0.0;
        for (const auto& v : it->second) sum += *v;
        r.ap50_95 = sum / static_cast<double>(it->second.size());
      }
    }
    report.classes.push_back(std::move(r));
  }

  if (!report.classes.empty()) {
    double p = 0.0, rc = 0.0;
    for (const auto& r : report.classes) {
      p += r.precision;
      rc += r.recall;
    }
    report.precision = p / static_cast<double>(report.classes.size());
    report.recall = rc / static_cast<double>(report.classes.size());
    report.f1 = f1_score(report.precision, report.recall);
  }
  if (!sweep.map.empty()) {
    report.map50 = sweep.map.front();
    report.map50_95 = sweep.mean;
  }

  // Envelopes at IoU 0.5 (the first sweep threshold) for PR export.
  if (!sweep.tallies.empty()) {
    for (const auto& [cls, t] : sweep.tallies.front().classes()) {
      if (t.ground_truth_count == 0) continue;
      report.envelopes[cls] = precision_envelope(t.ranked_outcomes(), t.ground_truth_count);
    }
  }
  return report;
}

}  // namespace liftaxle
