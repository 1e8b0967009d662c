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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "liftaxle/annotations.hpp"
#include "liftaxle/geometry.hpp"

namespace liftaxle {

struct Detection {
  int class_id = 0;
  BoundingBox box;
  std::optional<PolygonMask> mask;
  double confidence = 0.0;
  std::string image_id;
};

enum class IouKind { box, mask };

IouKind parse_iou_kind(std::string_view token);
std::string_view to_string(IouKind kind) noexcept;

struct TruePositive {
  std::size_t prediction = 0;    // index into the prediction span
  std::size_t ground_truth = 0;  // index into the ground-truth span
  double iou = 0.0;
};

struct ClassMatches {
  std::vector<TruePositive> true_positives;
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;

  std::size_t tp() const noexcept { return true_positives.size(); }
  std::size_t fp() const noexcept { return false_positives.size(); }
  std::size_t fn() const noexcept { return false_negatives.size(); }
};

// Outcome of matching one image's predictions against its ground truth.
struct MatchResult {
  double iou_threshold = 0.5;
  std::map<int, ClassMatches> classes;

  // Empty matches for classes absent from the image.
  const ClassMatches& at(int class_id) const;
};

// Greedy matching: predictions in descending confidence (stable on input
// order) each claim the unmatched same-class ground truth of highest IoU, if
// that IoU is >= iou_threshold; IoU ties go to the lower ground-truth index.
// Mask IoU is evaluated on a grid of `size` (inferred from the geometry when
// left zero) and throws Error if a participant has no mask.
MatchResult match_predictions(std::span<const Detection> predictions,
                              std::span<const GroundTruthInstance> ground_truth,
                              double iou_threshold, IouKind kind = IouKind::box,
                              ImageSize size = {});

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

double f1_score(double precision, double recall) noexcept;

// A class with neither predictions nor ground truth scores 1/1/1; any other
// empty denominator scores 0.
PrecisionRecall compute_prf(std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

inline constexpr std::size_t kRecallPoints = 101;

// Precision envelope max{p(k) : recall(k) >= r} sampled at r = 0, 0.01, ..., 1.
// `ranked_outcomes` is the TP/FP flag of each prediction in descending
// confidence order. Recall levels that are never reached sample as 0.
std::array<double, kRecallPoints> precision_envelope(
    const std::vector<bool>& ranked_outcomes, std::size_t ground_truth_count);

// 101-point interpolated AP; nullopt when there is no ground truth.
std::optional<double> average_precision(const std::vector<bool>& ranked_outcomes,
                                        std::size_t ground_truth_count);

// Mean over the defined entries. Throws Error when none is defined.
double mean_ap(std::span<const std::optional<double>> per_class_aps);

// One image's worth of evaluation input.
struct EvalImage {
  std::string image_id;
  ImageSize size;
  std::vector<Detection> predictions;
  std::vector<GroundTruthInstance> ground_truth;
};

// Ranked predictions of one class pooled across images.
struct ClassTally {
  struct Entry {
    double confidence = 0.0;
    bool true_positive = false;
    std::string image_id;
    std::size_t index = 0;
  };
  std::vector<Entry> entries;
  std::size_t ground_truth_count = 0;

  // TP flags sorted by descending confidence; ties by (image_id, index) so the
  // result does not depend on merge order.
  std::vector<bool> ranked_outcomes() const;
};

class EvaluationTally {
 public:
  void add(const MatchResult& result, std::span<const Detection> predictions,
           std::span<const GroundTruthInstance> ground_truth,
           const std::string& image_id);
  // Associative and commutative.
  void merge(const EvaluationTally& other);

  const std::map<int, ClassTally>& classes() const noexcept { return classes_; }
  std::optional<double> average_precision(int class_id) const;

 private:
  std::map<int, ClassTally> classes_;
};

// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

struct ThresholdSweep {
  std::vector<double> thresholds;
  std::vector<double> map;  // mAP at each threshold
  std::map<int, std::vector<std::optional<double>>> class_ap;
  double mean = 0.0;        // mean of `map`
  std::vector<EvaluationTally> tallies;  // pooled matches per threshold
};

// Predictions below `min_confidence` are ignored. Thresholds must be strictly
// increasing and lie in (0, 1).
ThresholdSweep map_over_thresholds(std::span<const EvalImage> images,
                                   std::span<const double> thresholds,
                                   IouKind kind = IouKind::box,
                                   double min_confidence = 0.0);

inline constexpr int kBackground = -1;

// Counts indexed (true class, predicted class); kBackground stands for
// unmatched ground truth (column) or unmatched predictions (row).
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  ConfusionMatrix(double confidence_threshold, double iou_threshold)
      : confidence_threshold_(confidence_threshold), iou_threshold_(iou_threshold) {}

  void add(int true_class, int predicted_class, std::size_t n = 1);
  void add_class(int class_id) { class_ids_.insert(class_id); }
  void merge(const ConfusionMatrix& other);

  std::size_t at(int true_class, int predicted_class) const;
  // Ground-truth instances of the class (row sum including background).
  std::size_t row_total(int true_class) const;
  // diagonal / row total; nullopt for a class with no ground truth.
  std::optional<double> recall(int class_id) const;

  // Sorted, excluding background.
  std::vector<int> class_ids() const { return {class_ids_.begin(), class_ids_.end()}; }
  double confidence_threshold() const noexcept { return confidence_threshold_; }
  double iou_threshold() const noexcept { return iou_threshold_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  double confidence_threshold_ = 0.25;
  double iou_threshold_ = 0.5;
  std::set<int> class_ids_;
  std::map<std::pair<int, int>, std::size_t> counts_;
};

// Predictions below confidence_threshold are dropped; the remainder, in
// descending confidence, claim the unmatched ground truth of any class with
// highest IoU >= iou_threshold (same-class preferred on IoU ties).
ConfusionMatrix confusion_matrix(std::span<const Detection> predictions,
                                 std::span<const GroundTruthInstance> ground_truth,
                                 double confidence_threshold, double iou_threshold,
                                 IouKind kind = IouKind::box, ImageSize size = {});

struct EvalOptions {
  double iou_threshold = 0.5;          // P/R/F1 and the confusion matrix
  double confidence_threshold = 0.25;  // P/R/F1 and the confusion matrix
  double ranking_confidence = 0.001;   // AP ranking floor
  IouKind iou_kind = IouKind::box;
  ClassMap classes;                    // names; empty means "class_<id>"
};

struct ClassReport {
  int class_id = 0;
  std::string name;
  std::size_t ground_truth = 0;
  std::size_t predictions = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> ap50;
  std::optional<double> ap50_95;
};

struct EvalReport {
  std::vector<ClassReport> classes;
  // Macro averages over `classes`.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> map50;
  std::optional<double> map50_95;
  EvalOptions options;
  ConfusionMatrix confusion;
  // Precision envelope per class at IoU 0.5.
  std::map<int, std::array<double, kRecallPoints>> envelopes;
};

// Reports every class that has ground truth or predictions in `images`.
EvalReport evaluate(std::span<const EvalImage> images, const EvalOptions& options);

}  // namespace liftaxle
