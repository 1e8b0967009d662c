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
#include <random>

#include <gtest/gtest.h>

#include "liftaxle/error.hpp"
#include "oracle/fixtures.hpp"
#include "oracle/oracles.hpp"

namespace liftaxle {
namespace {

Detection det(int cls, BoundingBox b, double conf) { return {cls, b, {}, conf, "img"}; }
GroundTruthInstance gt(int cls, BoundingBox b) { return {cls, b, "img"}; }

TEST(MatchPredictions, IdentityIsAllTruePositive) {
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10}), gt(1, {20, 20, 40, 40}),
                                               gt(1, {50, 0, 60, 30})};
  std::vector<Detection> preds;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    preds.push_back(det(truth[i].class_id, truth[i].box(), 0.1 + 0.2 * static_cast<double>(i)));
  }
  const MatchResult r = match_predictions(preds, truth, 0.5);
  EXPECT_EQ(r.at(0).tp(), 1u);
  EXPECT_EQ(r.at(1).tp(), 2u);
  for (int c : {0, 1}) {
    EXPECT_EQ(r.at(c).fp(), 0u);
    EXPECT_EQ(r.at(c).fn(), 0u);
  }
}

TEST(MatchPredictions, HigherConfidenceClaimsFirst) {
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(0, {0, 0, 10, 9}, 0.8), det(0, {0, 0, 10, 10}, 0.9)};
  const MatchResult r = match_predictions(preds, truth, 0.5);
  ASSERT_EQ(r.at(0).tp(), 1u);
  EXPECT_EQ(r.at(0).true_positives[0].prediction, 1u);
  ASSERT_EQ(r.at(0).fp(), 1u);
  EXPECT_EQ(r.at(0).false_positives[0], 0u);
}

TEST(MatchPredictions, BelowThresholdIsFalsePositiveAndNegative) {
  // IoU = 40 / 100 = 0.4.
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(0, {0, 0, 4, 10}, 0.9)};
  const MatchResult r = match_predictions(preds, truth, 0.5);
  EXPECT_EQ(r.at(0).tp(), 0u);
  EXPECT_EQ(r.at(0).fp(), 1u);
  EXPECT_EQ(r.at(0).fn(), 1u);
  EXPECT_EQ(match_predictions(preds, truth, 0.4).at(0).tp(), 1u);
}

TEST(MatchPredictions, ClassesNeverCrossMatch) {
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(1, {0, 0, 10, 10}, 0.9)};
  const MatchResult r = match_predictions(preds, truth, 0.5);
  EXPECT_EQ(r.at(0).fn(), 1u);
  EXPECT_EQ(r.at(1).fp(), 1u);
}

TEST(MatchPredictions, MaskKindRequiresMasks) {
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(0, {0, 0, 10, 10}, 0.9)};
  EXPECT_THROW(match_predictions(preds, truth, 0.5, IouKind::mask, {20, 20}), Error);

  const PolygonMask square({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  const std::vector<GroundTruthInstance> mtruth{{0, square, "img"}};
  Detection p = det(0, {0, 0, 10, 10}, 0.9);
  p.mask = square;
  const std::vector<Detection> mpreds{p};
  EXPECT_EQ(match_predictions(mpreds, mtruth, 0.5, IouKind::mask, {20, 20}).at(0).tp(), 1u);
  EXPECT_EQ(match_predictions(mpreds, mtruth, 0.5, IouKind::mask).at(0).tp(), 1u);
}

struct RandomScene {
  std::vector<Detection> preds;
  std::vector<GroundTruthInstance> truth;
};

RandomScene random_scene(std::mt19937_64& rng, int max_preds, int max_gt) {
  std::uniform_real_distribution<double> pos(0.0, 80.0), ext(2.0, 30.0), conf(0.0, 1.0);
  std::uniform_int_distribution<int> np(0, max_preds), ng(0, max_gt), cls(0, 1), coin(0, 3);
  RandomScene s;
  for (int i = 0, n = ng(rng); i < n; ++i) {
    const double x = pos(rng), y = pos(rng);
    s.truth.push_back(gt(cls(rng), {x, y, x + ext(rng), y + ext(rng)}));
  }
  for (int i = 0, n = np(rng); i < n; ++i) {
    if (!s.truth.empty() && coin(rng) != 0) {
      // Jittered copy of a ground truth, so matches actually occur.
      const auto& g = s.truth[std::uniform_int_distribution<std::size_t>(0, s.truth.size() - 1)(rng)];
      const BoundingBox b = g.box();
      std::uniform_real_distribution<double> j(-3.0, 3.0);
      const double x0 = b.x_min + j(rng), y0 = b.y_min + j(rng);
      s.preds.push_back(det(coin(rng) == 0 ? 1 - g.class_id : g.class_id,
                            {x0, y0, std::max(x0 + 1, b.x_max + j(rng)),
                             std::max(y0 + 1, b.y_max + j(rng))},
                            std::round(conf(rng) * 20) / 20));  // plenty of ties
    } else {
      const double x = pos(rng), y = pos(rng);
      s.preds.push_back(det(cls(rng), {x, y, x + ext(rng), y + ext(rng)}, conf(rng)));
    }
  }
  return s;
}

std::size_t count_class(const auto& items, int cls) {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [&](const auto& x) { return x.class_id == cls; }));
}

TEST(MatchPredictionsProperty, ConservationAndMonotonicity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const RandomScene s = random_scene(rng, 8, 6);
    std::size_t previous_tp[2] = {SIZE_MAX, SIZE_MAX};
    for (double thr : {0.1, 0.3, 0.5, 0.75, 0.95}) {
      const MatchResult r = match_predictions(s.preds, s.truth, thr);
      for (int c : {0, 1}) {
        const ClassMatches& m = r.at(c);
        ASSERT_EQ(m.tp() + m.fn(), count_class(s.truth, c));
        ASSERT_EQ(m.tp() + m.fp(), count_class(s.preds, c));
        ASSERT_LE(m.tp(), previous_tp[c]);
        previous_tp[c] = m.tp();
        for (const TruePositive& tp : m.true_positives) {
          ASSERT_GE(tp.iou, thr);
          ASSERT_EQ(s.preds[tp.prediction].class_id, c);
          ASSERT_EQ(s.truth[tp.ground_truth].class_id, c);
        }
      }
    }
  }
}

TEST(ComputePrf, ReportedRecalls) {
  EXPECT_NEAR(compute_prf(164, 0, 3).recall, 0.9820, 1e-4);
  EXPECT_NEAR(compute_prf(618, 0, 5).recall, 0.9920, 1e-4);
  EXPECT_NEAR(compute_prf(22, 0, 2).recall, 0.9167, 1e-4);
}

TEST(ComputePrf, F1FromTableValues) {
  EXPECT_NEAR(f1_score(0.9904, 0.9854), 0.9879, 1e-4);
  EXPECT_NEAR(f1_score(0.8702, 0.8750), 0.8726, 1e-4);
}

TEST(ComputePrf, EmptyDenominators) {
  const PrecisionRecall vacuous = compute_prf(0, 0, 0);
  EXPECT_EQ(vacuous.precision, 1.0);
  EXPECT_EQ(vacuous.recall, 1.0);
  EXPECT_EQ(vacuous.f1, 1.0);
  const PrecisionRecall phantom = compute_prf(0, 4, 0);
  EXPECT_EQ(phantom.precision, 0.0);
  EXPECT_EQ(phantom.f1, 0.0);
  const PrecisionRecall missed = compute_prf(0, 0, 4);
  EXPECT_EQ(missed.recall, 0.0);
  EXPECT_EQ(missed.f1, 0.0);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(ComputePrf, F1Bounds) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> n(0, 50);
  for (int i = 0; i < 5000; ++i) {
    const PrecisionRecall p = compute_prf(n(rng), n(rng), n(rng));
    ASSERT_GE(p.f1, 0.0);
    ASSERT_LE(p.f1, 1.0);
    if (p.precision > 0 && p.recall > 0) {
      ASSERT_GE(p.f1, std::min(p.precision, p.recall) - 1e-12);
      ASSERT_LE(p.f1, std::max(p.precision, p.recall) + 1e-12);
    }
  }
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision({true, true, true}, 3), 1.0);
  EXPECT_EQ(average_precision({false, false}, 3), 0.0);
  EXPECT_EQ(average_precision({}, 3), 0.0);
  EXPECT_NEAR(*average_precision({true, false, true}, 2), (51.0 + 50.0 * 2.0 / 3.0) / 101.0,
              1e-12);
  EXPECT_FALSE(average_precision({true, false}, 0).has_value());
  EXPECT_FALSE(average_precision({}, 0).has_value());
}

TEST(AveragePrecision, EnvelopeIsNonIncreasing) {
  const auto env = precision_envelope({true, false, true, false, false, true}, 4);
  EXPECT_EQ(env[0], 1.0);
  for (std::size_t r = 1; r < env.size(); ++r) EXPECT_LE(env[r], env[r - 1]);
  EXPECT_EQ(env[100], 0.0);  // recall 3/4 never reaches 1
}

TEST(AveragePrecision, MatchesBruteForceOracle) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> np(0, 6), ng(1, 4), coin(0, 1);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t g = static_cast<std::size_t>(ng(rng));
    std::vector<bool> ranked;
    std::size_t tps = 0;
    for (int i = 0, n = np(rng); i < n; ++i) {
      const bool tp = tps < g && coin(rng) == 1;
      tps += tp ? 1 : 0;
      ranked.push_back(tp);
    }
    ASSERT_EQ(*average_precision(ranked, g), oracle::brute_force_ap(ranked, g));
  }
}

TEST(MeanAp, Examples) {
  const std::vector<std::optional<double>> two{0.9, 1.0};
  EXPECT_NEAR(mean_ap(two), 0.95, 1e-15);
  const std::vector<std::optional<double>> one{0.8232};
  EXPECT_EQ(mean_ap(one), 0.8232);
  const std::vector<std::optional<double>> repeated(7, 0.37);
  EXPECT_NEAR(mean_ap(repeated), 0.37, 1e-15);
  const std::vector<std::optional<double>> partial{std::nullopt, 0.5};
  EXPECT_EQ(mean_ap(partial), 0.5);
  const std::vector<std::optional<double>> none{std::nullopt};
  EXPECT_THROW(mean_ap(none), Error);
  EXPECT_THROW(mean_ap({}), Error);
}

EvalImage image_of(std::vector<Detection> preds, std::vector<GroundTruthInstance> truth,
                   std::string id = "img") {
  return {std::move(id), {200, 200}, std::move(preds), std::move(truth)};
}

TEST(MapOverThresholds, PerfectPredictions) {
  const std::vector<EvalImage> images{image_of({det(0, {0, 0, 10, 10}, 0.9)},
                                               {gt(0, {0, 0, 10, 10})})};
  const auto t = coco_iou_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t.back(), 0.95);
  const ThresholdSweep s = map_over_thresholds(images, t);
  for (double m : s.map) EXPECT_EQ(m, 1.0);
  EXPECT_EQ(s.mean, 1.0);
}

TEST(MapOverThresholds, IouExactlySevenTenths) {
  // 7x10 inside 10x10: IoU 0.7 exactly.
  const std::vector<EvalImage> images{
      image_of({det(0, {0, 0, 7, 10}, 0.9), det(0, {100, 100, 107, 110}, 0.8)},
               {gt(0, {0, 0, 10, 10}), gt(0, {100, 100, 110, 110})})};
  const ThresholdSweep s = map_over_thresholds(images, coco_iou_thresholds());
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    EXPECT_EQ(s.map[i], s.thresholds[i] <= 0.7 ? 1.0 : 0.0) << s.thresholds[i];
  }
  EXPECT_DOUBLE_EQ(s.mean, 0.5);
}

TEST(MapOverThresholds, NoPredictions) {
  const std::vector<EvalImage> images{image_of({}, {gt(0, {0, 0, 10, 10})})};
  const ThresholdSweep s = map_over_thresholds(images, coco_iou_thresholds());
  for (double m : s.map) EXPECT_EQ(m, 0.0);
  EXPECT_EQ(s.mean, 0.0);
}

TEST(MapOverThresholds, NoGroundTruthIsUndefined) {
  const std::vector<EvalImage> images{image_of({det(0, {0, 0, 10, 10}, 0.9)}, {})};
  EXPECT_THROW(map_over_thresholds(images, coco_iou_thresholds()), Error);
  const EvalReport r = evaluate(images, {});
  EXPECT_FALSE(r.map50.has_value());
  ASSERT_EQ(r.classes.size(), 1u);
  EXPECT_EQ(r.classes[0].precision, 0.0);
  EXPECT_FALSE(r.classes[0].ap50.has_value());
}

TEST(MapOverThresholds, RejectsBadThresholds) {
  const std::vector<EvalImage> images{image_of({}, {gt(0, {0, 0, 10, 10})})};
  const std::vector<double> unordered{0.6, 0.5};
  EXPECT_THROW(map_over_thresholds(images, unordered), ConfigError);
  const std::vector<double> out_of_range{0.5, 1.0};
  EXPECT_THROW(map_over_thresholds(images, out_of_range), ConfigError);
}

TEST(MapOverThresholds, MinConfidenceDropsRanking) {
  const std::vector<EvalImage> images{image_of(
      {det(0, {50, 50, 60, 60}, 0.9), det(0, {0, 0, 10, 10}, 0.0005)}, {gt(0, {0, 0, 10, 10})})};
  const std::vector<double> t{0.5};
  EXPECT_LT(map_over_thresholds(images, t, IouKind::box, 0.0).map[0], 1.0);
  EXPECT_EQ(map_over_thresholds(images, t, IouKind::box, 0.001).map[0], 0.0);
}

TEST(EvaluationTally, MergeIsOrderIndependent) {
  std::mt19937_64 rng(21);
  std::vector<EvalImage> images;
  for (int i = 0; i < 12; ++i) {
    RandomScene s = random_scene(rng, 8, 6);
    images.push_back(image_of(s.preds, s.truth, "img_" + std::to_string(i)));
  }
  auto tally_of = [](const EvalImage& img) {
    EvaluationTally t;
    t.add(match_predictions(img.predictions, img.ground_truth, 0.5), img.predictions,
          img.ground_truth, img.image_id);
    return t;
  };
  EvaluationTally forward, backward, tree;
  for (const auto& img : images) forward.merge(tally_of(img));
  for (auto it = images.rbegin(); it != images.rend(); ++it) backward.merge(tally_of(*it));
  EvaluationTally left, right;
  for (std::size_t i = 0; i < images.size(); ++i) (i % 2 ? left : right).merge(tally_of(images[i]));
  tree.merge(right);
  tree.merge(left);
  for (int c : {0, 1}) {
    EXPECT_EQ(forward.average_precision(c), backward.average_precision(c));
    EXPECT_EQ(forward.average_precision(c), tree.average_precision(c));
    EXPECT_EQ(forward.classes().at(c).ranked_outcomes(), tree.classes().at(c).ranked_outcomes());
  }
}

TEST(ConfusionMatrix, TruckAxleOutcomes) {
  ConfusionMatrix cm(0.25, 0.5);
  for (const EvalImage& img : fixture::truck_axle_outcomes()) {
    cm.merge(confusion_matrix(img.predictions, img.ground_truth, 0.25, 0.5));
  }
  EXPECT_EQ(cm.at(0, 0), 164u);
  EXPECT_EQ(cm.at(0, 1), 0u);
  EXPECT_EQ(cm.at(0, kBackground), 3u);
  EXPECT_EQ(cm.at(1, 0), 0u);
  EXPECT_EQ(cm.at(1, 1), 618u);
  EXPECT_EQ(cm.at(1, kBackground), 5u);
  EXPECT_EQ(cm.row_total(0), 167u);
  EXPECT_EQ(cm.row_total(1), 623u);
  EXPECT_NEAR(*cm.recall(0), 0.9820, 1e-4);
  EXPECT_NEAR(*cm.recall(1), 0.9920, 1e-4);
  EXPECT_EQ(*cm.recall(0), compute_prf(164, 0, 3).recall);
}

TEST(ConfusionMatrix, LiftedAxleOutcomes) {
  ConfusionMatrix cm(0.25, 0.5);
  for (const EvalImage& img : fixture::lifted_axle_outcomes()) {
    cm.merge(confusion_matrix(img.predictions, img.ground_truth, 0.25, 0.5));
  }
  EXPECT_EQ(cm.at(0, 0), 22u);
  EXPECT_EQ(cm.at(0, kBackground), 2u);
  EXPECT_NEAR(*cm.recall(0), 0.9167, 1e-4);
}

TEST(ConfusionMatrix, EmptyInputIsZero) {
  const ConfusionMatrix cm = confusion_matrix({}, {}, 0.25, 0.5);
  EXPECT_TRUE(cm.class_ids().empty());
  EXPECT_EQ(cm.at(0, 0), 0u);
  EXPECT_EQ(cm.at(kBackground, 0), 0u);
  EXPECT_FALSE(cm.recall(0).has_value());
}

TEST(ConfusionMatrix, CrossClassAndBackground) {
  const std::vector<GroundTruthInstance> truth{gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(1, {0, 0, 10, 10}, 0.9), det(1, {50, 50, 60, 60}, 0.9),
                                     det(0, {0, 0, 10, 10}, 0.1)};
  const ConfusionMatrix cm = confusion_matrix(preds, truth, 0.25, 0.5);
  EXPECT_EQ(cm.at(0, 1), 1u);
  EXPECT_EQ(cm.at(kBackground, 1), 1u);
  EXPECT_EQ(cm.at(0, 0), 0u);  // below the confidence threshold
}

TEST(ConfusionMatrix, SameClassWinsIouTie) {
  const std::vector<GroundTruthInstance> truth{gt(1, {0, 0, 10, 10}), gt(0, {0, 0, 10, 10})};
  const std::vector<Detection> preds{det(0, {0, 0, 10, 10}, 0.9)};
  const ConfusionMatrix cm = confusion_matrix(preds, truth, 0.25, 0.5);
  EXPECT_EQ(cm.at(0, 0), 1u);
  EXPECT_EQ(cm.at(1, kBackground), 1u);
}

TEST(ConfidenceScaling, OnlyOrderMatters) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> factor(0.05, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomScene s = random_scene(rng, 8, 6);
    RandomScene scaled = s;
    const double k = factor(rng);
    for (auto& p : scaled.preds) p.confidence *= k;

    const MatchResult a = match_predictions(s.preds, s.truth, 0.5);
    const MatchResult b = match_predictions(scaled.preds, scaled.truth, 0.5);
    for (int c : {0, 1}) {
      ASSERT_EQ(a.at(c).true_positives.size(), b.at(c).true_positives.size());
      for (std::size_t i = 0; i < a.at(c).tp(); ++i) {
        ASSERT_EQ(a.at(c).true_positives[i].prediction, b.at(c).true_positives[i].prediction);
        ASSERT_EQ(a.at(c).true_positives[i].ground_truth, b.at(c).true_positives[i].ground_truth);
      }
      ASSERT_EQ(a.at(c).false_positives, b.at(c).false_positives);
    }
    const std::vector<EvalImage> ia{image_of(s.preds, s.truth)};
    const std::vector<EvalImage> ib{image_of(scaled.preds, scaled.truth)};
    if (!s.truth.empty()) {
      ASSERT_EQ(map_over_thresholds(ia, coco_iou_thresholds()).map,
                map_over_thresholds(ib, coco_iou_thresholds()).map);
    }
    // Confusion matrix with a negligible confidence floor.
    ConfusionMatrix ca = confusion_matrix(s.preds, s.truth, 1e-12, 0.5);
    ConfusionMatrix cb = confusion_matrix(scaled.preds, scaled.truth, 1e-12, 0.5);
    ASSERT_TRUE(ca == cb);
  }
}

TEST(Evaluate, TruckAxleOutcomeReport) {
  EvalOptions opts;
  opts.classes = truck_axle_classes();
  const auto images = fixture::truck_axle_outcomes();
  const EvalReport r = evaluate(images, opts);
  ASSERT_EQ(r.classes.size(), 2u);
  EXPECT_EQ(r.classes[0].name, "truck");
  EXPECT_EQ(r.classes[0].tp, 164u);
  EXPECT_EQ(r.classes[0].fn, 3u);
  EXPECT_EQ(r.classes[0].precision, 1.0);
  EXPECT_NEAR(r.classes[0].recall, 164.0 / 167.0, 1e-12);
  EXPECT_NEAR(r.recall, (164.0 / 167.0 + 618.0 / 623.0) / 2, 1e-12);
  EXPECT_EQ(r.f1, f1_score(r.precision, r.recall));
  EXPECT_EQ(r.confusion.at(1, kBackground), 5u);
  ASSERT_TRUE(r.map50.has_value());
  EXPECT_NEAR(*r.map50, *r.map50_95, 1e-12);  // exact boxes: IoU 1 at every threshold
  EXPECT_EQ(r.envelopes.size(), 2u);
}

TEST(Evaluate, AllValuesAreRatios) {
  std::mt19937_64 rng(31);
  std::vector<EvalImage> images;
  for (int i = 0; i < 30; ++i) {
    RandomScene s = random_scene(rng, 10, 7);
    images.push_back(image_of(s.preds, s.truth, "img_" + std::to_string(i)));
  }
  const EvalReport r = evaluate(images, {});
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const ClassReport& c : r.classes) {
    EXPECT_TRUE(in_unit(c.precision) && in_unit(c.recall) && in_unit(c.f1));
    if (c.ap50) EXPECT_TRUE(in_unit(*c.ap50));
    if (c.ap50_95) EXPECT_TRUE(in_unit(*c.ap50_95));
  }
  EXPECT_TRUE(in_unit(r.precision) && in_unit(r.recall) && in_unit(r.f1));
}

}  // namespace
}  // namespace liftaxle
