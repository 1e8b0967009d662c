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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "liftaxle/annotations.hpp"
#include "liftaxle/cascade.hpp"
#include "liftaxle/cli.hpp"
#include "liftaxle/error.hpp"
#include "liftaxle/metrics.hpp"
#include "liftaxle/synthetic.hpp"
#include "oracle/fixtures.hpp"
#include "oracle/oracles.hpp"

namespace {

using namespace liftaxle;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

bool near(double a, double b, double tol = 1e-4) { return std::fabs(a - b) <= tol; }

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

ConfusionMatrix pooled_confusion(const std::vector<EvalImage>& images) {
  ConfusionMatrix cm(0.25, 0.5);
  for (const auto& img : images) {
    cm.merge(confusion_matrix(img.predictions, img.ground_truth, 0.25, 0.5));
  }
  return cm;
}

Outcome confusion_reproduction() {
  Outcome o;
  const ConfusionMatrix d1 = pooled_confusion(fixture::truck_axle_outcomes());
  const ConfusionMatrix d2 = pooled_confusion(fixture::lifted_axle_outcomes());
  o.require(d1.at(0, 0) == 164 && d1.at(0, 1) == 0 && d1.at(0, kBackground) == 3 &&
                d1.row_total(0) == 167,
            "truck row");
  o.require(d1.at(1, 1) == 618 && d1.at(1, 0) == 0 && d1.at(1, kBackground) == 5 &&
                d1.row_total(1) == 623,
            "axle row");
  o.require(d2.at(0, 0) == 22 && d2.at(0, kBackground) == 2 && d2.row_total(0) == 24,
            "lifted row");
  const double r_truck = *d1.recall(0), r_axle = *d1.recall(1), r_lifted = *d2.recall(0);
  o.require(near(r_truck, 0.9820) && near(r_axle, 0.9920) && near(r_lifted, 0.9167), "recalls");
  o.require(r_truck == compute_prf(164, 0, 3).recall, "row recall vs compute_prf");
  o.detail = o.pass ? "recalls " + fmt(r_truck) + " / " + fmt(r_axle) + " / " + fmt(r_lifted)
                    : o.detail;
  return o;
}

Outcome f1_closure() {
  Outcome o;
  const double t3 = f1_score(0.9904, 0.9854), t4 = f1_score(0.8702, 0.8750);
  o.require(near(t3, 0.9879), "two-class F1 " + fmt(t3, 6));
  o.require(near(t4, 0.8726), "lifted-axle F1 " + fmt(t4, 6));
  if (o.pass) o.detail = "F1 " + fmt(t3) + " and " + fmt(t4);
  return o;
}

struct MicroScene {
  std::vector<Detection> preds;
  std::vector<GroundTruthInstance> truth;
};

MicroScene random_micro(std::mt19937_64& rng, int max_preds, int max_gt, int classes) {
  std::uniform_real_distribution<double> pos(0.0, 60.0), ext(4.0, 30.0), jitter(-4.0, 4.0),
      conf(0.0, 1.0);
  std::uniform_int_distribution<int> np(0, max_preds), ng(0, max_gt), cls(0, classes - 1),
      coin(0, 2);
  MicroScene s;
  for (int i = 0, n = ng(rng); i < n; ++i) {
    const double x = pos(rng), y = pos(rng);
    s.truth.push_back({cls(rng), BoundingBox{x, y, x + ext(rng), y + ext(rng)}, "m"});
  }
  for (int i = 0, n = np(rng); i < n; ++i) {
    Detection d;
    d.image_id = "m";
    d.confidence = std::round(conf(rng) * 10) / 10;
    if (!s.truth.empty() && coin(rng) != 0) {
      const auto& g =
          s.truth[std::uniform_int_distribution<std::size_t>(0, s.truth.size() - 1)(rng)];
      const BoundingBox b = g.box();
      const double x0 = b.x_min + jitter(rng), y0 = b.y_min + jitter(rng);
      d.class_id = g.class_id;
      d.box = {x0, y0, std::max(x0 + 1, b.x_max + jitter(rng)),
               std::max(y0 + 1, b.y_max + jitter(rng))};
    } else {
      const double x = pos(rng), y = pos(rng);
      d.class_id = cls(rng);
      d.box = {x, y, x + ext(rng), y + ext(rng)};
    }
    s.preds.push_back(d);
  }
  return s;
}

Outcome ap_oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20260101);
  std::size_t checked = 0;
  for (int trial = 0; trial < 20000 && o.pass; ++trial) {
    const MicroScene s = random_micro(rng, 6, 4, 1);
    if (s.truth.empty()) continue;
    const MatchResult m = match_predictions(s.preds, s.truth, 0.5);
    EvaluationTally tally;
    tally.add(m, s.preds, s.truth, "m");
    const auto& ct = tally.classes().at(0);
    const std::vector<bool> ranked = ct.ranked_outcomes();
    const double fast = *tally.average_precision(0);
    const double slow = oracle::brute_force_ap(ranked, ct.ground_truth_count);
    o.require(fast == slow, "instance " + std::to_string(trial) + ": " + fmt(fast, 17) +
                                " != " + fmt(slow, 17));
    ++checked;
  }
  o.require(checked >= 1000, "too few instances");
  if (o.pass) o.detail = std::to_string(checked) + " instances bit-identical";
  return o;
}

Outcome matching_conservation() {
  Outcome o;
  std::mt19937_64 rng(4242);
  const int scenes = 10000;
  for (int trial = 0; trial < scenes && o.pass; ++trial) {
    const MicroScene s = random_micro(rng, 12, 8, 2);
    for (double thr : {0.5, 0.75, 0.95}) {
      const MatchResult m = match_predictions(s.preds, s.truth, thr);
      for (int c : {0, 1}) {
        std::size_t g = 0, p = 0;
        for (const auto& t : s.truth) g += t.class_id == c;
        for (const auto& d : s.preds) p += d.class_id == c;
        const ClassMatches& cm = m.at(c);
        o.require(cm.tp() + cm.fn() == g && cm.tp() + cm.fp() == p,
                  "scene " + std::to_string(trial) + " threshold " + fmt(thr, 2));
      }
    }
  }
  if (o.pass) o.detail = std::to_string(scenes) + " scenes x 3 thresholds";
  return o;
}

std::vector<SyntheticScene> closure_scenes(double perturbation, int count, std::uint64_t seed) {
  std::vector<SyntheticScene> out;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    SyntheticSceneSpec spec;
    spec.image_id = "scene_" + std::to_string(i);
    spec.seed = rng();
    spec.trucks = random_trucks(spec.seed, 5);
    spec.perturbation = perturbation;
    spec.direction = i % 2 ? TravelDirection::front_left : TravelDirection::front_right;
    out.push_back(generate_synthetic_scene(spec));
  }
  return out;
}

void split_stages(const SyntheticScene& s, std::vector<Detection>& trucks,
                  std::vector<Detection>& axles) {
  for (const auto& d : s.detections) (d.class_id == 0 ? trucks : axles).push_back(d);
}

Outcome synthetic_closure() {
  Outcome o;
  const auto scenes = closure_scenes(0.0, 300, 99);
  std::vector<EvalImage> lifted_images;
  std::size_t trucks_seen = 0, lifted_seen = 0;
  for (const auto& s : scenes) {
    const std::vector<EvalImage> one{{s.image_id, s.size, s.detections, s.detection_truth}};
    const EvalReport r = evaluate(one, {});
    const bool perfect = r.precision == 1.0 && r.recall == 1.0 && r.f1 == 1.0 &&
                         r.map50 == 1.0 && r.map50_95 == 1.0;
    o.require(perfect, s.image_id + " detection metrics below 1");
    lifted_images.push_back({s.image_id, s.size, s.lifted_detections, s.lifted_truth});

    std::vector<Detection> trucks, axles;
    split_stages(s, trucks, axles);
    CascadeConfig cfg;
    cfg.direction = s.image_id.back() % 2 ? TravelDirection::front_left
                                          : TravelDirection::front_right;
    const CascadeResult c = run_cascade(trucks, axles, s.lifted_detections, cfg);
    o.require(c.trucks.size() == s.trucks.size() && c.orphan_axles.empty() &&
                  c.unassociated_lifted == 0,
              s.image_id + " truck count");
    for (std::size_t t = 0; t < c.trucks.size() && t < s.trucks.size(); ++t) {
      const std::vector<int> expected(s.trucks[t].lifted_ordinals.begin(),
                                      s.trucks[t].lifted_ordinals.end());
      o.require(c.trucks[t].axle_count() == static_cast<std::size_t>(s.trucks[t].axle_count) &&
                    c.trucks[t].lifted_ordinals() == expected,
                s.image_id + " truck " + std::to_string(t));
      ++trucks_seen;
      lifted_seen += expected.size();
    }
  }
  EvalOptions mask;
  mask.iou_kind = IouKind::mask;
  const EvalReport lr = evaluate(lifted_images, mask);
  o.require(lr.precision == 1.0 && lr.recall == 1.0 && lr.f1 == 1.0 && lr.map50 == 1.0 &&
                lr.map50_95 == 1.0,
            "lifted mask metrics below 1");
  if (o.pass) {
    o.detail = std::to_string(scenes.size()) + " scenes, " + std::to_string(trucks_seen) +
               " trucks, " + std::to_string(lifted_seen) + " lifted axles";
  }
  return o;
}

Outcome mirror_symmetry() {
  Outcome o;
  std::mt19937_64 rng(606);
  for (int i = 0; i < 100 && o.pass; ++i) {
    SyntheticSceneSpec spec;
    spec.seed = rng();
    spec.trucks = random_trucks(spec.seed, 5);
    spec.perturbation = 3.0;
    spec.false_positives = 2;
    const SyntheticScene s = generate_synthetic_scene(spec);
    std::vector<Detection> trucks, axles;
    split_stages(s, trucks, axles);
    std::vector<Detection> masks = s.lifted_detections;
    const double w = s.size.width;
    auto reflect = [w](std::vector<Detection> v) {
      for (auto& d : v) d.box = {w - d.box.x_max, d.box.y_min, w - d.box.x_min, d.box.y_max};
      return v;
    };
    CascadeConfig cfg;
    const CascadeResult a = run_cascade(trucks, axles, masks, cfg);
    cfg.direction = flipped(cfg.direction);
    const CascadeResult b = run_cascade(reflect(trucks), reflect(axles), reflect(masks), cfg);
    o.require(a.trucks.size() == b.trucks.size(), "scene " + std::to_string(i) + " truck count");
    for (const TruckRecord& x : a.trucks) {
      const BoundingBox target{w - x.truck_box.x_max, x.truck_box.y_min, w - x.truck_box.x_min,
                               x.truck_box.y_max};
      const TruckRecord* y = nullptr;
      for (const TruckRecord& cand : b.trucks) {
        if (cand.truck_box == target) y = &cand;
      }
      o.require(y != nullptr, "scene " + std::to_string(i) + " unmatched truck");
      if (y == nullptr) break;
      o.require(x.axle_count() == y->axle_count(), "scene " + std::to_string(i) + " axles");
      for (std::size_t k = 0; k < x.axles.size() && k < y->axles.size(); ++k) {
        o.require(x.axles[k].ordinal == y->axles[k].ordinal &&
                      x.axles[k].lifted == y->axles[k].lifted,
                  "scene " + std::to_string(i) + " ordinal " + std::to_string(k + 1));
      }
    }
  }
  if (o.pass) o.detail = "100 scenes";
  return o;
}

Outcome label_round_trip() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dims(16, 4096), count(1, 10), verts(3, 10);
  std::size_t instances = 0;
  for (int trial = 0; trial < 500 && o.pass; ++trial) {
    const ImageSize size{dims(rng), dims(rng)};
    const bool poly = trial % 2 == 1;
    std::vector<GroundTruthInstance> seed;
    for (int i = 0, n = count(rng); i < n; ++i) {
      if (poly) {
        std::vector<Point> v;
        for (int k = 0, m = verts(rng); k < m; ++k) {
          v.push_back({u(rng) * size.width, u(rng) * size.height});
        }
        seed.push_back({i % 2, PolygonMask(std::move(v)), "x"});
      } else {
        double x0 = u(rng), x1 = u(rng), y0 = u(rng), y1 = u(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        seed.push_back({i % 2,
                        BoundingBox{x0 * size.width, y0 * size.height, x1 * size.width,
                                    y1 * size.height},
                        "x"});
      }
    }
    const LabelKind kind = poly ? LabelKind::segmentation : LabelKind::detection;
    const auto once = parse_labels(write_labels(seed, size), size, kind);
    const auto twice = parse_labels(write_labels(once, size), size, kind);
    o.require(once.size() == seed.size() && twice.size() == seed.size(), "instance count");
    for (std::size_t i = 0; i < once.size() && i < twice.size(); ++i) {
      std::vector<double> a, b;
      for (const auto* g : {&once[i], &twice[i]}) {
        auto& dst = g == &once[i] ? a : b;
        if (const auto* m = g->mask()) {
          for (const Point& p : m->vertices()) {
            dst.push_back(p.x / size.width);
            dst.push_back(p.y / size.height);
          }
        } else {
          const BoundingBox bb = g->box();
          dst = {bb.x_min / size.width, bb.y_min / size.height, bb.x_max / size.width,
                 bb.y_max / size.height};
        }
      }
      o.require(a.size() == b.size() && once[i].class_id == twice[i].class_id, "shape");
      for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
        o.require(std::fabs(a[k] - b[k]) <= 1e-6, "coordinate drift");
      }
      ++instances;
    }
  }

  struct Bad {
    const char* text;
    LabelKind kind;
    std::size_t line;
  };
  const Bad bad[] = {
      {"0 0.5 0.5 0.2", LabelKind::detection, 1},
      {"0 0.5 0.5 0.2 0.1\n0 0.5 0.5 0.2 x", LabelKind::detection, 2},
      {"0 0.5 0.5 0.2 0.1\n\n0 1.2 0.5 0.2 0.1", LabelKind::detection, 3},
      {"-1 0.5 0.5 0.2 0.1", LabelKind::detection, 1},
      {"0 0.99 0.5 0.2 0.1", LabelKind::detection, 1},
      {"0 0.1 0.1 0.2 0.2 0.3", LabelKind::segmentation, 1},
      {"0 0.1 0.1 0.2 0.2", LabelKind::segmentation, 1},
      {"0 0.1 0.1 0.2 0.2 0.3 0.3\n0 0.1 0.1 0.2 nan 0.3 0.3", LabelKind::segmentation, 2},
  };
  for (const Bad& b : bad) {
    try {
      parse_labels(b.text, {640, 640}, b.kind);
      o.require(false, std::string("accepted malformed: ") + b.text);
    } catch (const LabelParseError& e) {
      o.require(e.line() == b.line, std::string("wrong line for: ") + b.text);
    }
  }
  if (o.pass) {
    o.detail = std::to_string(instances) + " instances lossless, " +
               std::to_string(std::size(bad)) + " malformed fixtures rejected";
  }
  return o;
}

std::vector<std::string> config_lines(const std::string& kind) {
  std::ostringstream out, err;
  if (run_cli({"dataset", "gen-config", "--kind", kind, "--no-manifest"}, out, err) != 0) return {};
  std::vector<std::string> lines;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Outcome config_emission() {
  Outcome o;
  const std::vector<std::string> common{"epochs: 400", "optimizer: AdamW", "lr0: 0.01",
                                        "scale: 0.5", "fliplr: 0.5"};
  auto expect = [&](const std::string& kind, std::vector<std::string> extra) {
    std::vector<std::string> want = common;
    want.insert(want.end(), extra.begin(), extra.end());
    std::vector<std::string> got = config_lines(kind);
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    o.require(got == want, kind + " config mismatch");
  };
  expect("detection", {"batch: 3", "shear: 0.5"});
  expect("segmentation", {"batch: 32"});
  if (o.pass) o.detail = "detection and segmentation keys exact";
  return o;
}

Outcome throughput() {
  Outcome o;
  std::vector<EvalImage> images;
  std::size_t detections = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    SyntheticSceneSpec spec;
    spec.image_id = "bulk_" + std::to_string(i);
    spec.seed = i;
    spec.trucks.assign(5, SyntheticTruckSpec{9, {}});
    spec.perturbation = 3.0;
    spec.false_positives = 50;
    spec.truck_confidence = {0.2, 1.0};
    spec.axle_confidence = {0.2, 1.0};
    const SyntheticScene s = generate_synthetic_scene(spec);
    detections += s.detections.size();
    images.push_back({s.image_id, s.size, s.detections, s.detection_truth});
  }
  const auto start = std::chrono::steady_clock::now();
  const EvalReport r = evaluate(images, {});
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(detections >= 100000, "only " + std::to_string(detections) + " detections");
  o.require(r.map50_95.has_value(), "no mAP50-95");
  o.require(seconds < 5.0, "evaluation took " + fmt(seconds, 3) + " s");
  if (o.pass) {
    o.detail = std::to_string(detections) + " detections / 1000 images in " + fmt(seconds, 3) +
               " s, mAP50-95 " + fmt(*r.map50_95);
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "confusion-matrix reproduction", 1.0, confusion_reproduction},
      {2, "F1 closure", 0.0, f1_closure},
      {3, "AP oracle equivalence", 10.0, ap_oracle_equivalence},
      {4, "matching conservation", 0.0, matching_conservation},
      {5, "synthetic closure", 0.0, synthetic_closure},
      {6, "direction mirror symmetry", 0.0, mirror_symmetry},
      {7, "label round-trip", 0.0, label_round_trip},
      {8, "training config emission", 0.0, config_emission},
      {9, "evaluation throughput", 0.0, throughput},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && c.budget_seconds > 0 && seconds >= c.budget_seconds) {
      o.pass = false;
      o.detail = "over budget of " + fmt(c.budget_seconds, 1) + " s";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), seconds);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
