// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// COCO-style average precision over quadrilateral detections.
//
// Single category. Detections are capped per image, matched greedily by
// descending score against the not-yet-matched ground truth of highest
// IoU, pooled over all images by score, and summarised with 101-point
// interpolated precision. Detections falling on ignore gts or ignore
// regions are dropped from the ranking instead of counting as false
// positives.

#ifndef UNITAIL_DETECTION_EVAL_HPP_
#define UNITAIL_DETECTION_EVAL_HPP_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unitail/geometry.hpp"

namespace unitail::deteval {

using geometry::Polygon;
using geometry::QuadBox;

struct GroundTruthRecord {
  std::string image_id;
  QuadBox quad;
  bool ignore = false;
};

struct DetectionRecord {
  std::string image_id;
  QuadBox quad;
  double score = 0.0;
};

struct IgnoreRegion {
  std::string image_id;
  Polygon polygon;
};

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

struct EvalParams {
  // Empty means the COCO sweep 0.50:0.05:0.95.
  std::vector<double> iou_thresholds;
  std::size_t max_detections = 400;
  // Intersection-over-detection-area needed to drop a detection on an
  // ignore region.
  double ignore_overlap = 0.5;
  unsigned threads = 1;
};

struct EvalResult {
  double map = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ar = 0.0;  // mean over thresholds of recall at max_detections
  std::vector<std::pair<double, double>> per_threshold_ap;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
};

// numpy.linspace(0.5, 0.95, 10).
std::vector<double> coco_iou_thresholds();

// Greedy suppression within each image: a detection is dropped when its IoU
// with an already kept detection of the same image exceeds iou_thresh.
// Output is sorted by descending score, ties in input order.
std::vector<DetectionRecord> quad_nms(std::span<const DetectionRecord> dets, double iou_thresh);

// Labels aligned with `dets` (input order). All records must share one
// image id; throws InputError otherwise.
std::vector<MatchLabel> match_image(std::span<const DetectionRecord> dets,
                                    std::span<const GroundTruthRecord> gts,
                                    std::span<const IgnoreRegion> ignore_regions,
                                    double iou_thresh, double ignore_overlap = 0.5);

// 101-point interpolated AP over score-ordered labels; kIgnored entries are
// skipped. Returns nullopt when num_gt == 0 and no false positive exists.
std::optional<double> average_precision(std::span<const MatchLabel> labels, std::size_t num_gt);

EvalResult evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruthRecord> gts,
                    std::span<const IgnoreRegion> ignore_regions = {},
                    const EvalParams& params = {});

// Geometric mean of origin- and cross-domain mAP. Throws ParameterError on
// negative inputs.
double g_map(double map_origin, double map_cross);

}  // namespace unitail::deteval

#endif  // UNITAIL_DETECTION_EVAL_HPP_
