// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/detection_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "unitail/error.hpp"
#include "unitail/parallel.hpp"

namespace unitail::deteval {

namespace {

// numpy.linspace semantics: start + i * step, with the last sample pinned.
std::vector<double> linspace(double start, double stop, std::size_t num) {
  std::vector<double> out(num);
  const double step = (stop - start) / static_cast<double>(num - 1);
  for (std::size_t i = 0; i < num; ++i) out[i] = static_cast<double>(i) * step + start;
  out.back() = stop;
  return out;
}

const std::vector<double>& recall_thresholds() {
  static const std::vector<double> kRecalls = linspace(0.0, 1.0, 101);
  return kRecalls;
}

// Score descending; ties by corner coordinates so that the order never
// depends on how the input was arranged.
bool canonical_before(const DetectionRecord& a, const DetectionRecord& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto fa = a.quad.flat();
  const auto fb = b.quad.flat();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end());
}

// Pairwise overlaps for one image, computed once and reused at every
// IoU threshold.
struct ImageOverlaps {
  std::vector<std::vector<double>> det_gt_iou;       // [det][gt]
  std::vector<std::vector<double>> det_region_cover;  // [det][region]
};

ImageOverlaps compute_overlaps(std::span<const DetectionRecord> dets,
                               std::span<const GroundTruthRecord> gts,
                               std::span<const IgnoreRegion> regions) {
  ImageOverlaps o;
  o.det_gt_iou.assign(dets.size(), std::vector<double>(gts.size(), 0.0));
  o.det_region_cover.assign(dets.size(), std::vector<double>(regions.size(), 0.0));
  for (std::size_t d = 0; d < dets.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      o.det_gt_iou[d][g] = geometry::quad_iou(dets[d].quad, gts[g].quad);
    }
    for (std::size_t r = 0; r < regions.size(); ++r) {
      o.det_region_cover[d][r] =
          geometry::intersection_over_quad_area(regions[r].polygon, dets[d].quad);
    }
  }
  return o;
}

// `order` lists detection indices by descending score. Labels are written
// at the detection's own index.
std::vector<MatchLabel> match_with_overlaps(std::span<const std::size_t> order,
                                            std::span<const GroundTruthRecord> gts,
                                            const ImageOverlaps& o, double iou_thresh,
                                            double ignore_overlap) {
  const double thresh = std::min(iou_thresh, 1.0 - 1e-10);
  std::vector<MatchLabel> labels(o.det_gt_iou.size(), MatchLabel::kFalsePositive);
  std::vector<bool> gt_taken(gts.size(), false);
  for (std::size_t d : order) {
    const std::vector<double>& ious = o.det_gt_iou[d];
    std::ptrdiff_t best = -1;
    double best_iou = thresh;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].ignore || gt_taken[g]) continue;
      if (ious[g] < thresh) continue;
      if (best < 0 || ious[g] > best_iou) {
        best = static_cast<std::ptrdiff_t>(g);
        best_iou = ious[g];
      }
    }
    if (best >= 0) {
      gt_taken[static_cast<std::size_t>(best)] = true;
      labels[d] = MatchLabel::kTruePositive;
      continue;
    }
    bool ignored = false;
    for (std::size_t g = 0; g < gts.size() && !ignored; ++g) {
      ignored = gts[g].ignore && ious[g] >= thresh;
    }
    for (double cover : o.det_region_cover[d]) {
      if (ignored) break;
      ignored = cover >= ignore_overlap;
    }
    if (ignored) labels[d] = MatchLabel::kIgnored;
  }
  return labels;
}

struct ImageData {
  std::vector<DetectionRecord> dets;  // canonical order, capped
  std::vector<GroundTruthRecord> gts;
  std::vector<IgnoreRegion> regions;
};

}  // namespace

std::vector<double> coco_iou_thresholds() { return linspace(0.5, 0.95, 10); }

std::vector<DetectionRecord> quad_nms(std::span<const DetectionRecord> dets, double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
    throw ParameterError("NMS threshold must lie in (0, 1)");
  }
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::map<std::string, std::vector<std::size_t>> kept_per_image;
  std::vector<DetectionRecord> out;
  for (std::size_t i : order) {
    std::vector<std::size_t>& kept = kept_per_image[dets[i].image_id];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return geometry::quad_iou(dets[k].quad, dets[i].quad) > iou_thresh;
    });
    if (suppressed) continue;
    kept.push_back(i);
    out.push_back(dets[i]);
  }
  return out;
}

std::vector<MatchLabel> match_image(std::span<const DetectionRecord> dets,
                                    std::span<const GroundTruthRecord> gts,
                                    std::span<const IgnoreRegion> ignore_regions,
                                    double iou_thresh, double ignore_overlap) {
  const std::string* image_id = nullptr;
  auto check = [&](const std::string& id) {
    if (image_id == nullptr) {
      image_id = &id;
    } else if (*image_id != id) {
      throw InputError("match_image received records from images '" + *image_id + "' and '" +
                       id + "'");
    }
  };
  for (const auto& d : dets) check(d.image_id);
  for (const auto& g : gts) check(g.image_id);
  for (const auto& r : ignore_regions) check(r.image_id);

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  const ImageOverlaps overlaps = compute_overlaps(dets, gts, ignore_regions);
  return match_with_overlaps(order, gts, overlaps, iou_thresh, ignore_overlap);
}

std::optional<double> average_precision(std::span<const MatchLabel> labels,
                                        std::size_t num_gt) {
  std::vector<bool> is_tp;
  is_tp.reserve(labels.size());
  for (MatchLabel l : labels) {
    if (l != MatchLabel::kIgnored) is_tp.push_back(l == MatchLabel::kTruePositive);
  }
  const std::size_t n = is_tp.size();
  const auto tp_total = static_cast<std::size_t>(std::count(is_tp.begin(), is_tp.end(), true));
  if (tp_total > num_gt) {
    throw ParameterError("more true positives than ground truths");
  }
  if (num_gt == 0) {
    if (n == 0) return std::nullopt;
    return 0.0;
  }
  std::vector<double> recall(n);
  std::vector<double> precision(n);
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (is_tp[i] ? tp : fp) += 1.0;
    recall[i] = tp / static_cast<double>(num_gt);
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  for (double r : recall_thresholds()) {
    const auto it = std::lower_bound(recall.begin(), recall.end(), r);
    if (it == recall.end()) break;
    sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / static_cast<double>(recall_thresholds().size());
}

EvalResult evaluate(std::span<const DetectionRecord> dets,
                    std::span<const GroundTruthRecord> gts,
                    std::span<const IgnoreRegion> ignore_regions, const EvalParams& params) {
  const std::vector<double> requested =
      params.iou_thresholds.empty() ? coco_iou_thresholds() : params.iou_thresholds;
  for (double t : requested) {
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("IoU thresholds must lie in [0, 1]");
  }
  // AP50 and AP75 are always reported, so evaluate them even when the
  // caller's sweep does not contain them.
  std::vector<double> thresholds = requested;
  auto find_threshold = [&](double value) -> std::size_t {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (std::abs(thresholds[i] - value) < 1e-9) return i;
    }
    thresholds.push_back(value);
    return thresholds.size() - 1;
  };
  const std::size_t idx50 = find_threshold(0.5);
  const std::size_t idx75 = find_threshold(0.75);

  std::map<std::string, ImageData> images;
  for (const auto& g : gts) images[g.image_id].gts.push_back(g);
  for (const auto& r : ignore_regions) images[r.image_id].regions.push_back(r);
  for (const auto& d : dets) images[d.image_id].dets.push_back(d);

  std::vector<ImageData*> image_list;
  for (auto& [id, data] : images) {
    std::stable_sort(data.dets.begin(), data.dets.end(), canonical_before);
    if (data.dets.size() > params.max_detections) data.dets.resize(params.max_detections);
    image_list.push_back(&data);
  }

  // labels[image][threshold][det]
  std::vector<std::vector<std::vector<MatchLabel>>> labels(image_list.size());
  parallel_for(image_list.size(), params.threads, [&](std::size_t i) {
    const ImageData& img = *image_list[i];
    const ImageOverlaps overlaps = compute_overlaps(img.dets, img.gts, img.regions);
    std::vector<std::size_t> order(img.dets.size());
    std::iota(order.begin(), order.end(), 0);
    labels[i].reserve(thresholds.size());
    for (double t : thresholds) {
      labels[i].push_back(match_with_overlaps(order, img.gts, overlaps, t, params.ignore_overlap));
    }
  });

  struct Ranked {
    double score;
    std::size_t image;
    std::size_t det;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < image_list.size(); ++i) {
    for (std::size_t d = 0; d < image_list[i]->dets.size(); ++d) {
      ranked.push_back({image_list[i]->dets[d].score, i, d});
    }
  }
  // Images are visited in id order and detections in canonical order, so
  // the stable sort yields a canonical global ranking.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  EvalResult result;
  for (const auto& g : gts) result.num_gt += g.ignore ? 0 : 1;
  result.num_detections = ranked.size();

  std::vector<std::optional<double>> ap(thresholds.size());
  std::vector<double> recall(thresholds.size(), 0.0);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<MatchLabel> sequence;
    sequence.reserve(ranked.size());
    std::size_t tp = 0;
    for (const Ranked& r : ranked) {
      const MatchLabel label = labels[r.image][t][r.det];
      if (label == MatchLabel::kIgnored) continue;
      sequence.push_back(label);
      tp += label == MatchLabel::kTruePositive ? 1 : 0;
    }
    ap[t] = average_precision(sequence, result.num_gt);
    if (result.num_gt > 0) recall[t] = static_cast<double>(tp) / static_cast<double>(result.num_gt);
  }

  double ap_sum = 0.0;
  std::size_t ap_count = 0;
  double recall_sum = 0.0;
  for (std::size_t t = 0; t < requested.size(); ++t) {
    result.per_threshold_ap.emplace_back(requested[t], ap[t].value_or(0.0));
    if (ap[t]) {
      ap_sum += *ap[t];
      ++ap_count;
    }
    recall_sum += recall[t];
  }
  result.map = ap_count > 0 ? ap_sum / static_cast<double>(ap_count) : 0.0;
  result.ar = requested.empty() ? 0.0 : recall_sum / static_cast<double>(requested.size());
  result.ap50 = ap[idx50].value_or(0.0);
  result.ap75 = ap[idx75].value_or(0.0);
  return result;
}

double g_map(double map_origin, double map_cross) {
  if (!(map_origin >= 0.0) || !(map_cross >= 0.0) || !std::isfinite(map_origin) ||
      !std::isfinite(map_cross)) {
    throw ParameterError("g-mAP inputs must be non-negative and finite");
  }
  return std::sqrt(map_origin * map_cross);
}

}  // namespace unitail::deteval
