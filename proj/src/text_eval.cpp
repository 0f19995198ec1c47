// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/text_eval.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "unitail/error.hpp"

namespace unitail::text {

Vocabulary::Vocabulary(std::span<const std::string> words) {
  for (const std::string& w : words) {
    std::string n = normalize_transcription(w);
    if (!n.empty()) words_.insert(std::move(n));
  }
  if (words_.empty()) throw InputError("vocabulary is empty");
}

std::string normalize_transcription(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char ch : raw) {
    if (ch >= 'A' && ch <= 'Z') {
      out.push_back(static_cast<char>(ch - 'A' + 'a'));
    } else if ((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9')) {
      out.push_back(ch);
    }
  }
  return out;
}

DetCounts text_det_counts(std::span<const QuadBox> preds, std::span<const TextRegion> gts,
                          double iou_thresh) {
  struct Pair {
    double iou;
    std::size_t pred;
    std::size_t gt;
  };
  std::vector<std::vector<double>> iou(preds.size(), std::vector<double>(gts.size(), 0.0));
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      iou[p][g] = geometry::quad_iou(preds[p], gts[g].quad);
      if (gts[g].legible && iou[p][g] >= iou_thresh) pairs.push_back({iou[p][g], p, g});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(b.iou, a.pred, a.gt) < std::tie(a.iou, b.pred, b.gt);
  });

  DetCounts counts;
  std::vector<bool> pred_used(preds.size(), false);
  std::vector<bool> gt_used(gts.size(), false);
  for (const Pair& pair : pairs) {
    if (pred_used[pair.pred] || gt_used[pair.gt]) continue;
    pred_used[pair.pred] = true;
    gt_used[pair.gt] = true;
    ++counts.matched;
  }
  for (const TextRegion& g : gts) counts.care_gts += g.legible ? 1 : 0;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    bool dont_care = false;
    if (!pred_used[p]) {
      for (std::size_t g = 0; g < gts.size() && !dont_care; ++g) {
        dont_care = !gts[g].legible && iou[p][g] >= iou_thresh;
      }
    }
    counts.care_predictions += dont_care ? 0 : 1;
  }
  return counts;
}

Prf prf_from_counts(const DetCounts& c) {
  Prf out;
  if (c.care_gts == 0) {
    out.recall = 1.0;
    out.precision = c.care_predictions > 0 ? 0.0 : 1.0;
  } else {
    out.recall = static_cast<double>(c.matched) / static_cast<double>(c.care_gts);
    out.precision = c.care_predictions == 0
                        ? 0.0
                        : static_cast<double>(c.matched) / static_cast<double>(c.care_predictions);
  }
  const double sum = out.precision + out.recall;
  out.hmean = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

Prf text_det_prf(std::span<const QuadBox> preds, std::span<const TextRegion> gts,
                 double iou_thresh) {
  return prf_from_counts(text_det_counts(preds, gts, iou_thresh));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double ned(std::span<const TranscriptionPair> pairs, NedNorm norm) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [pred, gt] : pairs) {
    const std::size_t len = norm == NedNorm::kMaxLength ? std::max(pred.size(), gt.size()) : gt.size();
    // The gt-length variant can exceed 1 for long predictions; clamp keeps
    // the metric in [0, 1].
    const double d = static_cast<double>(edit_distance(pred, gt)) /
                     static_cast<double>(std::max<std::size_t>(len, 1));
    sum += std::min(d, 1.0);
  }
  return sum / static_cast<double>(pairs.size());
}

double word_accuracy(std::span<const TranscriptionPair> pairs) {
  if (pairs.empty()) return 0.0;
  const auto hits = std::count_if(pairs.begin(), pairs.end(),
                                  [](const TranscriptionPair& p) { return p.first == p.second; });
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

std::string vocab_correct(const std::string& pred, const Vocabulary& vocab) {
  if (vocab.contains(pred)) return pred;
  const std::string* best = nullptr;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  for (const std::string& word : vocab.words()) {
    const std::size_t d = edit_distance(pred, word);
    if (d < best_distance) {
      best_distance = d;
      best = &word;
    }
  }
  return *best;
}

}  // namespace unitail::text
