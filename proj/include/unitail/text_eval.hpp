// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Text detection (precision / recall / hmean) and recognition (edit
// distance, NED, word accuracy) metrics.

#ifndef UNITAIL_TEXT_EVAL_HPP_
#define UNITAIL_TEXT_EVAL_HPP_

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unitail/geometry.hpp"

namespace unitail::text {

using geometry::QuadBox;

struct TextRegion {
  QuadBox quad;
  bool legible = true;
  // Normalised; empty for illegible regions.
  std::string transcription;
};

// Normalised, de-duplicated word list. Never empty.
class Vocabulary {
 public:
  // Normalises every word and drops the ones that normalise to "". Throws
  // InputError if nothing is left.
  explicit Vocabulary(std::span<const std::string> words);

  bool contains(const std::string& word) const { return words_.contains(word); }
  std::size_t size() const { return words_.size(); }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

// Lowercase and keep only [0-9a-z].
std::string normalize_transcription(std::string_view raw);

struct DetCounts {
  std::size_t matched = 0;
  std::size_t care_predictions = 0;  // predictions not absorbed by illegible regions
  std::size_t care_gts = 0;          // legible gts

  DetCounts& operator+=(const DetCounts& o) {
    matched += o.matched;
    care_predictions += o.care_predictions;
    care_gts += o.care_gts;
    return *this;
  }
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double hmean = 0.0;
};

// One image: one-to-one greedy matching by descending IoU among pairs with
// IoU >= iou_thresh. Unmatched predictions overlapping an illegible region
// by IoU >= iou_thresh are not counted.
DetCounts text_det_counts(std::span<const QuadBox> preds, std::span<const TextRegion> gts,
                          double iou_thresh = 0.5);

// ICDAR-style scores from pooled counts. Without legible gts recall is 1;
// without counted predictions precision is 0 (1 when there are no legible
// gts either).
Prf prf_from_counts(const DetCounts& counts);

Prf text_det_prf(std::span<const QuadBox> preds, std::span<const TextRegion> gts,
                 double iou_thresh = 0.5);

// Levenshtein distance with unit costs over bytes.
std::size_t edit_distance(std::string_view a, std::string_view b);

enum class NedNorm {
  kMaxLength,          // max(|pred|, |gt|, 1)
  kGroundTruthLength,  // max(|gt|, 1)
};

using TranscriptionPair = std::pair<std::string, std::string>;  // (pred, gt)

// Mean normalised edit distance; 0 for an empty list.
double ned(std::span<const TranscriptionPair> pairs, NedNorm norm = NedNorm::kMaxLength);

// Fraction of exact matches; 0 for an empty list.
double word_accuracy(std::span<const TranscriptionPair> pairs);

// Closest vocabulary word by edit distance, ties broken lexicographically.
std::string vocab_correct(const std::string& pred, const Vocabulary& vocab);

}  // namespace unitail::text

#endif  // UNITAIL_TEXT_EVAL_HPP_
