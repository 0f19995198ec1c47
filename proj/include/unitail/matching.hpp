// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Text-enhanced product matching.
//
// Queries are ranked against a one-shot gallery by visual cosine
// similarity. When the two best visual candidates are within `t` of each
// other, the decision between them is re-made with
//   w * text_similarity + (1 - w) * visual_similarity,
// where text similarity is the best one-to-one pairing of positionally
// encoded word features, scored by summed cosine similarity.

#ifndef UNITAIL_MATCHING_HPP_
#define UNITAIL_MATCHING_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace unitail::matching {

// Intermediate recognizer feature of one word plus the word's box center,
// normalised to [0, 1] within the product crop.
struct WordFeature {
  std::vector<double> vector;
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const WordFeature&, const WordFeature&) = default;
};

// Variable-length word features of one product. Tracks whether the
// positional encoding has been added so it cannot be added twice.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  // Throws InputError when the items disagree on dimension.
  explicit FeatureSequence(std::vector<WordFeature> items);

  const std::vector<WordFeature>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  // 0 for an empty sequence.
  std::size_t dim() const { return items_.empty() ? 0 : items_.front().vector.size(); }
  bool has_positional_encoding() const { return encoded_; }

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;

 private:
  friend FeatureSequence add_pe(const FeatureSequence& s);

  std::vector<WordFeature> items_;
  bool encoded_ = false;
};

struct GalleryEntry {
  std::string category_id;
  std::vector<double> visual;
  FeatureSequence texts;
};

struct QueryRecord {
  std::string query_id;
  std::vector<double> visual;
  FeatureSequence texts;
  std::string truth;  // category id, evaluation only
};

struct MatchConfig {
  double t = 0.0;
  double w = 0.0;
  // Divide the text similarity by min(n, m).
  bool normalize_text = false;
};

// Immutable, validated gallery: non-empty, unique category ids, non-zero
// visual vectors of one dimension.
class Gallery {
 public:
  explicit Gallery(std::vector<GalleryEntry> entries);

  const std::vector<GalleryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const GalleryEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<GalleryEntry> entries_;
};

inline constexpr double kPositionalTemperature = 10000.0;

// Sine/cosine encoding: the first d/2 entries encode u, the last d/2
// encode v; pair i of a half is (sin, cos) of 2*pi*coord / T^(4i/d).
// Throws ParameterError unless d is a positive multiple of 4 and u, v lie
// in [0, 1].
std::vector<double> positional_encoding_2d(double u, double v, std::size_t d);

// Adds the positional encoding of each word's center to its vector.
// Throws InputError if the sequence is already encoded.
FeatureSequence add_pe(const FeatureSequence& s);

// Throws InputError on dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Maximum over one-to-one pairings of the summed cosine similarities; 0 if
// either sequence is empty.
double text_similarity(const FeatureSequence& a, const FeatureSequence& b,
                       bool normalize = false);

// Everything about one query that does not depend on (t, w).
struct QueryScores {
  std::size_t top1 = 0;
  std::size_t top2 = 0;  // == top1 for a one-entry gallery
  double visual1 = 0.0;
  double visual2 = 0.0;
  double text1 = 0.0;
  double text2 = 0.0;
};

// Visual ties are broken by category id so the result does not depend on
// gallery order.
QueryScores score_query(const QueryRecord& q, const Gallery& gallery, bool normalize_text);

// Index into the gallery chosen for the given (t, w). Ties go to the
// visual top-1.
std::size_t decide(const QueryScores& s, double t, double w);

const std::string& match_product(const QueryRecord& q, const Gallery& gallery,
                                 const MatchConfig& cfg);

// 0 for an empty query list.
double top1_accuracy(std::span<const QueryRecord> queries, const Gallery& gallery,
                     const MatchConfig& cfg, unsigned threads = 1);

struct TuneResult {
  double t = 0.0;
  double w = 0.0;
  double accuracy = 0.0;
};

// Exhaustive grid search for the best top-1 accuracy; ties prefer smaller
// t, then smaller w. Throws ParameterError on empty grids.
TuneResult tune_params(std::span<const QueryRecord> queries, const Gallery& gallery,
                       std::span<const double> t_grid, std::span<const double> w_grid,
                       bool normalize_text = false, unsigned threads = 1);

}  // namespace unitail::matching

#endif  // UNITAIL_MATCHING_HPP_
