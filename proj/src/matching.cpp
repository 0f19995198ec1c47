// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "unitail/error.hpp"
#include "unitail/hungarian.hpp"
#include "unitail/parallel.hpp"

namespace unitail::matching {

namespace {

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FeatureSequence::FeatureSequence(std::vector<WordFeature> items) : items_(std::move(items)) {
  for (const WordFeature& w : items_) {
    if (w.vector.size() != items_.front().vector.size()) {
      throw InputError("word features in one sequence must share a dimension");
    }
  }
}

Gallery::Gallery(std::vector<GalleryEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InputError("gallery is empty");
  std::set<std::string> ids;
  for (const GalleryEntry& e : entries_) {
    if (!ids.insert(e.category_id).second) {
      throw InputError("duplicate gallery category '" + e.category_id + "'");
    }
    if (e.visual.size() != entries_.front().visual.size()) {
      throw InputError("gallery visual features differ in dimension");
    }
    if (l2_norm(e.visual) == 0.0) {
      throw InputError("gallery category '" + e.category_id + "' has a zero visual vector");
    }
  }
}

std::vector<double> positional_encoding_2d(double u, double v, std::size_t d) {
  if (d == 0 || d % 4 != 0) {
    throw ParameterError("positional encoding width must be a positive multiple of 4, got " +
                         std::to_string(d));
  }
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw ParameterError("word centers must be normalised to [0, 1]");
  }
  constexpr double kScale = 2.0 * std::numbers::pi;
  const std::size_t half = d / 2;
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d / 4; ++i) {
    const double freq =
        std::pow(kPositionalTemperature, static_cast<double>(4 * i) / static_cast<double>(d));
    out[2 * i] = std::sin(u * kScale / freq);
    out[2 * i + 1] = std::cos(u * kScale / freq);
    out[half + 2 * i] = std::sin(v * kScale / freq);
    out[half + 2 * i + 1] = std::cos(v * kScale / freq);
  }
  return out;
}

FeatureSequence add_pe(const FeatureSequence& s) {
  if (s.encoded_) throw InputError("positional encoding was already added to this sequence");
  FeatureSequence out = s;
  for (WordFeature& w : out.items_) {
    const std::vector<double> pe = positional_encoding_2d(w.u, w.v, w.vector.size());
    for (std::size_t k = 0; k < pe.size(); ++k) w.vector[k] += pe[k];
  }
  out.encoded_ = true;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("feature dimensions differ: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw InputError("cosine similarity of a zero vector");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb);
}

double text_similarity(const FeatureSequence& a, const FeatureSequence& b, bool normalize) {
  if (a.empty() || b.empty()) return 0.0;
  if (a.dim() != b.dim()) {
    throw InputError("word feature dimensions differ: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
  CostMatrix cost(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      cost(i, j) = -cosine_similarity(a.items()[i].vector, b.items()[j].vector);
    }
  }
  const Assignment best = hungarian(cost);
  const double sum = -best.total_cost;
  return normalize ? sum / static_cast<double>(std::min(a.size(), b.size())) : sum;
}

QueryScores score_query(const QueryRecord& q, const Gallery& gallery, bool normalize_text) {
  std::vector<double> sims(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    sims[i] = cosine_similarity(q.visual, gallery[i].visual);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return gallery[a].category_id < gallery[b].category_id;
  };
  QueryScores s;
  s.top1 = 0;
  for (std::size_t i = 1; i < gallery.size(); ++i) {
    if (better(i, s.top1)) s.top1 = i;
  }
  s.top2 = s.top1;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (i == s.top1) continue;
    if (s.top2 == s.top1 || better(i, s.top2)) s.top2 = i;
  }
  s.visual1 = sims[s.top1];
  s.visual2 = sims[s.top2];
  s.text1 = text_similarity(q.texts, gallery[s.top1].texts, normalize_text);
  s.text2 = s.top2 == s.top1 ? s.text1
                              : text_similarity(q.texts, gallery[s.top2].texts, normalize_text);
  return s;
}

std::size_t decide(const QueryScores& s, double t, double w) {
  if (s.top1 == s.top2 || s.visual1 - s.visual2 > t) return s.top1;
  const double combined1 = w * s.text1 + (1.0 - w) * s.visual1;
  const double combined2 = w * s.text2 + (1.0 - w) * s.visual2;
  return combined2 > combined1 ? s.top2 : s.top1;
}

const std::string& match_product(const QueryRecord& q, const Gallery& gallery,
                                 const MatchConfig& cfg) {
  return gallery[decide(score_query(q, gallery, cfg.normalize_text), cfg.t, cfg.w)].category_id;
}

namespace {

std::vector<QueryScores> score_all(std::span<const QueryRecord> queries, const Gallery& gallery,
                                   bool normalize_text, unsigned threads) {
  std::vector<QueryScores> scores(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    scores[i] = score_query(queries[i], gallery, normalize_text);
  });
  return scores;
}

double accuracy_of(std::span<const QueryRecord> queries, const Gallery& gallery,
                   std::span<const QueryScores> scores, double t, double w) {
  if (queries.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    hits += gallery[decide(scores[i], t, w)].category_id == queries[i].truth ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.size());
}

}  // namespace

double top1_accuracy(std::span<const QueryRecord> queries, const Gallery& gallery,
                     const MatchConfig& cfg, unsigned threads) {
  const std::vector<QueryScores> scores = score_all(queries, gallery, cfg.normalize_text, threads);
  return accuracy_of(queries, gallery, scores, cfg.t, cfg.w);
}

TuneResult tune_params(std::span<const QueryRecord> queries, const Gallery& gallery,
                       std::span<const double> t_grid, std::span<const double> w_grid,
                       bool normalize_text, unsigned threads) {
  if (t_grid.empty() || w_grid.empty()) throw ParameterError("tuning grids must be non-empty");
  std::vector<double> ts(t_grid.begin(), t_grid.end());
  std::vector<double> ws(w_grid.begin(), w_grid.end());
  for (double t : ts) {
    if (!(t >= 0.0)) throw ParameterError("threshold t must be non-negative");
  }
  for (double w : ws) {
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("weight w must lie in [0, 1]");
  }
  std::sort(ts.begin(), ts.end());
  std::sort(ws.begin(), ws.end());

  const std::vector<QueryScores> scores = score_all(queries, gallery, normalize_text, threads);
  TuneResult best{ts.front(), ws.front(), -1.0};
  for (double t : ts) {
    for (double w : ws) {
      const double acc = accuracy_of(queries, gallery, scores, t, w);
      if (acc > best.accuracy) best = {t, w, acc};
    }
  }
  return best;
}

}  // namespace unitail::matching
