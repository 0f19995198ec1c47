// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/matching.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "matching_fixture.hpp"
#include "oracles.hpp"
#include "unitail/error.hpp"

namespace unitail::matching {
namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = n(rng);
  return v;
}

FeatureSequence random_sequence(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<WordFeature> items;
  for (std::size_t i = 0; i < n; ++i) items.push_back({random_vector(rng, d), u(rng), u(rng)});
  return FeatureSequence(items);
}

// Maximum summed cosine over all injections, by enumeration.
double brute_force_similarity(const FeatureSequence& a, const FeatureSequence& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::vector<double>> neg(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const auto& x = a.items()[i].vector;
      const auto& y = b.items()[j].vector;
      const double dot = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
      const double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
      const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
      neg[i][j] = -dot / (nx * ny);
    }
  }
  return -oracle::brute_force_min_assignment(neg);
}

TEST(PositionalEncoding, ZeroCenter) {
  const auto pe = positional_encoding_2d(0, 0, 16);
  ASSERT_EQ(pe.size(), 16u);
  for (std::size_t i = 0; i < 16; i += 2) {
    EXPECT_DOUBLE_EQ(pe[i], 0.0);
    EXPECT_DOUBLE_EQ(pe[i + 1], 1.0);
  }
}

TEST(PositionalEncoding, FollowsFormula) {
  const std::size_t d = 8;
  const auto a = positional_encoding_2d(0.25, 0.75, d);
  for (std::size_t i = 0; i < d / 4; ++i) {
    const double f = std::pow(10000.0, 4.0 * static_cast<double>(i) / d);
    EXPECT_NEAR(a[2 * i], std::sin(2 * std::numbers::pi * 0.25 / f), 1e-15);
    EXPECT_NEAR(a[2 * i + 1], std::cos(2 * std::numbers::pi * 0.25 / f), 1e-15);
    EXPECT_NEAR(a[d / 2 + 2 * i], std::sin(2 * std::numbers::pi * 0.75 / f), 1e-15);
    EXPECT_NEAR(a[d / 2 + 2 * i + 1], std::cos(2 * std::numbers::pi * 0.75 / f), 1e-15);
  }
  // Shifting u by 0.5 moves the second u-frequency by half its period.
  const auto b = positional_encoding_2d(0.75, 0.75, d);
  const double f1 = std::pow(10000.0, 4.0 / d);
  EXPECT_NEAR(b[2] - a[2],
              std::sin(2 * std::numbers::pi * 0.75 / f1) - std::sin(2 * std::numbers::pi * 0.25 / f1),
              1e-15);
  EXPECT_EQ(std::vector<double>(a.begin() + d / 2, a.end()),
            std::vector<double>(b.begin() + d / 2, b.end()));
}

TEST(PositionalEncoding, Errors) {
  EXPECT_THROW(positional_encoding_2d(0, 0, 6), ParameterError);
  EXPECT_THROW(positional_encoding_2d(0, 0, 0), ParameterError);
  EXPECT_THROW(positional_encoding_2d(1.5, 0, 8), ParameterError);
}

TEST(AddPe, EmptyAndZeroVector) {
  EXPECT_TRUE(add_pe(FeatureSequence()).empty());
  const FeatureSequence s({{std::vector<double>(8, 0.0), 0.0, 0.0}});
  const FeatureSequence e = add_pe(s);
  EXPECT_TRUE(e.has_positional_encoding());
  EXPECT_EQ(e.items()[0].vector, positional_encoding_2d(0, 0, 8));
  EXPECT_THROW(add_pe(e), InputError);
}

TEST(FeatureSequence, DimensionMismatchThrows) {
  EXPECT_THROW(FeatureSequence({{{1, 2}, 0, 0}, {{1, 2, 3}, 0, 0}}), InputError);
}

TEST(CosineSimilarity, Basics) {
  const std::vector<double> a = {1, 0}, b = {0, 2}, c = {3, 0};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 1.0);
  const std::vector<double> z = {0, 0}, w = {1, 2, 3};
  EXPECT_THROW(cosine_similarity(a, z), InputError);
  EXPECT_THROW(cosine_similarity(a, w), InputError);
}

TEST(TextSimilarity, OrthonormalSelfMatch) {
  std::vector<WordFeature> items;
  for (int k = 0; k < 4; ++k) items.push_back({fixture::unit(k), 0, 0});
  const FeatureSequence s(items);
  EXPECT_NEAR(text_similarity(s, s), 4.0, 1e-12);
  EXPECT_NEAR(text_similarity(s, s, true), 1.0, 1e-12);
}

TEST(TextSimilarity, EmptyIsZero) {
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(text_similarity(FeatureSequence(), random_sequence(rng, 3, 4)), 0.0);
}

TEST(TextSimilarity, DimensionMismatchThrows) {
  std::mt19937_64 rng(2);
  EXPECT_THROW(text_similarity(random_sequence(rng, 2, 4), random_sequence(rng, 2, 8)), InputError);
}

TEST(TextSimilarity, MatchesBruteForceAndProperties) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_real_distribution<double> scale(0.1, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const FeatureSequence a = random_sequence(rng, len(rng), 8);
    const FeatureSequence b = random_sequence(rng, trial == 0 ? 2 : len(rng), 8);
    const double s = text_similarity(a, b);
    EXPECT_NEAR(s, brute_force_similarity(a, b), 1e-9);
    EXPECT_NEAR(s, text_similarity(b, a), 1e-9);
    EXPECT_LE(s, static_cast<double>(std::min(a.size(), b.size())) + 1e-9);

    std::vector<WordFeature> scaled = a.items();
    const double k = scale(rng);
    for (double& x : scaled[0].vector) x *= k;
    EXPECT_NEAR(text_similarity(FeatureSequence(scaled), b), s, 1e-9);
  }
}

TEST(Gallery, Validation) {
  EXPECT_THROW(Gallery({}), InputError);
  auto dup = fixture::gallery_entries();
  dup[1].category_id = dup[0].category_id;
  EXPECT_THROW(Gallery{dup}, InputError);
  auto zero = fixture::gallery_entries();
  zero[2].visual = {0, 0, 0, 0};
  EXPECT_THROW(Gallery{zero}, InputError);
}

TEST(MatchProduct, ZeroThresholdIsVisualArgmax) {
  std::mt19937_64 rng(4);
  std::vector<GalleryEntry> entries;
  for (int k = 0; k < 6; ++k) {
    entries.push_back({"g" + std::to_string(k), random_vector(rng, 5), random_sequence(rng, 3, 4)});
  }
  const Gallery gallery(entries);
  for (int i = 0; i < 200; ++i) {
    const QueryRecord q{"q", random_vector(rng, 5), random_sequence(rng, 2, 4), ""};
    std::size_t best = 0;
    double best_sim = -2;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const double s = cosine_similarity(q.visual, entries[k].visual);
      if (s > best_sim) {
        best_sim = s;
        best = k;
      }
    }
    EXPECT_EQ(match_product(q, gallery, {0.0, 0.7, false}), entries[best].category_id);
  }
}

TEST(MatchProduct, ZeroWeightKeepsVisualTop1) {
  const Gallery g(fixture::gallery_entries());
  const auto q = fixture::queries();
  EXPECT_EQ(match_product(q[8], g, {0.5, 0.0, false}), "c1");
}

TEST(MatchProduct, TextDecidesAboveCriticalWeight) {
  const Gallery g(fixture::gallery_entries());
  const auto q = fixture::queries();
  // Visual gap 0.01, text margin 1: switch once w > 0.01 / 1.01.
  EXPECT_EQ(match_product(q[8], g, {0.05, 0.0098, false}), "c1");
  EXPECT_EQ(match_product(q[8], g, {0.05, 0.0100, false}), "c2");
  EXPECT_EQ(match_product(q[8], g, {0.0, 1.0, false}), "c1");
}

TEST(MatchProduct, GalleryOrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  // Exact visual ties between g0 and g1 exercise the tie-break.
  std::vector<GalleryEntry> entries;
  const auto shared = random_vector(rng, 4);
  entries.push_back({"g1", shared, random_sequence(rng, 2, 4)});
  entries.push_back({"g0", shared, random_sequence(rng, 2, 4)});
  for (int k = 2; k < 6; ++k) {
    entries.push_back({"g" + std::to_string(k), random_vector(rng, 4), random_sequence(rng, 2, 4)});
  }
  std::vector<QueryRecord> queries;
  for (int i = 0; i < 50; ++i) {
    queries.push_back({"q", i < 5 ? shared : random_vector(rng, 4), random_sequence(rng, 2, 4), ""});
  }
  const Gallery base(entries);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(entries.begin(), entries.end(), rng);
    const Gallery shuffled(entries);
    for (const auto& q : queries) {
      for (const MatchConfig cfg : {MatchConfig{0, 0, false}, MatchConfig{0.3, 0.5, false}}) {
        EXPECT_EQ(match_product(q, shuffled, cfg), match_product(q, base, cfg));
      }
    }
  }
}

TEST(Top1Accuracy, FixtureCounts) {
  const Gallery g(fixture::gallery_entries());
  const auto q = fixture::queries();
  EXPECT_DOUBLE_EQ(top1_accuracy(q, g, {0.0, 0.5, false}), 0.8);
  EXPECT_DOUBLE_EQ(top1_accuracy(q, g, {0.05, 0.5, false}), 1.0);
  EXPECT_DOUBLE_EQ(top1_accuracy(q, g, {0.05, 0.5, false}, 4), 1.0);
  EXPECT_DOUBLE_EQ(top1_accuracy({}, g, {}), 0.0);
}

TEST(Top1Accuracy, CopiesAndAdversarialLabels) {
  const auto entries = fixture::gallery_entries();
  const Gallery g(entries);
  std::vector<QueryRecord> copies, wrong;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    copies.push_back({"q", entries[k].visual, entries[k].texts, entries[k].category_id});
    wrong.push_back({"q", entries[k].visual, entries[k].texts,
                     entries[(k + 2) % entries.size()].category_id});
  }
  EXPECT_DOUBLE_EQ(top1_accuracy(copies, g, {}), 1.0);
  EXPECT_DOUBLE_EQ(top1_accuracy(wrong, g, {}), 0.0);
}

TEST(TuneParams, PicksSmallestWinningPoint) {
  const Gallery g(fixture::gallery_entries());
  const auto q = fixture::queries();
  const std::vector<double> ts = {0.05, 0.0}, ws = {1.0, 0.5, 0.0};
  const TuneResult r = tune_params(q, g, ts, ws);
  EXPECT_DOUBLE_EQ(r.t, 0.05);
  EXPECT_DOUBLE_EQ(r.w, 0.5);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(TuneParams, SinglePointGrid) {
  const Gallery g(fixture::gallery_entries());
  const auto q = fixture::queries();
  const std::vector<double> t = {0.2}, w = {0.3};
  const TuneResult r = tune_params(q, g, t, w);
  EXPECT_DOUBLE_EQ(r.t, 0.2);
  EXPECT_DOUBLE_EQ(r.w, 0.3);
}

TEST(TuneParams, Errors) {
  const Gallery g(fixture::gallery_entries());
  const std::vector<double> empty, ok = {0.1}, bad = {1.5};
  EXPECT_THROW(tune_params({}, g, empty, ok), ParameterError);
  EXPECT_THROW(tune_params({}, g, ok, bad), ParameterError);
}

}  // namespace
}  // namespace unitail::matching
