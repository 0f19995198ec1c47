// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

// File formats, loaders, writers and dataset statistics.
//
// Detection annotations (UTF-8 JSON):
//   {"images": [{"id": "a", "width": 640, "height": 480}, ...],
//    "annotations": [{"image_id": "a", "quad": [x0,y0,...,x3,y3],
//                     "ignore": false}, ...],
//    "ignore_regions": [{"image_id": "a", "polygon": [x0,y0,x1,y1,...]}]}
// Quads are listed top-left first, clockwise on screen.
//
// Detections: [{"image_id": "a", "quad": [...], "score": 0.9}, ...] or the
// same array under a "detections" key.
//
// OCR products:
//   {"split": "gallery" | "query",
//    "products": [{"product_id": "p1", "category_id": "c1",
//                  "regions": [{"quad": [...], "legible": true,
//                               "transcription": "cream"}]}]}
//
// Text predictions:
//   detection:   {"products": [{"product_id": "p1", "quads": [[...], ...]}]}
//   recognition: {"products": [{"product_id": "p1",
//                               "transcriptions": ["...", ...]}]}
//   (one transcription per legible gt region, in gt order)
//
// Feature files (binary, little-endian):
//   "UTFT" | version u32 = 1 | d u32 | count u32
//   count x { id_len u32 | id bytes (UTF-8) | n u32 |
//             n x { u f64 | v f64 | d x f32 } }
// Visual features use the same container with exactly one item per
// product (center ignored).

#ifndef UNITAIL_DATASET_IO_HPP_
#define UNITAIL_DATASET_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "unitail/assignment.hpp"
#include "unitail/detection_eval.hpp"
#include "unitail/matching.hpp"
#include "unitail/text_eval.hpp"

namespace unitail::io {

using deteval::DetectionRecord;
using deteval::GroundTruthRecord;
using deteval::IgnoreRegion;

// Quads with less area than this (an 8x8 box) are loaded as ignore.
inline constexpr double kMinPositiveArea = 64.0;

struct ImageInfo {
  std::string id;
  int width = 0;
  int height = 0;
};

struct DetDataset {
  std::vector<ImageInfo> images;
  std::vector<GroundTruthRecord> gts;
  std::vector<IgnoreRegion> ignore_regions;
  // Annotations whose corners were moved into the image bounds.
  std::size_t clamped_quads = 0;

  const ImageInfo* find_image(const std::string& id) const;
};

DetDataset parse_det_annotations(const nlohmann::json& doc);
DetDataset load_det_annotations(const std::filesystem::path& path);

std::vector<DetectionRecord> parse_detections(const nlohmann::json& doc);
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);

enum class Split { kGallery, kQuery };

struct OcrProduct {
  std::string product_id;
  std::string category_id;
  std::vector<text::TextRegion> regions;
};

struct OcrDataset {
  Split split = Split::kQuery;
  std::vector<OcrProduct> products;
};

// Transcriptions are normalised on load. A gallery split must hold
// exactly one product per category.
OcrDataset parse_ocr_dataset(const nlohmann::json& doc);
OcrDataset load_ocr_dataset(const std::filesystem::path& path);

std::map<std::string, std::vector<geometry::QuadBox>> load_text_det_predictions(
    const std::filesystem::path& path);
std::map<std::string, std::vector<std::string>> load_text_rec_predictions(
    const std::filesystem::path& path);

// One word per line; normalised, de-duplicated, blank lines skipped.
text::Vocabulary parse_vocabulary(const std::string& contents);
text::Vocabulary load_vocabulary(const std::filesystem::path& path);

struct FeatureRecord {
  std::string product_id;
  std::vector<matching::WordFeature> words;

  friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct FeatureFile {
  std::uint32_t dim = 0;
  std::vector<FeatureRecord> records;

  friend bool operator==(const FeatureFile&, const FeatureFile&) = default;
};

inline constexpr std::uint32_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file);
// Throws FormatError on bad magic, version, truncation, trailing bytes or
// duplicate product ids.
FeatureFile decode_feature_file(const std::vector<std::uint8_t>& bytes);
FeatureFile load_feature_file(const std::filesystem::path& path);
void save_feature_file(const std::filesystem::path& path, const FeatureFile& file);

struct ProductFeatures {
  std::vector<double> visual;
  matching::FeatureSequence texts;
};

// Joins a word-feature file with a visual-feature file by product id.
// Every product must appear in both.
std::map<std::string, ProductFeatures> load_features(const std::filesystem::path& text_path,
                                                     const std::filesystem::path& visual_path);

struct Histogram {
  std::vector<double> edges;  // counts.size() + 1 ascending edges
  std::vector<std::size_t> counts;

  // Values outside the edges fall into the first or last bin.
  void add(double value);
  std::size_t total() const;
};

struct DatasetStats {
  Histogram density;  // instances per image; width 25 over [0, 800]
  Histogram scale;    // sqrt(area); log2 bins over [2^4, 2^11]
  Histogram aspect;   // aspect ratio; 24 log-spaced bins over [0.05, 38]
  std::size_t images = 0;
  std::size_t instances = 0;
  double density_mean = 0.0;
  double density_std = 0.0;  // population
  double scale_mean = 0.0;
  double mean_angle_std = 0.0;  // over convex quads
  std::size_t nonconvex = 0;
};

DatasetStats compute_stats(const DetDataset& ds);

// Flat object; per-threshold APs under keys "ap@0.50" ... "ap@0.95".
nlohmann::json to_json(const deteval::EvalResult& r);
nlohmann::json to_json(const DatasetStats& s);
nlohmann::json to_json(const assign::AssignmentTarget& t);
nlohmann::json to_json(const DetectionRecord& d);
nlohmann::json quad_to_json(const geometry::QuadBox& q);

std::string read_text_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace unitail::io

#endif  // UNITAIL_DATASET_IO_HPP_
