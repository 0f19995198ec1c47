// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "unitail/error.hpp"

namespace unitail::io {

namespace {

using nlohmann::json;
using geometry::Point2D;
using geometry::QuadBox;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw FormatError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::string id_string(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  fail(where, "id must be a string or integer");
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "number is not finite");
  return d;
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

QuadBox quad_field(const json& v, const std::string& where) {
  const std::vector<double> xy = number_list(v, where);
  if (xy.size() != 8) {
    fail(where, "a quad needs 8 numbers (4 corners), got " + std::to_string(xy.size()));
  }
  return QuadBox::from_flat(xy);
}

QuadBox validated(const QuadBox& q, const std::string& where) {
  try {
    return QuadBox::checked(q.corners);
  } catch (const DegenerateGeometryError& e) {
    fail(where, e.what());
  }
}

json parse_json_text(const std::string& text, const std::filesystem::path& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Little-endian primitive IO.
template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("feature file truncated while reading " + std::string(what) +
                        " at byte " + std::to_string(pos_));
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'U', 'T', 'F', 'T'};

std::vector<double> edges_linear(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  return e;
}

std::vector<double> edges_log(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    e[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(bins));
  }
  e.front() = lo;
  e.back() = hi;
  return e;
}

Histogram make_histogram(std::vector<double> edges) {
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  h.edges = std::move(edges);
  return h;
}

json histogram_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

}  // namespace

const ImageInfo* DetDataset::find_image(const std::string& id) const {
  for (const ImageInfo& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing " + path.string());
}

DetDataset parse_det_annotations(const json& doc) {
  DetDataset ds;
  const json& images = require(doc, "images", "document");
  if (!images.is_array()) fail("images", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    ImageInfo info;
    info.id = id_string(require(images[i], "id", where), where + ".id");
    const double w = number(require(images[i], "width", where), where + ".width");
    const double h = number(require(images[i], "height", where), where + ".height");
    if (w <= 0 || h <= 0 || w != std::floor(w) || h != std::floor(h)) {
      fail(where, "width and height must be positive integers");
    }
    info.width = static_cast<int>(w);
    info.height = static_cast<int>(h);
    if (!ids.insert(info.id).second) fail(where, "duplicate image id '" + info.id + "'");
    ds.images.push_back(std::move(info));
  }

  const json& annotations = require(doc, "annotations", "document");
  if (!annotations.is_array()) fail("annotations", "expected an array");
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    const json& a = annotations[i];
    GroundTruthRecord gt;
    gt.image_id = id_string(require(a, "image_id", where), where + ".image_id");
    const ImageInfo* img = ds.find_image(gt.image_id);
    if (img == nullptr) fail(where, "unknown image id '" + gt.image_id + "'");
    QuadBox q = quad_field(require(a, "quad", where), where + ".quad");
    bool clamped = false;
    for (Point2D& p : q.corners) {
      const Point2D c{std::clamp(p.x, 0.0, static_cast<double>(img->width)),
                      std::clamp(p.y, 0.0, static_cast<double>(img->height))};
      clamped = clamped || !(c == p);
      p = c;
    }
    ds.clamped_quads += clamped ? 1 : 0;
    gt.quad = validated(q, where + ".quad");
    if (const auto it = a.find("ignore"); it != a.end()) {
      if (!it->is_boolean()) fail(where + ".ignore", "expected a boolean");
      gt.ignore = it->get<bool>();
    }
    if (geometry::shoelace_area(gt.quad) < kMinPositiveArea) gt.ignore = true;
    ds.gts.push_back(std::move(gt));
  }

  if (const auto it = doc.find("ignore_regions"); it != doc.end()) {
    if (!it->is_array()) fail("ignore_regions", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "ignore_regions[" + std::to_string(i) + "]";
      const json& r = (*it)[i];
      IgnoreRegion region;
      region.image_id = id_string(require(r, "image_id", where), where + ".image_id");
      if (ds.find_image(region.image_id) == nullptr) {
        fail(where, "unknown image id '" + region.image_id + "'");
      }
      const std::vector<double> xy = number_list(require(r, "polygon", where), where + ".polygon");
      if (xy.size() < 6 || xy.size() % 2 != 0) {
        fail(where, "polygon needs at least 3 points as x,y pairs");
      }
      for (std::size_t k = 0; k < xy.size(); k += 2) {
        region.polygon.vertices.push_back({xy[k], xy[k + 1]});
      }
      if (geometry::shoelace_area(region.polygon) <= geometry::kEpsilon) {
        fail(where, "polygon has zero area");
      }
      ds.ignore_regions.push_back(std::move(region));
    }
  }
  return ds;
}

DetDataset load_det_annotations(const std::filesystem::path& path) {
  const json doc = parse_json_text(read_text_file(path), path);
  try {
    return parse_det_annotations(doc);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<DetectionRecord> parse_detections(const json& doc) {
  const json* list = &doc;
  if (doc.is_object()) list = &require(doc, "detections", "document");
  if (!list->is_array()) fail("detections", "expected an array");
  std::vector<DetectionRecord> out;
  out.reserve(list->size());
  for (std::size_t i = 0; i < list->size(); ++i) {
    const std::string where = "detections[" + std::to_string(i) + "]";
    const json& d = (*list)[i];
    DetectionRecord rec;
    rec.image_id = id_string(require(d, "image_id", where), where + ".image_id");
    rec.quad = quad_field(require(d, "quad", where), where + ".quad");
    rec.score = number(require(d, "score", where), where + ".score");
    if (rec.score < 0.0 || rec.score > 1.0) {
      fail(where, "score " + std::to_string(rec.score) + " is outside [0, 1]");
    }
    // Predicted quads may be unordered or non-convex (they are hulled for
    // IoU) but must span an area.
    try {
      geometry::convex_hull(rec.quad.corners);
    } catch (const DegenerateGeometryError&) {
      fail(where, "quad has zero area");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
  const json doc = parse_json_text(read_text_file(path), path);
  try {
    return parse_detections(doc);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

OcrDataset parse_ocr_dataset(const json& doc) {
  OcrDataset ds;
  const json& split = require(doc, "split", "document");
  if (split == "gallery") {
    ds.split = Split::kGallery;
  } else if (split == "query") {
    ds.split = Split::kQuery;
  } else {
    fail("split", "expected \"gallery\" or \"query\"");
  }
  const json& products = require(doc, "products", "document");
  if (!products.is_array()) fail("products", "expected an array");
  std::set<std::string> product_ids;
  std::set<std::string> categories;
  for (std::size_t i = 0; i < products.size(); ++i) {
    const std::string where = "products[" + std::to_string(i) + "]";
    const json& p = products[i];
    OcrProduct prod;
    prod.product_id = id_string(require(p, "product_id", where), where + ".product_id");
    prod.category_id = id_string(require(p, "category_id", where), where + ".category_id");
    if (!product_ids.insert(prod.product_id).second) {
      fail(where, "duplicate product id '" + prod.product_id + "'");
    }
    if (ds.split == Split::kGallery && !categories.insert(prod.category_id).second) {
      fail(where, "gallery holds more than one product of category '" + prod.category_id + "'");
    }
    if (const auto it = p.find("regions"); it != p.end()) {
      if (!it->is_array()) fail(where + ".regions", "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string rw = where + ".regions[" + std::to_string(k) + "]";
        const json& r = (*it)[k];
        text::TextRegion region;
        region.quad = validated(quad_field(require(r, "quad", rw), rw + ".quad"), rw + ".quad");
        const json& legible = require(r, "legible", rw);
        if (!legible.is_boolean()) fail(rw + ".legible", "expected a boolean");
        region.legible = legible.get<bool>();
        if (region.legible) {
          const json& t = require(r, "transcription", rw);
          if (!t.is_string()) fail(rw + ".transcription", "expected a string");
          region.transcription = text::normalize_transcription(t.get<std::string>());
          if (region.transcription.empty()) {
            fail(rw, "legible region has no alphanumeric transcription");
          }
        }
        prod.regions.push_back(std::move(region));
      }
    }
    ds.products.push_back(std::move(prod));
  }
  return ds;
}

OcrDataset load_ocr_dataset(const std::filesystem::path& path) {
  const json doc = parse_json_text(read_text_file(path), path);
  try {
    return parse_ocr_dataset(doc);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::map<std::string, std::vector<QuadBox>> load_text_det_predictions(
    const std::filesystem::path& path) {
  const json doc = parse_json_text(read_text_file(path), path);
  std::map<std::string, std::vector<QuadBox>> out;
  try {
    const json& products = require(doc, "products", "document");
    if (!products.is_array()) fail("products", "expected an array");
    for (std::size_t i = 0; i < products.size(); ++i) {
      const std::string where = "products[" + std::to_string(i) + "]";
      const std::string id = id_string(require(products[i], "product_id", where), where);
      if (out.contains(id)) fail(where, "duplicate product id '" + id + "'");
      std::vector<QuadBox>& quads = out[id];
      const json& list = require(products[i], "quads", where);
      if (!list.is_array()) fail(where + ".quads", "expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string qw = where + ".quads[" + std::to_string(k) + "]";
        QuadBox q = quad_field(list[k], qw);
        try {
          geometry::convex_hull(q.corners);
        } catch (const DegenerateGeometryError&) {
          fail(qw, "quad has zero area");
        }
        quads.push_back(q);
      }
    }
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

std::map<std::string, std::vector<std::string>> load_text_rec_predictions(
    const std::filesystem::path& path) {
  const json doc = parse_json_text(read_text_file(path), path);
  std::map<std::string, std::vector<std::string>> out;
  try {
    const json& products = require(doc, "products", "document");
    if (!products.is_array()) fail("products", "expected an array");
    for (std::size_t i = 0; i < products.size(); ++i) {
      const std::string where = "products[" + std::to_string(i) + "]";
      const std::string id = id_string(require(products[i], "product_id", where), where);
      if (out.contains(id)) fail(where, "duplicate product id '" + id + "'");
      const json& list = require(products[i], "transcriptions", where);
      if (!list.is_array()) fail(where + ".transcriptions", "expected an array");
      std::vector<std::string>& words = out[id];
      for (std::size_t k = 0; k < list.size(); ++k) {
        if (!list[k].is_string()) {
          fail(where + ".transcriptions[" + std::to_string(k) + "]", "expected a string");
        }
        words.push_back(text::normalize_transcription(list[k].get<std::string>()));
      }
    }
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return out;
}

text::Vocabulary parse_vocabulary(const std::string& contents) {
  std::vector<std::string> words;
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return text::Vocabulary(words);
}

text::Vocabulary load_vocabulary(const std::filesystem::path& path) {
  try {
    return parse_vocabulary(read_text_file(path));
  } catch (const InputError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_feature_file(const FeatureFile& file) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kFeatureFileVersion);
  put<std::uint32_t>(out, file.dim);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.records.size()));
  for (const FeatureRecord& rec : file.records) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.product_id.size()));
    out.insert(out.end(), rec.product_id.begin(), rec.product_id.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.words.size()));
    for (const matching::WordFeature& w : rec.words) {
      if (w.vector.size() != file.dim) {
        throw InputError("product '" + rec.product_id + "' has a word feature of dimension " +
                         std::to_string(w.vector.size()) + ", file dimension is " +
                         std::to_string(file.dim));
      }
      put<double>(out, w.u);
      put<double>(out, w.v);
      for (double x : w.vector) put<float>(out, static_cast<float>(x));
    }
  }
  return out;
}

FeatureFile decode_feature_file(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  const std::string magic = in.string(4, "magic");
  if (magic != std::string(kMagic, 4)) {
    throw FormatError("feature file magic is not \"UTFT\"");
  }
  const auto version = in.get<std::uint32_t>("version");
  if (version != kFeatureFileVersion) {
    throw FormatError("unsupported feature file version " + std::to_string(version));
  }
  FeatureFile file;
  file.dim = in.get<std::uint32_t>("dimension");
  const auto count = in.get<std::uint32_t>("record count");
  std::set<std::string> seen;
  const std::size_t item_bytes = 16 + 4 * static_cast<std::size_t>(file.dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    FeatureRecord rec;
    const auto id_len = in.get<std::uint32_t>("product id length");
    rec.product_id = in.string(id_len, "product id");
    if (!seen.insert(rec.product_id).second) {
      throw FormatError("duplicate product id '" + rec.product_id + "' in feature file");
    }
    const auto n = in.get<std::uint32_t>("word count");
    in.need(static_cast<std::size_t>(n) * item_bytes, "word features");
    rec.words.resize(n);
    for (matching::WordFeature& w : rec.words) {
      w.u = in.get<double>("u");
      w.v = in.get<double>("v");
      w.vector.resize(file.dim);
      for (double& x : w.vector) x = in.get<float>("feature");
    }
    file.records.push_back(std::move(rec));
  }
  if (in.remaining() != 0) {
    throw FormatError("feature file has " + std::to_string(in.remaining()) +
                      " trailing bytes after " + std::to_string(count) + " records");
  }
  return file;
}

FeatureFile load_feature_file(const std::filesystem::path& path) {
  try {
    return decode_feature_file(read_binary_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_feature_file(const std::filesystem::path& path, const FeatureFile& file) {
  write_binary_file(path, encode_feature_file(file));
}

std::map<std::string, ProductFeatures> load_features(const std::filesystem::path& text_path,
                                                     const std::filesystem::path& visual_path) {
  const FeatureFile words = load_feature_file(text_path);
  const FeatureFile visual = load_feature_file(visual_path);
  std::map<std::string, ProductFeatures> out;
  for (const FeatureRecord& rec : visual.records) {
    if (rec.words.size() != 1) {
      throw FormatError(visual_path.string() + ": product '" + rec.product_id +
                        "' must have exactly one visual vector");
    }
    out[rec.product_id].visual = rec.words.front().vector;
  }
  for (const FeatureRecord& rec : words.records) {
    const auto it = out.find(rec.product_id);
    if (it == out.end()) {
      throw FormatError(visual_path.string() + ": no visual vector for product '" +
                        rec.product_id + "'");
    }
    it->second.texts = matching::FeatureSequence(rec.words);
  }
  if (words.records.size() != out.size()) {
    throw FormatError(text_path.string() + ": word features missing for " +
                      std::to_string(out.size() - words.records.size()) + " product(s)");
  }
  return out;
}

void Histogram::add(double value) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  const auto bin = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
  const auto last = static_cast<std::ptrdiff_t>(counts.size()) - 1;
  ++counts[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(bin, 0, last))];
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (std::size_t c : counts) t += c;
  return t;
}

DatasetStats compute_stats(const DetDataset& ds) {
  DatasetStats s;
  s.density = make_histogram(edges_linear(0.0, 800.0, 32));
  s.scale = make_histogram(edges_log(16.0, 2048.0, 7));
  s.aspect = make_histogram(edges_log(0.05, 38.0, 24));

  std::map<std::string, std::size_t> per_image;
  for (const ImageInfo& img : ds.images) per_image[img.id] = 0;
  double scale_sum = 0.0;
  double angle_sum = 0.0;
  std::size_t convex = 0;
  for (const GroundTruthRecord& g : ds.gts) {
    ++per_image[g.image_id];
    const double scale = std::sqrt(geometry::shoelace_area(g.quad));
    s.scale.add(scale);
    scale_sum += scale;
    s.aspect.add(geometry::aspect_ratio(g.quad));
    if (geometry::is_convex(g.quad)) {
      angle_sum += geometry::interior_angle_std(g.quad);
      ++convex;
    } else {
      ++s.nonconvex;
    }
  }
  s.instances = ds.gts.size();
  s.images = per_image.size();

  double sum = 0.0;
  for (const auto& [id, n] : per_image) {
    s.density.add(static_cast<double>(n));
    sum += static_cast<double>(n);
  }
  if (s.images > 0) {
    s.density_mean = sum / static_cast<double>(s.images);
    double var = 0.0;
    for (const auto& [id, n] : per_image) {
      var += (static_cast<double>(n) - s.density_mean) * (static_cast<double>(n) - s.density_mean);
    }
    s.density_std = std::sqrt(var / static_cast<double>(s.images));
  }
  if (s.instances > 0) s.scale_mean = scale_sum / static_cast<double>(s.instances);
  if (convex > 0) s.mean_angle_std = angle_sum / static_cast<double>(convex);
  return s;
}

json quad_to_json(const QuadBox& q) { return q.flat(); }

json to_json(const deteval::EvalResult& r) {
  json out = {{"map", r.map},       {"ap50", r.ap50},     {"ap75", r.ap75},
              {"ar", r.ar},         {"num_gt", r.num_gt}, {"num_detections", r.num_detections}};
  for (const auto& [t, ap] : r.per_threshold_ap) {
    char key[16];
    std::snprintf(key, sizeof(key), "ap@%.2f", t);
    out[key] = ap;
  }
  return out;
}

json to_json(const DatasetStats& s) {
  return {{"images", s.images},
          {"instances", s.instances},
          {"density", histogram_json(s.density)},
          {"scale", histogram_json(s.scale)},
          {"aspect_ratio", histogram_json(s.aspect)},
          {"density_mean", s.density_mean},
          {"density_std", s.density_std},
          {"scale_mean", s.scale_mean},
          {"mean_interior_angle_std", s.mean_angle_std},
          {"nonconvex", s.nonconvex}};
}

json to_json(const assign::AssignmentTarget& t) {
  return {{"level", t.level},   {"grid_x", t.grid_x},   {"grid_y", t.grid_y},
          {"weight", t.weight}, {"offsets", t.offsets}, {"gt_index", t.gt_index}};
}

json to_json(const DetectionRecord& d) {
  return {{"image_id", d.image_id}, {"quad", quad_to_json(d.quad)}, {"score", d.score}};
}

}  // namespace unitail::io
