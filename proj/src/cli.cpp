// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "unitail/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "unitail/assignment.hpp"
#include "unitail/canonical_json.hpp"
#include "unitail/dataset_io.hpp"
#include "unitail/detection_eval.hpp"
#include "unitail/error.hpp"
#include "unitail/geometry.hpp"
#include "unitail/matching.hpp"
#include "unitail/parallel.hpp"
#include "unitail/text_eval.hpp"
#include "unitail/warp.hpp"

namespace unitail::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown for flag combinations CLI11 cannot express; maps to kExitUsage.
class UsageError : public Error {
  using Error::Error;
};

struct EvalDetFlags {
  std::string gt, det, cross_gt, cross_det;
  std::vector<double> iou_thresholds;
  std::size_t max_dets = 400;
  double ignore_overlap = 0.5;
  std::string format = "json";
};

struct TextDetFlags {
  std::string gt, pred;
  double iou = 0.5;
};

struct TextRecFlags {
  std::string gt, pred, vocab;
  std::string ned_norm = "max";
};

struct MatchFlags {
  std::string gallery_text, gallery_visual, gallery_labels;
  std::string query_text, query_visual, query_labels;
  double t = 0.0;
  double w = 0.0;
  bool normalize_text = false;
  std::vector<double> t_grid, w_grid;
};

struct AssignFlags {
  std::string gt, image_id;
  double alpha = 0.3;
  int min_level = 3, max_level = 7, l_org = 5;
};

struct NmsFlags {
  std::string det;
  double iou = 0.5;
};

struct RectifyFlags {
  std::string gt, image_id, image, out_dir;
  int width = 0, height = 0, out_w = 0, out_h = 0;
};

unsigned thread_count(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("UNITAIL_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0') throw UsageError("UNITAIL_THREADS must be a non-negative integer");
    return static_cast<unsigned>(v);
  }
  return 0;  // machine parallelism
}

std::vector<double> default_grid(int steps, double step) {
  std::vector<double> g;
  for (int i = 0; i <= steps; ++i) g.push_back(i * step);
  return g;
}

// ---------------------------------------------------------------- eval-det

deteval::EvalResult eval_one(const std::string& gt_path, const std::string& det_path,
                             const deteval::EvalParams& params) {
  const io::DetDataset ds = io::load_det_annotations(gt_path);
  const std::vector<deteval::DetectionRecord> dets = io::load_detections(det_path);
  for (const auto& d : dets) {
    if (ds.find_image(d.image_id) == nullptr) {
      throw InputError(det_path + ": detection on unknown image '" + d.image_id + "'");
    }
  }
  return deteval::evaluate(dets, ds.gts, ds.ignore_regions, params);
}

void print_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) out << k << std::string(width - k.size() + 2, ' ') << v << "\n";
}

int eval_det(const EvalDetFlags& f, unsigned threads, std::ostream& out) {
  deteval::EvalParams params;
  params.iou_thresholds = f.iou_thresholds;
  params.max_detections = f.max_dets;
  params.ignore_overlap = f.ignore_overlap;
  params.threads = threads;
  const deteval::EvalResult origin = eval_one(f.gt, f.det, params);
  json result = io::to_json(origin);
  if (!f.cross_gt.empty()) {
    const deteval::EvalResult cross = eval_one(f.cross_gt, f.cross_det, params);
    result["cross_map"] = cross.map;
    result["g_map"] = deteval::g_map(origin.map, cross.map);
  }
  if (f.format == "table") {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"mAP", io::format_number(origin.map)},
        {"AP50", io::format_number(origin.ap50)},
        {"AP75", io::format_number(origin.ap75)},
        {"AR", io::format_number(origin.ar)}};
    for (const auto& [t, ap] : origin.per_threshold_ap) {
      char key[16];
      std::snprintf(key, sizeof(key), "AP@%.2f", t);
      rows.emplace_back(key, io::format_number(ap));
    }
    if (result.contains("g_map")) {
      rows.emplace_back("cross mAP", io::format_number(result["cross_map"].get<double>()));
      rows.emplace_back("g-mAP", io::format_number(result["g_map"].get<double>()));
    }
    rows.emplace_back("ground truths", std::to_string(origin.num_gt));
    rows.emplace_back("detections", std::to_string(origin.num_detections));
    print_table(out, rows);
  } else {
    out << io::dump_canonical(result);
  }
  return kExitOk;
}

// ------------------------------------------------------------- text tasks

const io::OcrProduct* find_product(const io::OcrDataset& ds, const std::string& id) {
  for (const auto& p : ds.products) {
    if (p.product_id == id) return &p;
  }
  return nullptr;
}

template <typename Map>
void check_known_products(const io::OcrDataset& ds, const Map& preds, const std::string& path) {
  for (const auto& [id, unused] : preds) {
    if (find_product(ds, id) == nullptr) {
      throw InputError(path + ": prediction for unknown product '" + id + "'");
    }
  }
}

int eval_text_det(const TextDetFlags& f, std::ostream& out) {
  const io::OcrDataset ds = io::load_ocr_dataset(f.gt);
  const auto preds = io::load_text_det_predictions(f.pred);
  check_known_products(ds, preds, f.pred);
  text::DetCounts total;
  for (const auto& p : ds.products) {
    const auto it = preds.find(p.product_id);
    const std::vector<geometry::QuadBox> none;
    total += text::text_det_counts(it == preds.end() ? none : it->second, p.regions, f.iou);
  }
  const text::Prf prf = text::prf_from_counts(total);
  out << io::dump_canonical({{"precision", prf.precision},
                             {"recall", prf.recall},
                             {"hmean", prf.hmean},
                             {"matched", total.matched},
                             {"care_predictions", total.care_predictions},
                             {"care_gts", total.care_gts}});
  return kExitOk;
}

int eval_text_rec(const TextRecFlags& f, std::ostream& out) {
  const io::OcrDataset ds = io::load_ocr_dataset(f.gt);
  const auto preds = io::load_text_rec_predictions(f.pred);
  check_known_products(ds, preds, f.pred);
  std::optional<text::Vocabulary> vocab;
  if (!f.vocab.empty()) vocab = io::load_vocabulary(f.vocab);

  std::vector<text::TranscriptionPair> pairs;
  for (const auto& p : ds.products) {
    std::vector<std::string> gts;
    for (const auto& r : p.regions) {
      if (r.legible) gts.push_back(r.transcription);
    }
    const auto it = preds.find(p.product_id);
    if (it == preds.end()) {
      if (gts.empty()) continue;
      throw InputError(f.pred + ": no transcriptions for product '" + p.product_id + "'");
    }
    if (it->second.size() != gts.size()) {
      throw InputError(f.pred + ": product '" + p.product_id + "' has " +
                       std::to_string(it->second.size()) + " transcriptions for " +
                       std::to_string(gts.size()) + " legible regions");
    }
    for (std::size_t i = 0; i < gts.size(); ++i) {
      std::string pred = it->second[i];
      if (vocab) pred = text::vocab_correct(pred, *vocab);
      pairs.emplace_back(std::move(pred), gts[i]);
    }
  }
  const auto norm = f.ned_norm == "gt" ? text::NedNorm::kGroundTruthLength : text::NedNorm::kMaxLength;
  out << io::dump_canonical({{"ned", text::ned(pairs, norm)},
                             {"word_accuracy", text::word_accuracy(pairs)},
                             {"num_words", pairs.size()},
                             {"vocabulary_corrected", vocab.has_value()}});
  return kExitOk;
}

// ---------------------------------------------------------- match / tune

struct MatchInputs {
  std::optional<matching::Gallery> gallery;
  std::vector<matching::QueryRecord> queries;
  bool labelled = false;
};

std::map<std::string, std::string> categories_of(const std::string& path, io::Split expected) {
  const io::OcrDataset ds = io::load_ocr_dataset(path);
  if (ds.split != expected) {
    throw InputError(path + ": expected a " +
                     std::string(expected == io::Split::kGallery ? "gallery" : "query") + " split");
  }
  std::map<std::string, std::string> out;
  for (const auto& p : ds.products) out[p.product_id] = p.category_id;
  return out;
}

MatchInputs load_match_inputs(const MatchFlags& f) {
  MatchInputs in;
  const auto gallery_cats = categories_of(f.gallery_labels, io::Split::kGallery);
  auto gallery_feats = io::load_features(f.gallery_text, f.gallery_visual);
  std::vector<matching::GalleryEntry> entries;
  for (auto& [id, feats] : gallery_feats) {
    const auto it = gallery_cats.find(id);
    if (it == gallery_cats.end()) {
      throw InputError(f.gallery_labels + ": no category for gallery product '" + id + "'");
    }
    entries.push_back({it->second, std::move(feats.visual), matching::add_pe(feats.texts)});
  }
  if (entries.size() != gallery_cats.size()) {
    throw InputError(f.gallery_text + ": features missing for some labelled gallery products");
  }
  in.gallery.emplace(std::move(entries));

  std::map<std::string, std::string> query_cats;
  if (!f.query_labels.empty()) {
    query_cats = categories_of(f.query_labels, io::Split::kQuery);
    in.labelled = true;
  }
  auto query_feats = io::load_features(f.query_text, f.query_visual);
  for (auto& [id, feats] : query_feats) {
    std::string truth;
    if (in.labelled) {
      const auto it = query_cats.find(id);
      if (it == query_cats.end()) {
        throw InputError(f.query_labels + ": no category for query product '" + id + "'");
      }
      truth = it->second;
    }
    in.queries.push_back({id, std::move(feats.visual), matching::add_pe(feats.texts), truth});
  }
  return in;
}

int match(const MatchFlags& f, unsigned threads, std::ostream& out) {
  const MatchInputs in = load_match_inputs(f);
  const matching::MatchConfig cfg{f.t, f.w, f.normalize_text};
  std::vector<std::string> chosen(in.queries.size());
  parallel_for(in.queries.size(), threads, [&](std::size_t i) {
    chosen[i] = matching::match_product(in.queries[i], *in.gallery, cfg);
  });
  json matches = json::array();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < in.queries.size(); ++i) {
    json m = {{"query_id", in.queries[i].query_id}, {"category_id", chosen[i]}};
    if (in.labelled) {
      m["truth"] = in.queries[i].truth;
      hits += chosen[i] == in.queries[i].truth ? 1 : 0;
    }
    matches.push_back(std::move(m));
  }
  json result = {{"matches", matches}, {"t", f.t}, {"w", f.w}};
  if (in.labelled) {
    result["top1_accuracy"] =
        in.queries.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(in.queries.size());
  }
  out << io::dump_canonical(result);
  return kExitOk;
}

int tune(const MatchFlags& f, unsigned threads, std::ostream& out) {
  const MatchInputs in = load_match_inputs(f);
  const std::vector<double> ts = f.t_grid.empty() ? default_grid(20, 0.01) : f.t_grid;
  const std::vector<double> ws = f.w_grid.empty() ? default_grid(10, 0.1) : f.w_grid;
  const matching::TuneResult best =
      matching::tune_params(in.queries, *in.gallery, ts, ws, f.normalize_text, threads);
  out << io::dump_canonical({{"t", best.t}, {"w", best.w}, {"top1_accuracy", best.accuracy}});
  return kExitOk;
}

// ----------------------------------------------------------------- misc

int stats(const std::string& gt, std::ostream& out) {
  const io::DetDataset ds = io::load_det_annotations(gt);
  json result = io::to_json(io::compute_stats(ds));
  result["clamped_quads"] = ds.clamped_quads;
  out << io::dump_canonical(result);
  return kExitOk;
}

int assign_cmd(const AssignFlags& f, unsigned threads, std::ostream& out) {
  const io::DetDataset ds = io::load_det_annotations(f.gt);
  if (!f.image_id.empty() && ds.find_image(f.image_id) == nullptr) {
    throw InputError(f.gt + ": unknown image id '" + f.image_id + "'");
  }
  assign::AssignParams params;
  params.pyramid.min_level = f.min_level;
  params.pyramid.max_level = f.max_level;
  params.pyramid.reference_level = f.l_org;
  params.shrink_ratio = f.alpha;
  params.threads = threads;

  std::vector<io::ImageInfo> images = ds.images;
  std::sort(images.begin(), images.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  json result = json::array();
  for (const io::ImageInfo& img : images) {
    if (!f.image_id.empty() && img.id != f.image_id) continue;
    // Ignored gts do not produce targets; gt_index is reported as the
    // annotation's position in the input file.
    std::vector<geometry::QuadBox> quads;
    std::vector<std::size_t> source;
    for (std::size_t i = 0; i < ds.gts.size(); ++i) {
      if (ds.gts[i].image_id == img.id && !ds.gts[i].ignore) {
        quads.push_back(ds.gts[i].quad);
        source.push_back(i);
      }
    }
    json targets = json::array();
    for (const auto& t : assign::assign_targets(quads, img.width, img.height, params)) {
      json j = io::to_json(t);
      j["gt_index"] = source[static_cast<std::size_t>(t.gt_index)];
      targets.push_back(std::move(j));
    }
    result.push_back({{"image_id", img.id}, {"targets", std::move(targets)}});
  }
  out << io::dump_canonical({{"images", result}});
  return kExitOk;
}

int nms(const NmsFlags& f, std::ostream& out) {
  const auto dets = io::load_detections(f.det);
  json kept = json::array();
  for (const auto& d : deteval::quad_nms(dets, f.iou)) kept.push_back(io::to_json(d));
  out << io::dump_canonical({{"detections", kept}});
  return kExitOk;
}

int rectify(const RectifyFlags& f, std::ostream& out) {
  if (!fs::is_directory(f.out_dir)) throw IoError("output directory " + f.out_dir + " does not exist");
  const io::DetDataset ds = io::load_det_annotations(f.gt);
  if (ds.find_image(f.image_id) == nullptr) {
    throw InputError(f.gt + ": unknown image id '" + f.image_id + "'");
  }
  const std::vector<std::uint8_t> pixels = io::read_binary_file(f.image);
  json crops = json::array();
  std::size_t k = 0;
  for (std::size_t i = 0; i < ds.gts.size(); ++i) {
    if (ds.gts[i].image_id != f.image_id) continue;
    const geometry::Homography h = geometry::rectify_homography(ds.gts[i].quad, f.out_w, f.out_h);
    const geometry::RgbImage crop =
        geometry::warp_image(pixels, f.width, f.height, h, f.out_w, f.out_h);
    const fs::path file = fs::path(f.out_dir) / (f.image_id + "_" + std::to_string(k++) + ".rgb");
    io::write_binary_file(file, crop.pixels);
    crops.push_back({{"gt_index", i}, {"path", file.string()}, {"width", crop.width},
                     {"height", crop.height}});
  }
  out << io::dump_canonical({{"crops", crops}});
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadrilateral detection, OCR evaluation and product matching tools", "unitail"};
  app.require_subcommand(1);
  std::optional<unsigned> threads_flag;
  app.add_option("--threads", threads_flag,
                 "Worker threads; 0 = machine parallelism (env UNITAIL_THREADS)");

  EvalDetFlags ed;
  auto* eval_det_cmd = app.add_subcommand("eval-det", "COCO-style mAP of quad detections");
  eval_det_cmd->add_option("--gt", ed.gt, "Annotation JSON")->required();
  eval_det_cmd->add_option("--det", ed.det, "Detections JSON")->required();
  auto* cross_gt = eval_det_cmd->add_option("--cross-gt", ed.cross_gt, "Cross-domain annotations");
  auto* cross_det = eval_det_cmd->add_option("--cross-det", ed.cross_det, "Cross-domain detections");
  cross_gt->needs(cross_det);
  cross_det->needs(cross_gt);
  eval_det_cmd->add_option("--iou-thresholds", ed.iou_thresholds, "IoU thresholds (default COCO)")
      ->check(CLI::Range(0.0, 1.0));
  eval_det_cmd->add_option("--max-dets", ed.max_dets, "Detections kept per image")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_det_cmd->add_option("--ignore-overlap", ed.ignore_overlap,
                           "Overlap with an ignore region that drops a detection")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval_det_cmd->add_option("--format", ed.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  TextDetFlags td;
  auto* text_det_cmd = app.add_subcommand("eval-text-det", "Text detection precision/recall/hmean");
  text_det_cmd->add_option("--gt", td.gt, "OCR annotation JSON")->required();
  text_det_cmd->add_option("--pred", td.pred, "Predicted text quads JSON")->required();
  text_det_cmd->add_option("--iou", td.iou, "Match threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  TextRecFlags tr;
  auto* text_rec_cmd = app.add_subcommand("eval-text-rec", "Word accuracy and NED");
  text_rec_cmd->add_option("--gt", tr.gt, "OCR annotation JSON")->required();
  text_rec_cmd->add_option("--pred", tr.pred, "Predicted transcriptions JSON")->required();
  text_rec_cmd->add_option("--vocab", tr.vocab, "Vocabulary for nearest-word correction");
  text_rec_cmd->add_option("--ned-norm", tr.ned_norm, "NED denominator: max or gt")
      ->check(CLI::IsMember({"max", "gt"}))
      ->capture_default_str();

  MatchFlags mf;
  auto add_match_inputs = [&mf](CLI::App* cmd, bool query_labels_required) {
    cmd->add_option("--gallery-text", mf.gallery_text, "Gallery word features")->required();
    cmd->add_option("--gallery-visual", mf.gallery_visual, "Gallery visual features")->required();
    cmd->add_option("--gallery-labels", mf.gallery_labels, "Gallery OCR JSON")->required();
    cmd->add_option("--query-text", mf.query_text, "Query word features")->required();
    cmd->add_option("--query-visual", mf.query_visual, "Query visual features")->required();
    auto* labels = cmd->add_option("--query-labels", mf.query_labels, "Query OCR JSON");
    if (query_labels_required) labels->required();
    cmd->add_flag("--normalize-text", mf.normalize_text, "Divide text similarity by min(n, m)");
  };
  auto* match_cmd = app.add_subcommand("match", "Match queries against a gallery");
  add_match_inputs(match_cmd, false);
  match_cmd->add_option("--t", mf.t, "Visual gap threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  match_cmd->add_option("--w", mf.w, "Text weight")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  auto* tune_cmd = app.add_subcommand("tune", "Grid search for t and w");
  add_match_inputs(tune_cmd, true);
  tune_cmd->add_option("--t-grid", mf.t_grid, "Values of t (default 0:0.01:0.2)")
      ->check(CLI::NonNegativeNumber);
  tune_cmd->add_option("--w-grid", mf.w_grid, "Values of w (default 0:0.1:1)")
      ->check(CLI::Range(0.0, 1.0));

  std::string stats_gt;
  auto* stats_cmd = app.add_subcommand("stats", "Instance density, scale and shape statistics");
  stats_cmd->add_option("--gt", stats_gt, "Annotation JSON")->required();

  AssignFlags af;
  auto* assign_cmd_app = app.add_subcommand("assign", "Dump training targets");
  assign_cmd_app->add_option("--gt", af.gt, "Annotation JSON")->required();
  assign_cmd_app->add_option("--image-id", af.image_id, "Restrict to one image");
  assign_cmd_app->add_option("--alpha", af.alpha, "Shrink ratio")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  assign_cmd_app->add_option("--min-level", af.min_level)->capture_default_str();
  assign_cmd_app->add_option("--max-level", af.max_level)->capture_default_str();
  assign_cmd_app->add_option("--l-org", af.l_org, "Level of pretraining-size objects")
      ->capture_default_str();

  NmsFlags nf;
  auto* nms_cmd = app.add_subcommand("nms", "Per-image quad NMS");
  nms_cmd->add_option("--det", nf.det, "Detections JSON")->required();
  nms_cmd->add_option("--iou", nf.iou, "Suppression threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  RectifyFlags rf;
  auto* rectify_cmd = app.add_subcommand("rectify", "Warp annotated quads to upright crops");
  rectify_cmd->add_option("--gt", rf.gt, "Annotation JSON")->required();
  rectify_cmd->add_option("--image-id", rf.image_id, "Image to crop from")->required();
  rectify_cmd->add_option("--image", rf.image, "Raw interleaved RGB8 pixels")->required();
  rectify_cmd->add_option("--width", rf.width)->required()->check(CLI::PositiveNumber);
  rectify_cmd->add_option("--height", rf.height)->required()->check(CLI::PositiveNumber);
  rectify_cmd->add_option("--out-w", rf.out_w)->required()->check(CLI::PositiveNumber);
  rectify_cmd->add_option("--out-h", rf.out_h)->required()->check(CLI::PositiveNumber);
  rectify_cmd->add_option("--out-dir", rf.out_dir, "Existing directory for crops")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (nf.iou <= 0.0 || nf.iou >= 1.0) {
      if (*nms_cmd) throw UsageError("--iou must lie strictly between 0 and 1");
    }
    if (*assign_cmd_app) {
      assign::PyramidSpec spec{af.min_level, af.max_level, af.l_org, 224.0};
      try {
        spec.validate();
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
    }
    const unsigned threads = thread_count(threads_flag);
    if (*eval_det_cmd) return eval_det(ed, threads, out);
    if (*text_det_cmd) return eval_text_det(td, out);
    if (*text_rec_cmd) return eval_text_rec(tr, out);
    if (*match_cmd) return match(mf, threads, out);
    if (*tune_cmd) return tune(mf, threads, out);
    if (*stats_cmd) return stats(stats_gt, out);
    if (*assign_cmd_app) return assign_cmd(af, threads, out);
    if (*nms_cmd) return nms(nf, out);
    if (*rectify_cmd) return rectify(rf, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace unitail::cli
