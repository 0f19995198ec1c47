// Copyright 2026 The unitailkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "oracles.hpp"
#include "unitail/canonical_json.hpp"
#include "unitail/cli.hpp"
#include "unitail/dataset_io.hpp"

namespace unitail::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::string kCli = UNITAIL_CLI_PATH;
const std::string kData = UNITAIL_TEST_DATA;

std::pair<int, std::string> cli(const std::string& args) {
  return oracle::run_command(kCli + " " + args + " 2>/dev/null");
}

std::pair<int, std::string> cli_with_stderr(const std::string& args) {
  return oracle::run_command(kCli + " " + args + " 2>&1 1>/dev/null");
}

std::string micro_args() {
  return "--gt " + kData + "/micro_gt.json --det " + kData + "/micro_det.json";
}

void write_json(const fs::path& path, const json& v) { std::ofstream(path) << v.dump(); }

json rect(double x0, double y0, double x1, double y1) {
  return json::array({x0, y0, x1, y0, x1, y1, x0, y1});
}

TEST(Cli, EvalDetOnMicroFixture) {
  const auto [code, out] = cli("eval-det " + micro_args());
  ASSERT_EQ(code, kExitOk);
  const json r = json::parse(out);
  EXPECT_NEAR(r["map"].get<double>(), 0.378713, 1e-6);
  EXPECT_NEAR(r["ap50"].get<double>(), 84.25 / 101, 1e-6);
  EXPECT_NEAR(r["ap75"].get<double>(), 34.0 / 101, 1e-6);
  EXPECT_EQ(r["num_gt"], 3);
  EXPECT_EQ(r["num_detections"], 4);
  EXPECT_TRUE(r.contains("ap@0.95"));
}

TEST(Cli, EvalDetTableAndCross) {
  auto [code, out] = cli("eval-det --format table " + micro_args());
  ASSERT_EQ(code, kExitOk);
  EXPECT_NE(out.find("mAP"), std::string::npos);
  EXPECT_NE(out.find("0.378713"), std::string::npos);

  std::tie(code, out) = cli("eval-det " + micro_args() + " --cross-gt " + kData +
                            "/micro_gt.json --cross-det " + kData + "/micro_det.json");
  ASSERT_EQ(code, kExitOk);
  const json r = json::parse(out);
  EXPECT_NEAR(r["g_map"].get<double>(), r["map"].get<double>(), 1e-9);
  EXPECT_NEAR(r["cross_map"].get<double>(), r["map"].get<double>(), 1e-9);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("--help").first, kExitOk);
  EXPECT_EQ(cli("eval-det --help").first, kExitOk);
  EXPECT_EQ(cli("").first, kExitUsage);
  EXPECT_EQ(cli("no-such-command").first, kExitUsage);
  EXPECT_EQ(cli("eval-det --gt x.json").first, kExitUsage);
  EXPECT_EQ(cli("eval-det " + micro_args() + " --cross-gt a.json").first, kExitUsage);
  EXPECT_EQ(cli("eval-det " + micro_args() + " --format xml").first, kExitUsage);

  const auto [code, err] = cli_with_stderr("eval-det --gt /nonexistent/gt.json --det " + kData +
                                           "/micro_det.json");
  EXPECT_EQ(code, kExitData);
  EXPECT_NE(err.find("/nonexistent/gt.json"), std::string::npos) << err;
}

TEST(Cli, InProcessRunMatchesBinary) {
  const std::string gt = kData + "/micro_gt.json", det = kData + "/micro_det.json";
  const char* argv[] = {"unitail", "eval-det", "--gt", gt.c_str(), "--det", det.c_str()};
  std::ostringstream out, err;
  ASSERT_EQ(run(6, argv, out, err), kExitOk);
  EXPECT_EQ(out.str(), cli("eval-det " + micro_args()).second);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const std::string one = cli("--threads 1 eval-det " + micro_args()).second;
  EXPECT_EQ(one, cli("--threads 4 eval-det " + micro_args()).second);
  EXPECT_EQ(one, oracle::run_command("UNITAIL_THREADS=3 " + kCli + " eval-det " + micro_args()).second);
}

TEST(Cli, NmsAndStatsAndAssign) {
  const auto dir = oracle::scratch_dir("cli_misc");
  write_json(dir / "det.json",
             json::array({{{"image_id", "a"}, {"quad", rect(0, 0, 10, 10)}, {"score", 0.9}},
                          {{"image_id", "a"}, {"quad", rect(1, 0, 11, 10)}, {"score", 0.8}},
                          {{"image_id", "a"}, {"quad", rect(50, 50, 60, 60)}, {"score", 0.7}}}));
  auto [code, out] = cli("nms --det " + (dir / "det.json").string());
  ASSERT_EQ(code, kExitOk);
  EXPECT_EQ(json::parse(out)["detections"].size(), 2u);

  write_json(dir / "gt.json",
             {{"images", {{{"id", "a"}, {"width", 512}, {"height", 512}}}},
              {"annotations",
               {{{"image_id", "a"}, {"quad", rect(144, 144, 368, 368)}},
                {{"image_id", "a"}, {"quad", rect(0, 0, 4, 4)}}}}});
  std::tie(code, out) = cli("stats --gt " + (dir / "gt.json").string());
  ASSERT_EQ(code, kExitOk);
  json s = json::parse(out);
  EXPECT_EQ(s["instances"], 2);
  EXPECT_EQ(s["clamped_quads"], 0);

  std::tie(code, out) = cli("assign --gt " + (dir / "gt.json").string());
  ASSERT_EQ(code, kExitOk);
  const json a = json::parse(out);
  ASSERT_EQ(a["images"].size(), 1u);
  // The 4x4 box is ignored; the 224 box yields 16 targets on level 5.
  EXPECT_EQ(a["images"][0]["targets"].size(), 16u);
  for (const auto& t : a["images"][0]["targets"]) EXPECT_EQ(t["gt_index"], 0);
}

TEST(Cli, Rectify) {
  const auto dir = oracle::scratch_dir("cli_rectify");
  write_json(dir / "gt.json", {{"images", {{{"id", "a"}, {"width", 4}, {"height", 4}}}},
                               {"annotations", {{{"image_id", "a"}, {"quad", rect(0, 0, 4, 4)}}}}});
  std::vector<std::uint8_t> pixels(4 * 4 * 3, 200);
  io::write_binary_file(dir / "img.rgb", pixels);
  const std::string args = "rectify --gt " + (dir / "gt.json").string() +
                           " --image-id a --image " + (dir / "img.rgb").string() +
                           " --width 4 --height 4 --out-w 2 --out-h 2 --out-dir ";
  auto [code, out] = cli(args + (dir / "crops").string());
  EXPECT_EQ(code, kExitData);
  fs::create_directories(dir / "crops");
  std::tie(code, out) = cli(args + (dir / "crops").string());
  ASSERT_EQ(code, kExitOk);
  const json r = json::parse(out);
  ASSERT_EQ(r["crops"].size(), 1u);
  EXPECT_EQ(io::read_binary_file(r["crops"][0]["path"].get<std::string>()).size(), 12u);
}

TEST(Cli, TextEvaluation) {
  const auto dir = oracle::scratch_dir("cli_text");
  write_json(dir / "gt.json",
             {{"split", "query"},
              {"products",
               {{{"product_id", "p1"},
                 {"category_id", "c1"},
                 {"regions",
                  {{{"quad", rect(0, 0, 10, 5)}, {"legible", true}, {"transcription", "cream"}},
                   {{"quad", rect(20, 0, 30, 5)}, {"legible", true}, {"transcription", "120mg"}}}}}}}});
  write_json(dir / "det.json",
             {{"products", {{{"product_id", "p1"}, {"quads", {rect(0, 0, 10, 5)}}}}}});
  auto [code, out] = cli("eval-text-det --gt " + (dir / "gt.json").string() + " --pred " +
                         (dir / "det.json").string());
  ASSERT_EQ(code, kExitOk);
  json r = json::parse(out);
  EXPECT_DOUBLE_EQ(r["precision"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r["recall"].get<double>(), 0.5);

  write_json(dir / "rec.json",
             {{"products", {{{"product_id", "p1"}, {"transcriptions", {"crea", "120mg"}}}}}});
  std::ofstream(dir / "vocab.txt") << "cream\n120mg\n";
  const std::string base = "eval-text-rec --gt " + (dir / "gt.json").string() + " --pred " +
                           (dir / "rec.json").string();
  std::tie(code, out) = cli(base);
  ASSERT_EQ(code, kExitOk);
  r = json::parse(out);
  EXPECT_DOUBLE_EQ(r["word_accuracy"].get<double>(), 0.5);
  EXPECT_NEAR(r["ned"].get<double>(), 0.1, 1e-6);
  std::tie(code, out) = cli(base + " --vocab " + (dir / "vocab.txt").string());
  r = json::parse(out);
  EXPECT_DOUBLE_EQ(r["word_accuracy"].get<double>(), 1.0);
}

TEST(Cli, MatchAndTune) {
  const auto dir = oracle::scratch_dir("cli_match");
  io::FeatureFile text, visual;
  text.dim = 4;
  visual.dim = 3;
  json gallery = {{"split", "gallery"}, {"products", json::array()}};
  json query = {{"split", "query"}, {"products", json::array()}};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> e(3, 0.0);
    e[static_cast<std::size_t>(k)] = 1.0;
    const std::string id = "p" + std::to_string(k);
    text.records.push_back({id, {{{1.0 * k, 1, 0, 0}, 0.5, 0.5}}});
    visual.records.push_back({id, {{e, 0, 0}}});
    const json product = {{"product_id", id},
                          {"category_id", "c" + std::to_string(k)},
                          {"regions", json::array()}};
    gallery["products"].push_back(product);
    query["products"].push_back(product);
  }
  io::save_feature_file(dir / "text.bin", text);
  io::save_feature_file(dir / "visual.bin", visual);
  write_json(dir / "gallery.json", gallery);
  write_json(dir / "query.json", query);
  const std::string inputs = " --gallery-text " + (dir / "text.bin").string() +
                             " --gallery-visual " + (dir / "visual.bin").string() +
                             " --gallery-labels " + (dir / "gallery.json").string() +
                             " --query-text " + (dir / "text.bin").string() +
                             " --query-visual " + (dir / "visual.bin").string();
  auto [code, out] = cli("match" + inputs + " --query-labels " + (dir / "query.json").string());
  ASSERT_EQ(code, kExitOk);
  json r = json::parse(out);
  EXPECT_DOUBLE_EQ(r["top1_accuracy"].get<double>(), 1.0);
  EXPECT_EQ(r["matches"].size(), 3u);

  std::tie(code, out) = cli("match" + inputs);
  ASSERT_EQ(code, kExitOk);
  EXPECT_FALSE(json::parse(out).contains("top1_accuracy"));

  EXPECT_EQ(cli("tune" + inputs).first, kExitUsage);
  std::tie(code, out) = cli("tune" + inputs + " --query-labels " + (dir / "query.json").string() +
                            " --t-grid 0.1 0 --w-grid 0.5");
  ASSERT_EQ(code, kExitOk);
  r = json::parse(out);
  EXPECT_DOUBLE_EQ(r["t"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(r["w"].get<double>(), 0.5);
}

}  // namespace
}  // namespace unitail::cli
