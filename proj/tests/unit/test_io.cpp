#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "homoflow/error.hpp"
#include "homoflow/image.hpp"
#include "homoflow/manifest.hpp"
#include "homoflow/parallel.hpp"
#include "homoflow/pipeline.hpp"
#include "homoflow/random.hpp"
#include "homoflow/track.hpp"

using namespace homoflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("homoflow_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GrayFrame byte_pattern(int w, int h) {
  GrayFrame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.at(x, y) = static_cast<float>((x * 7 + y * 13) % 256) / 255.0f;
  return f;
}

}  // namespace

TEST(Image, PngAndPgmRoundTrip) {
  const auto dir = scratch("img");
  const auto f = byte_pattern(17, 9);
  write_png(dir / "a.png", f);
  write_pgm(dir / "b.pgm", f);
  for (const auto& name : {"a.png", "b.pgm"}) {
    const auto g = read_frame(dir / name);
    ASSERT_EQ(g.width, 17);
    ASSERT_EQ(g.height, 9);
    for (std::size_t i = 0; i < f.pixels.size(); ++i) EXPECT_NEAR(g.pixels[i], f.pixels[i], 1e-6) << name;
  }
  EXPECT_EQ(list_frame_files(dir), (std::vector<fs::path>{dir / "a.png", dir / "b.pgm"}));
  std::ofstream(dir / "junk.png") << "not an image";
  EXPECT_THROW(read_frame(dir / "junk.png"), InvalidInput);
  EXPECT_THROW(read_frame(dir / "none.png"), InvalidInput);
  fs::remove_all(dir);
}

TEST(Image, RgbPngIsReadAsLuma) {
  const auto dir = scratch("rgb");
  RgbImage img(2, 1);
  img.px(0, 0)[0] = 255;  // pure red
  img.px(1, 0)[1] = 255;  // pure green
  write_png(dir / "c.png", img);
  const auto g = read_frame(dir / "c.png");
  EXPECT_NEAR(g.pixels[0], 0.299, 0.005);
  EXPECT_NEAR(g.pixels[1], 0.587, 0.005);
  fs::remove_all(dir);
}

TEST(Image, BilinearSample) {
  GrayFrame f(2, 2);
  f.pixels = {0.0f, 1.0f, 2.0f, 3.0f};
  EXPECT_DOUBLE_EQ(f.sample(0.5, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(f.sample(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(f.sample(-0.1, 0.0, 9.0), 9.0);
}

TEST(Image, DownsampleAreaAverages) {
  GrayFrame f(4, 4);
  for (int i = 0; i < 16; ++i) f.pixels[i] = static_cast<float>(i);
  const auto d = downsample_area(f, 2, 2);
  EXPECT_FLOAT_EQ(d.at(0, 0), (0 + 1 + 4 + 5) / 4.0f);
  EXPECT_FLOAT_EQ(d.at(1, 1), (10 + 11 + 14 + 15) / 4.0f);
  const auto e = downsample_area(f, 3, 3);
  double sum_f = 0, sum_e = 0;
  for (float v : f.pixels) sum_f += v;
  for (float v : e.pixels) sum_e += v;
  EXPECT_NEAR(sum_e / 9.0, sum_f / 16.0, 1e-5);
}

TEST(Image, WarpByTranslation) {
  const auto f = byte_pattern(10, 10);
  const auto w = warp_frame(f, Homography::translation(2, 1), 10, 10, -1.0);
  EXPECT_FLOAT_EQ(w.at(3, 4), f.at(5, 5));
  EXPECT_FLOAT_EQ(w.at(9, 9), -1.0f);
}

TEST(Track, JsonlRoundTripWithMissingEntries) {
  const auto dir = scratch("track");
  MotionTrack t;
  t.video_id = "clip_a";
  t.dn = 5;
  t.fps = 30;
  t.geometry = {64, 48};
  t.entries = {FourPointDelta::uniform({0.1, -0.2}), std::nullopt, FourPointDelta::uniform({1.0 / 3.0, 2.5})};
  write_track(dir / "a.jsonl", t);
  const auto back = read_track(dir / "a.jsonl");
  EXPECT_EQ(back.video_id, "clip_a");
  EXPECT_EQ(back.dn, 5);
  EXPECT_EQ(back.geometry, t.geometry);
  ASSERT_EQ(back.entries.size(), 3u);
  EXPECT_FALSE(back.entries[1].has_value());
  EXPECT_EQ(*back.entries[2], *t.entries[2]);
  EXPECT_EQ(back.present_count(), 2u);
  EXPECT_EQ(back.frame_count(), 8u);

  t.video_id = "clip_b";
  write_track(dir / "b.jsonl", t);
  const auto all = read_tracks(dir);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[1].video_id, "clip_b");

  std::ofstream(dir / "bad.jsonl") << "{\"video_id\": \"x\"}\n{\"n\": 0, \"duv\": [1, 2]}\n";
  EXPECT_THROW(read_track(dir / "bad.jsonl"), InvalidInput);
  fs::remove_all(dir);
}

TEST(Manifest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Manifest, FilesDirectoriesAndAtomicWrite) {
  const auto dir = scratch("manifest");
  write_file_atomic(dir / "x.txt", "abc");
  EXPECT_EQ(sha256_file(dir / "x.txt"), sha256_hex("abc"));
  EXPECT_FALSE(fs::exists(dir / "x.txt.tmp"));
  fs::create_directories(dir / "sub");
  write_file_atomic(dir / "sub" / "y.txt", "y");
  const auto h1 = sha256_path(dir);
  write_file_atomic(dir / "sub" / "y.txt", "z");
  EXPECT_NE(sha256_path(dir), h1);
  EXPECT_THROW(sha256_file(dir / "absent"), InvalidInput);

  RunManifest m;
  m.command = "homoflow test";
  m.seeds = {{"train", 3}};
  m.add_input(dir / "x.txt");
  m.outputs = {"out.json"};
  m.version = tool_version();
  m.wall_time_s = 1.0;
  const auto hash = m.content_hash();
  m.wall_time_s = 99.0;
  EXPECT_EQ(m.content_hash(), hash);
  m.seeds[0].second = 4;
  EXPECT_NE(m.content_hash(), hash);
  write_manifest(dir, m);
  const auto j = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  EXPECT_EQ(j["command"], "homoflow test");
  EXPECT_EQ(j["inputs"][0]["sha256"], sha256_hex("abc"));
  EXPECT_EQ(j["content_hash"], m.content_hash());
  fs::remove_all(dir);
}

TEST(Random, PortableAndSeeded) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  // First output of mt19937_64 with the default seed is fixed by the standard.
  EXPECT_EQ(Rng(5489).next(), 14514284786278117030ULL);
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.index(7), 7u);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(9, 3), derive_seed(9, 3));
}

TEST(Random, NormalMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Parallel, EverySlotOnceAndExceptionsPropagate) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw InvalidInput("seven");
               }),
               InvalidInput);
}

TEST(PipelineConfig, JsonRoundTripAndValidation) {
  PipelineConfig cfg;
  cfg.synth.videos = 4;
  cfg.train_videos = 2;
  cfg.train.epochs = 3;
  cfg.threads = 8;
  const auto text = pipeline_config_to_json(cfg);
  EXPECT_EQ(text.find("threads\": 8"), std::string::npos);
  const auto back = pipeline_config_from_json(text);
  EXPECT_EQ(pipeline_config_to_json(back), text);
  EXPECT_EQ(back.synth.videos, 4);
  EXPECT_THROW(pipeline_config_from_json("{\"bogus\": 1}"), InvalidInput);
  EXPECT_THROW(pipeline_config_from_json("not json"), InvalidInput);
  cfg.train_videos = 4;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  EXPECT_NE(describe_plan(PipelineConfig{}).find("train"), std::string::npos);
}
