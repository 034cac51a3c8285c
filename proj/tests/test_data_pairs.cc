// Copyright (c) the DSIN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dsin/data_pairs.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "dsin/base.h"
#include "dsin/metrics.h"
#include "dsin/rng.h"
#include "dsin/si_finder.h"
#include "test_util.h"

namespace dsin {
namespace {

struct TempTree {
  std::filesystem::path root;
  explicit TempTree(const std::string& name)
      : root(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
  }
  ~TempTree() { std::filesystem::remove_all(root); }
  std::string Path(const std::string& rel) const {
    return (root / rel).string();
  }
};

void WriteTinyPng(const std::string& path, int c, int salt) {
  ImageU8 img(4, 4, c);
  for (size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = static_cast<uint8_t>((i * 7 + salt) % 256);
  }
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  WritePng(path, img);
}

void MakeScene(const TempTree& tree, const std::string& scene, int frames) {
  for (int t = 0; t < frames; ++t) {
    WriteTinyPng(tree.Path(scene + "/left/" + std::to_string(t) + ".png"), 3,
                 t);
    WriteTinyPng(tree.Path(scene + "/right/" + std::to_string(t) + ".png"), 3,
                 t + 100);
  }
}

TEST_CASE("frame scan finds numbered frames and ignores junk") {
  TempTree tree("dsin_data_scan_test");
  MakeScene(tree, "scene_a", 3);
  WriteTinyPng(tree.Path("scene_a/left/junk.png"), 3, 1);
  WriteTinyPng(tree.Path("scene_a/left/5a.png"), 3, 1);
  std::ofstream(tree.Path("scene_a/left/0.txt")) << "not a frame";
  WriteTinyPng(tree.Path("scene_b/left/7.png"), 3, 1);

  const std::vector<SceneFrames> scenes = ScanFrames(tree.root.string());
  REQUIRE(scenes.size() == 2);
  CHECK(scenes[0].scene == "scene_a");
  CHECK(scenes[0].left.size() == 3);
  CHECK(scenes[0].right.size() == 3);
  CHECK(scenes[0].left.count(0) == 1);
  CHECK(scenes[1].scene == "scene_b");
  CHECK(scenes[1].left.size() == 1);
  CHECK(scenes[1].left.at(7) == tree.Path("scene_b/left/7.png"));
  CHECK(scenes[1].right.empty());

  CHECK_THROWS_AS(ScanFrames(tree.Path("missing_root")), DomainError);
}

TEST_CASE("pair enumeration matches the closed-form counts") {
  TempTree tree("dsin_data_pairs_test");
  MakeScene(tree, "scene_a", 21);
  const std::vector<SceneFrames> scenes = ScanFrames(tree.root.string());
  PairSpec spec;

  SUBCASE("stereo pairs every frame with its counterpart") {
    spec.mode = "stereo";
    const std::vector<PairRecord> pairs = BuildPairs(scenes, spec, nullptr);
    REQUIRE(pairs.size() == 21);
    CHECK(pairs[0].x_path == tree.Path("scene_a/left/0.png"));
    CHECK(pairs[0].y_path == tree.Path("scene_a/right/0.png"));
    CHECK(pairs[0].mode == "stereo");
    CHECK(pairs[0].k == 0);
  }
  SUBCASE("a fixed time offset loses the tail frames") {
    spec.mode = "general";
    spec.time_offset = 3;
    std::vector<std::string> log;
    const std::vector<PairRecord> pairs = BuildPairs(scenes, spec, &log);
    CHECK(pairs.size() == 21 - 3);
    CHECK(log.size() == 3);  // left frames 18, 19, 20 have no t+3
    CHECK(pairs[0].x_path == tree.Path("scene_a/left/0.png"));
    CHECK(pairs[0].y_path == tree.Path("scene_a/right/3.png"));
    CHECK(pairs[0].k == 3);
  }
  SUBCASE("offset zero runs all three gaps") {
    spec.mode = "general";
    spec.time_offset = 0;
    const std::vector<PairRecord> pairs = BuildPairs(scenes, spec, nullptr);
    CHECK(pairs.size() == 20 + 19 + 18);
    CHECK(pairs[0].k == 1);
    CHECK(pairs[1].k == 2);
    CHECK(pairs[2].k == 3);
    CHECK(pairs[0].x_path == pairs[2].x_path);  // same left frame, k varies
  }
  SUBCASE("missing counterpart frames are skipped with a log line") {
    std::filesystem::remove(tree.Path("scene_a/right/5.png"));
    const std::vector<SceneFrames> rescanned = ScanFrames(tree.root.string());
    spec.mode = "stereo";
    std::vector<std::string> log;
    const std::vector<PairRecord> pairs = BuildPairs(rescanned, spec, &log);
    CHECK(pairs.size() == 20);
    REQUIRE(log.size() == 1);
    CHECK(log[0].find("scene_a") != std::string::npos);
    CHECK(log[0].find("5") != std::string::npos);
  }
  SUBCASE("synthetic mode has no file index") {
    spec.mode = "synthetic";
    CHECK_THROWS_AS(BuildPairs(scenes, spec, nullptr), DomainError);
  }
}

TEST_CASE("manifests round trip and reject malformed rows") {
  TempTree tree("dsin_data_manifest_test");
  const std::string path = tree.Path("pairs.tsv");
  const std::vector<PairRecord> pairs = {
      {"a/left/0.png", "a/right/0.png", "stereo", 0},
      {"a/left/0.png", "a/right/2.png", "general", 2},
      {"gen/x_000.png", "gen/y_000.png", "synthetic", 0},
  };
  WriteManifest(path, pairs);
  CHECK(ReadManifest(path) == pairs);

  auto write_lines = [&](const std::string& text) {
    std::ofstream out(tree.Path("bad.tsv"), std::ios::trunc);
    out << text;
  };
  write_lines("a.png\tb.png\tstereo\n");
  CHECK_THROWS_AS(ReadManifest(tree.Path("bad.tsv")), DomainError);
  write_lines("a.png\tb.png\tstereo\tx\n");
  CHECK_THROWS_AS(ReadManifest(tree.Path("bad.tsv")), DomainError);
  write_lines("a.png\tb.png\tdiagonal\t0\n");
  CHECK_THROWS_AS(ReadManifest(tree.Path("bad.tsv")), DomainError);
  write_lines("\tb.png\tstereo\t0\n");
  CHECK_THROWS_AS(ReadManifest(tree.Path("bad.tsv")), DomainError);
  CHECK_THROWS_AS(ReadManifest(tree.Path("nope.tsv")), DomainError);
}

TEST_CASE("pair images load against the data root") {
  TempTree tree("dsin_data_load_test");
  WriteTinyPng(tree.Path("s/left/0.png"), 3, 1);
  WriteTinyPng(tree.Path("s/right/0.png"), 1, 2);  // grayscale side image
  const std::vector<PairRecord> pairs = {
      {"s/left/0.png", "s/right/0.png", "stereo", 0}};

  const auto loaded = LoadPairImages(pairs, tree.root.string());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].first.c == 3);
  CHECK(loaded[0].first.h == 4);
  CHECK(loaded[0].second.c == 3);  // replicated from grey
  CHECK(loaded[0].second.At(0, 1, 2) == loaded[0].second.At(2, 1, 2));
  CHECK(loaded[0].first.At(0, 0, 0) ==
        doctest::Approx(1.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("base images are reproducible, bounded and channel-correlated") {
  const ImageF a = MakeBaseImage(48, 64, 9);
  const ImageF b = MakeBaseImage(48, 64, 9);
  const ImageF c = MakeBaseImage(48, 64, 10);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);

  double mn = 1.0, mx = 0.0;
  for (double v : a.data) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mn >= 0.1);
  CHECK(mx <= 0.9);
  CHECK(mx - mn > 0.25);  // actual structure, not a flat field

  auto plane = [&](int ch) {
    ImageF p(a.h, a.w, 1);
    std::copy(a.Plane(ch), a.Plane(ch) + size_t(a.h) * a.w, p.data.begin());
    return p;
  };
  CHECK(PearsonPatchCorr(plane(0), plane(1)) > 0.5);
  CHECK(PearsonPatchCorr(plane(1), plane(2)) > 0.5);
}

TEST_CASE("synthetic pairs honor the requested correlation band") {
  const ImageF base = MakeBaseImage(64, 96, 3);
  PairSpec spec;
  spec.translation_px = 4.0;
  spec.affine_jitter = 0.0;
  spec.photometric_gain = 0.1;
  spec.photometric_bias = 0.05;
  spec.occlusion_fraction = 0.05;
  spec.noise_sigma = 0.05;

  for (double center : {0.3, 0.6, 0.9}) {
    spec.corr_lo = center - 0.05;
    spec.corr_hi = center + 0.05;
    const SynthPair sp = MakeSynthPair(base, spec, 17);
    CHECK(sp.achieved_correlation >= spec.corr_lo);
    CHECK(sp.achieved_correlation <= spec.corr_hi);
    CHECK(sp.x.data == base.data);

    // Re-derive the self-report: undo the translation and re-measure.
    const ImageF aligned = Roll(sp.y, -sp.dy, -sp.dx);
    CHECK(AvgPatchPearson(sp.x, aligned, kCorrPatch, kCorrPatch) ==
          doctest::Approx(sp.achieved_correlation).epsilon(1e-12));
  }
}

TEST_CASE("zero perturbation reproduces the base exactly") {
  const ImageF base = MakeBaseImage(32, 40, 5);
  PairSpec spec;
  spec.translation_px = 0.0;
  spec.affine_jitter = 0.0;
  spec.photometric_gain = 0.0;
  spec.photometric_bias = 0.0;
  spec.occlusion_fraction = 0.0;
  spec.noise_sigma = 0.0;
  spec.corr_lo = 0.5;
  spec.corr_hi = 1.0;

  const SynthPair sp = MakeSynthPair(base, spec, 3);
  CHECK(sp.y.data == base.data);
  CHECK(sp.dy == 0);
  CHECK(sp.dx == 0);
  CHECK(sp.noise_sigma == 0.0);
  CHECK(sp.achieved_correlation == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pure translation is a cyclic shift the matcher can undo") {
  const ImageF base = MakeBaseImage(40, 48, 6);
  PairSpec spec;
  spec.translation_px = 8.0;
  spec.affine_jitter = 0.0;
  spec.photometric_gain = 0.0;
  spec.photometric_bias = 0.0;
  spec.occlusion_fraction = 0.0;
  spec.noise_sigma = 0.0;
  spec.corr_lo = 0.5;
  spec.corr_hi = 1.0;

  const SynthPair sp = MakeSynthPair(base, spec, 11);
  CHECK(sp.y.data == Roll(base, sp.dy, sp.dx).data);
  CHECK(sp.achieved_correlation == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synthetic pairs are seed-reproducible") {
  const ImageF base = MakeBaseImage(48, 64, 21);
  PairSpec spec;
  spec.translation_px = 5.0;
  spec.photometric_gain = 0.1;
  spec.photometric_bias = 0.05;
  spec.occlusion_fraction = 0.05;
  spec.noise_sigma = 0.05;
  spec.corr_lo = 0.55;
  spec.corr_hi = 0.75;

  const SynthPair a = MakeSynthPair(base, spec, 42);
  const SynthPair b = MakeSynthPair(base, spec, 42);
  CHECK(a.y.data == b.y.data);
  CHECK(a.achieved_correlation == b.achieved_correlation);
  CHECK(a.dy == b.dy);
  CHECK(a.dx == b.dx);

  const SynthPair c = MakeSynthPair(base, spec, 43);
  CHECK(a.y.data != c.y.data);
}

TEST_CASE("an unreachable band raises a domain error") {
  ImageF flat(32, 32, 3);
  for (double& v : flat.data) v = 0.5;
  PairSpec spec;
  spec.corr_lo = 0.85;
  spec.corr_hi = 0.95;
  CHECK_THROWS_AS(MakeSynthPair(flat, spec, 1), DomainError);
}

}  // namespace
}  // namespace dsin
