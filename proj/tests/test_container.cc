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

#include "dsin/container.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dsin/base.h"
#include "dsin/codec.h"
#include "dsin/rng.h"
#include "test_util.h"

namespace dsin {
namespace {

ModelBundle SmallModel(uint64_t seed) {
  CodecConfig codec;
  codec.downsample_factor = 4;
  codec.latent_channels = 2;
  codec.num_centers = 6;
  codec.base_width = 4;
  SiNetConfig si_net;
  si_net.width = 3;
  si_net.dilations = {1, 2};
  MatcherConfig matcher;
  matcher.patch_h = 8;
  matcher.patch_w = 8;
  matcher.search_stride = 2;
  return MakeModel(codec, si_net, matcher, seed);
}

Sha256Digest FakeHash(uint8_t fill) {
  Sha256Digest d;
  d.fill(fill);
  return d;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "dsin_container_test") {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string File(const std::string& name) const {
    return (path / name).string();
  }
};

std::vector<uint8_t> ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

void WriteAll(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

TEST_CASE("container round trip matches the direct codec path") {
  Rng rng(41);
  const ModelBundle model = SmallModel(7);
  const ImageF x = testutil::RandImage(13, 18, 3, rng);
  const Sha256Digest hash = FakeHash(0xAB);
  TempDir dir;
  const std::string path = dir.File("x.dsin");

  const CompressResult res = CompressFile(model, hash, x, path);
  CHECK(res.file_bytes == kDsinHeaderBytes + res.payload_bytes);
  CHECK(res.file_bytes == std::filesystem::file_size(path));
  CHECK(res.bpp_coded ==
        doctest::Approx(8.0 * res.file_bytes / (13.0 * 18.0)).epsilon(1e-12));
  CHECK(res.bpp_estimated ==
        doctest::Approx(res.bits_estimated / (13.0 * 18.0)).epsilon(1e-12));

  const DecompressResult dec = DecompressFile(model, hash, path, nullptr);
  const ImageF direct =
      DecodeImage(model.codec, model.params,
                  EncodeImage(model.codec, model.params, x));
  CHECK(dec.x_dec.h == 13);
  CHECK(dec.x_dec.w == 18);
  CHECK(dec.x_dec.data == direct.data);
  CHECK(dec.image.data == dec.x_dec.data);
  CHECK(dec.bpp_coded == doctest::Approx(res.bpp_coded).epsilon(1e-12));
}

TEST_CASE("container header survives the file round trip") {
  Rng rng(42);
  const ModelBundle model = SmallModel(7);
  const ImageF x = testutil::RandImage(13, 18, 3, rng);
  const Sha256Digest hash = FakeHash(0x5C);
  TempDir dir;
  const std::string path = dir.File("x.dsin");
  const CompressResult res = CompressFile(model, hash, x, path);

  const LatentGrid grid = EncodeImage(model.codec, model.params, x);
  const DsinHeader h = ReadDsinHeader(path);
  CHECK(h.version == 1);
  CHECK(h.image_h == 13);
  CHECK(h.image_w == 18);
  CHECK(h.latent_h == static_cast<uint64_t>(grid.h));
  CHECK(h.latent_w == static_cast<uint64_t>(grid.w));
  CHECK(h.latent_c == 2);
  CHECK(h.num_centers == 6);
  CHECK(h.model_hash == hash);
  CHECK(h.payload_bytes == res.payload_bytes);
}

TEST_CASE("decompression refuses a model hash mismatch") {
  Rng rng(43);
  const ModelBundle model = SmallModel(7);
  const ImageF x = testutil::RandImage(16, 16, 3, rng);
  TempDir dir;
  const std::string path = dir.File("x.dsin");
  CompressFile(model, FakeHash(0x01), x, path);
  CHECK_THROWS_AS(DecompressFile(model, FakeHash(0x02), path, nullptr),
                  DomainError);
}

TEST_CASE("corrupted containers are rejected") {
  Rng rng(44);
  const ModelBundle model = SmallModel(7);
  const ImageF x = testutil::RandImage(16, 16, 3, rng);
  const Sha256Digest hash = FakeHash(0x7E);
  TempDir dir;
  const std::string path = dir.File("x.dsin");
  CompressFile(model, hash, x, path);
  const std::vector<uint8_t> good = ReadAll(path);

  SUBCASE("bad magic") {
    std::vector<uint8_t> bad = good;
    bad[0] ^= 0xFF;
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
    CHECK_THROWS_AS(ReadDsinHeader(dir.File("bad.dsin")), CorruptStreamError);
  }
  SUBCASE("bad version") {
    std::vector<uint8_t> bad = good;
    bad[4] = 9;
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
  }
  SUBCASE("truncated to half") {
    std::vector<uint8_t> bad(good.begin(), good.begin() + good.size() / 2);
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
  }
  SUBCASE("truncated inside the header") {
    std::vector<uint8_t> bad(good.begin(),
                             good.begin() + kDsinHeaderBytes - 1);
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
    CHECK_THROWS_AS(ReadDsinHeader(dir.File("bad.dsin")), CorruptStreamError);
  }
  SUBCASE("payload shorter than the header says") {
    std::vector<uint8_t> bad(good.begin(), good.end() - 1);
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
  }
  SUBCASE("trailing garbage") {
    std::vector<uint8_t> bad = good;
    bad.push_back(0x00);
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
  }
  SUBCASE("latent channel count disagrees with the model") {
    std::vector<uint8_t> bad = good;
    bad[4 + 8 * 4] = 99;  // latent_c field
    WriteAll(dir.File("bad.dsin"), bad);
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("bad.dsin"), nullptr),
                    CorruptStreamError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(DecompressFile(model, hash, dir.File("nope.dsin"), nullptr),
                    DomainError);
    CHECK_THROWS_AS(ReadDsinHeader(dir.File("nope.dsin")), DomainError);
  }
}

TEST_CASE("side-information decode fuses through the refinement net") {
  Rng rng(45);
  ModelBundle model = SmallModel(7);
  const ImageF x = testutil::RandImage(24, 32, 3, rng);
  const ImageF y = Roll(x, 2, 3);
  const Sha256Digest hash = FakeHash(0x11);
  TempDir dir;
  const std::string path = dir.File("x.dsin");
  CompressFile(model, hash, x, path);

  SUBCASE("freshly initialized refinement is exactly the identity") {
    const DecompressResult dec = DecompressFile(model, hash, path, &y);
    CHECK(dec.image.h == 24);
    CHECK(dec.image.w == 32);
    CHECK(dec.image.c == 3);
    CHECK(dec.image.data == dec.x_dec.data);
  }
  SUBCASE("a perturbed head changes the fusion but stays in range") {
    ad::Var head_b = model.params.Get("si.head.b");
    for (double& v : head_b->value.v) v = 0.25;
    const DecompressResult dec = DecompressFile(model, hash, path, &y);
    CHECK(dec.image.data != dec.x_dec.data);
    for (double v : dec.image.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("side image must be three-channel") {
    const ImageF grey = Luma(y);
    CHECK_THROWS_AS(DecompressFile(model, hash, path, &grey), DomainError);
  }
}

}  // namespace
}  // namespace dsin
