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

#include <cstring>
#include <fstream>

#include "dsin/autodiff.h"
#include "dsin/base.h"
#include "dsin/codec.h"
#include "dsin/range_coder.h"
#include "dsin/si_finder.h"
#include "dsin/si_net.h"
#include "dsin/tensor.h"

namespace dsin {
namespace {

constexpr char kMagic[4] = {'D', 'S', 'I', 'N'};
constexpr uint64_t kVersion = 1;

void AppendU64Le(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t ReadU64Le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string SerializeHeader(const DsinHeader& h) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  AppendU64Le(&out, h.version);
  AppendU64Le(&out, h.image_h);
  AppendU64Le(&out, h.image_w);
  AppendU64Le(&out, h.latent_h);
  AppendU64Le(&out, h.latent_w);
  AppendU64Le(&out, h.latent_c);
  AppendU64Le(&out, h.num_centers);
  out.append(reinterpret_cast<const char*>(h.model_hash.data()),
             h.model_hash.size());
  AppendU64Le(&out, h.payload_bytes);
  DSIN_CHECK(out.size() == kDsinHeaderBytes, "container: bad header size");
  return out;
}

DsinHeader ParseHeader(const uint8_t* data, size_t len, const std::string& path) {
  if (len < kDsinHeaderBytes || std::memcmp(data, kMagic, sizeof(kMagic)) != 0) {
    throw CorruptStreamError("not a compressed-image container: " + path);
  }
  DsinHeader h;
  size_t off = sizeof(kMagic);
  auto u64 = [&]() {
    const uint64_t v = ReadU64Le(data + off);
    off += 8;
    return v;
  };
  h.version = u64();
  if (h.version != kVersion) {
    throw CorruptStreamError("unsupported container version " +
                             std::to_string(h.version) + " in " + path);
  }
  h.image_h = u64();
  h.image_w = u64();
  h.latent_h = u64();
  h.latent_w = u64();
  h.latent_c = u64();
  h.num_centers = u64();
  std::memcpy(h.model_hash.data(), data + off, h.model_hash.size());
  off += h.model_hash.size();
  h.payload_bytes = u64();
  return h;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DSIN_REQUIRE(in.good(), "cannot open file: " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

SymbolCodec CodecFor(const ModelBundle& model) {
  const EntropyModel em = EntropyModelFrom(model.codec, model.params);
  std::vector<std::vector<double>> dists(em.channels);
  for (int ch = 0; ch < em.channels; ++ch) dists[ch] = em.ChannelProbs(ch);
  return SymbolCodec(dists, model.codec.prob_floor);
}

std::vector<int> ChannelIds(const LatentGrid& grid) {
  std::vector<int> ids(grid.Count());
  const int64_t plane = static_cast<int64_t>(grid.h) * grid.w;
  for (int64_t i = 0; i < grid.Count(); ++i) {
    ids[i] = static_cast<int>(i / plane);
  }
  return ids;
}

}  // namespace

CompressResult CompressFile(const ModelBundle& model,
                            const Sha256Digest& model_hash, const ImageF& x,
                            const std::string& out_path) {
  const LatentGrid grid = EncodeImage(model.codec, model.params, x);
  const SymbolCodec codec = CodecFor(model);
  const std::vector<uint8_t> payload =
      codec.EncodeSymbols(grid.symbols, ChannelIds(grid));

  DsinHeader h;
  h.image_h = static_cast<uint64_t>(grid.orig_h);
  h.image_w = static_cast<uint64_t>(grid.orig_w);
  h.latent_h = static_cast<uint64_t>(grid.h);
  h.latent_w = static_cast<uint64_t>(grid.w);
  h.latent_c = static_cast<uint64_t>(grid.c);
  h.num_centers = static_cast<uint64_t>(model.codec.num_centers);
  h.model_hash = model_hash;
  h.payload_bytes = payload.size();

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot write container: " + out_path);
  const std::string header = SerializeHeader(h);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  out.flush();
  DSIN_CHECK(out.good(), "short write to container: " + out_path);

  CompressResult res;
  res.payload_bytes = payload.size();
  res.file_bytes = kDsinHeaderBytes + payload.size();
  res.bits_estimated =
      Rate(grid, EntropyModelFrom(model.codec, model.params)).bits;
  const double pixels = static_cast<double>(grid.orig_h) * grid.orig_w;
  res.bpp_estimated = res.bits_estimated / pixels;
  res.bpp_coded = 8.0 * res.file_bytes / pixels;
  return res;
}

DecompressResult DecompressFile(const ModelBundle& model,
                                const Sha256Digest& expected_hash,
                                const std::string& in_path, const ImageF* si) {
  const std::vector<uint8_t> blob = ReadFileBytes(in_path);
  const DsinHeader h = ParseHeader(blob.data(), blob.size(), in_path);
  if (h.model_hash != expected_hash) {
    throw DomainError(
        "container was written by a different model than the one provided: " +
        in_path);
  }
  if (h.payload_bytes != blob.size() - kDsinHeaderBytes) {
    throw CorruptStreamError("container payload length mismatch: " + in_path);
  }
  const CodecConfig& cfg = model.codec;
  if (h.latent_c != static_cast<uint64_t>(cfg.latent_channels) ||
      h.num_centers != static_cast<uint64_t>(cfg.num_centers) ||
      h.image_h == 0 || h.image_w == 0 ||
      h.latent_h * cfg.downsample_factor < h.image_h ||
      h.latent_w * cfg.downsample_factor < h.image_w) {
    throw CorruptStreamError("container header is inconsistent: " + in_path);
  }

  LatentGrid grid;
  grid.c = static_cast<int>(h.latent_c);
  grid.h = static_cast<int>(h.latent_h);
  grid.w = static_cast<int>(h.latent_w);
  grid.orig_h = static_cast<int>(h.image_h);
  grid.orig_w = static_cast<int>(h.image_w);

  const SymbolCodec codec = CodecFor(model);
  const std::vector<int> ids = ChannelIds(grid);
  const std::vector<uint8_t> payload(blob.begin() + kDsinHeaderBytes, blob.end());
  grid.symbols = codec.DecodeSymbols(payload, ids);

  const std::vector<double> centers = CentersFrom(model.params);
  grid.values.resize(grid.symbols.size());
  for (size_t i = 0; i < grid.symbols.size(); ++i) {
    const int s = grid.symbols[i];
    if (s < 0 || s >= static_cast<int>(centers.size())) {
      throw CorruptStreamError("container symbol out of range: " + in_path);
    }
    grid.values[i] = centers[s];
  }

  DecompressResult res;
  res.x_dec = DecodeImage(cfg, model.params, grid);
  res.bpp_coded = 8.0 * blob.size() /
                  (static_cast<double>(grid.orig_h) * grid.orig_w);

  if (si == nullptr) {
    res.image = res.x_dec;
    return res;
  }

  DSIN_REQUIRE(si->c == 3, "side image must have 3 channels");
  // Match against the side image as the codec would have decoded it, so
  // both search inputs carry the same kind of compression artifacts; the
  // mosaic itself copies from the pristine side image.
  const LatentGrid si_grid = EncodeImage(cfg, model.params, *si);
  const ImageF y_dec = DecodeImage(cfg, model.params, si_grid);
  const PatchAssignment f = FindAssignment(res.x_dec, y_dec, model.matcher);
  const ImageF y_syn = AssembleYsyn(*si, f);

  ad::NoGradGuard guard;
  ad::Var fused =
      SiNetFuse(model.si_net, model.params, ad::Constant(FromImage(res.x_dec)),
                ad::Constant(FromImage(y_syn)));
  res.image = ClampUnit(ToImage(fused->value));
  return res;
}

DsinHeader ReadDsinHeader(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DSIN_REQUIRE(in.good(), "cannot open file: " + path);
  std::vector<uint8_t> head(kDsinHeaderBytes);
  in.read(reinterpret_cast<char*>(head.data()),
          static_cast<std::streamsize>(head.size()));
  if (in.gcount() != static_cast<std::streamsize>(head.size())) {
    throw CorruptStreamError("not a compressed-image container: " + path);
  }
  return ParseHeader(head.data(), head.size(), path);
}

}  // namespace dsin
