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

// Layout: "DSCK" | u64 version | u64 header_len | JSON header | raw values.
// The header lists configs and the parameter table (name, shape) in sorted
// name order; values follow as little-endian doubles in that same order.

#include "dsin/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "dsin/base.h"
#include "dsin/internal/config_json.h"
#include "dsin/rng.h"
#include "json.hpp"

namespace dsin {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'D', 'S', 'C', 'K'};
constexpr uint64_t kVersion = 1;

void AppendU64Le(std::string* out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

uint64_t ReadU64Le(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  ckpt.codec.Validate();
  ckpt.si_net.Validate();
  ckpt.matcher.Validate();

  json table = json::array();
  for (const auto& [name, tensor] : ckpt.params) {
    DSIN_REQUIRE(!name.empty(), "checkpoint parameter with empty name");
    table.push_back(json{{"name", name}, {"shape", tensor.shape}});
  }
  json header{{"codec", internal::ToJson(ckpt.codec)},
              {"si_net", internal::ToJson(ckpt.si_net)},
              {"matcher", internal::ToJson(ckpt.matcher)},
              {"params", table}};
  const std::string header_text = header.dump();

  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  AppendU64Le(&blob, kVersion);
  AppendU64Le(&blob, header_text.size());
  blob += header_text;
  for (const auto& [name, tensor] : ckpt.params) {
    (void)name;
    for (double d : tensor.v) AppendU64Le(&blob, std::bit_cast<uint64_t>(d));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  DSIN_REQUIRE(out.good(), "cannot write checkpoint file: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  out.flush();
  DSIN_CHECK(out.good(), "short write to checkpoint file: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DSIN_REQUIRE(in.good(), "cannot open checkpoint file: " + path);
  std::vector<uint8_t> blob((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());

  if (blob.size() < sizeof(kMagic) + 16 ||
      std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptStreamError("not a checkpoint file: " + path);
  }
  const uint64_t version = ReadU64Le(blob.data() + 4);
  if (version != kVersion) {
    throw CorruptStreamError("unsupported checkpoint version " +
                             std::to_string(version) + " in " + path);
  }
  const uint64_t header_len = ReadU64Le(blob.data() + 12);
  const size_t header_off = sizeof(kMagic) + 16;
  if (header_len > blob.size() - header_off) {
    throw CorruptStreamError("checkpoint header is truncated: " + path);
  }

  json header;
  try {
    header = json::parse(blob.begin() + static_cast<ptrdiff_t>(header_off),
                         blob.begin() + static_cast<ptrdiff_t>(header_off + header_len));
  } catch (const json::exception& e) {
    throw CorruptStreamError(std::string("checkpoint header is not valid JSON: ") +
                             e.what());
  }

  Checkpoint ckpt;
  try {
    internal::FromJson(header.at("codec"), &ckpt.codec);
    internal::FromJson(header.at("si_net"), &ckpt.si_net);
    internal::FromJson(header.at("matcher"), &ckpt.matcher);

    size_t off = header_off + header_len;
    for (const auto& entry : header.at("params")) {
      const std::string name = entry.at("name").get<std::string>();
      Tensor t;
      t.shape = entry.at("shape").get<std::vector<int>>();
      const int64_t n = Tensor::NumEl(t.shape);
      if (blob.size() - off < static_cast<size_t>(n) * 8) {
        throw CorruptStreamError("checkpoint values are truncated: " + path);
      }
      t.v.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) {
        t.v[static_cast<size_t>(i)] = std::bit_cast<double>(ReadU64Le(blob.data() + off));
        off += 8;
      }
      DSIN_REQUIRE(ckpt.params.emplace(name, std::move(t)).second,
                   "duplicate parameter '" + name + "' in checkpoint");
    }
    if (off != blob.size()) {
      throw CorruptStreamError("checkpoint has trailing bytes: " + path);
    }
  } catch (const json::exception& e) {
    throw CorruptStreamError(std::string("checkpoint header is malformed: ") + e.what());
  }
  ckpt.codec.Validate();
  ckpt.si_net.Validate();
  ckpt.matcher.Validate();
  return ckpt;
}

Sha256Digest CheckpointHash(const std::string& path) { return Sha256File(path); }

ModelBundle MakeModel(const CodecConfig& codec, const SiNetConfig& si_net,
                      const MatcherConfig& matcher, uint64_t seed) {
  codec.Validate();
  si_net.Validate();
  matcher.Validate();
  ModelBundle model;
  model.codec = codec;
  model.si_net = si_net;
  model.matcher = matcher;
  Rng rng(Rng::Mix(seed, 0x6d6f64656c));
  InitCodecParams(codec, model.params, rng);
  InitSiNetParams(si_net, model.params, rng);
  return model;
}

ModelBundle ModelFromCheckpoint(const Checkpoint& ckpt) {
  ModelBundle model = MakeModel(ckpt.codec, ckpt.si_net, ckpt.matcher, 0);
  model.params.Load(ckpt.params);
  return model;
}

Checkpoint ToCheckpoint(const ModelBundle& model) {
  Checkpoint ckpt;
  ckpt.codec = model.codec;
  ckpt.si_net = model.si_net;
  ckpt.matcher = model.matcher;
  ckpt.params = model.params.Snapshot();
  return ckpt;
}

void RequireSameArchitecture(const Checkpoint& ckpt, const CodecConfig& codec,
                             const SiNetConfig& si_net) {
  DSIN_REQUIRE(internal::ToJson(ckpt.codec) == internal::ToJson(codec),
               "checkpoint codec config does not match the run config");
  DSIN_REQUIRE(internal::ToJson(ckpt.si_net) == internal::ToJson(si_net),
               "checkpoint si_net config does not match the run config");
}

}  // namespace dsin
