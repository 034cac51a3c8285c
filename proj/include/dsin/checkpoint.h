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

// Self-describing model container: a JSON header with every config and the
// parameter table, followed by raw little-endian doubles. The SHA-256 of
// the file ties compressed bitstreams to the exact model that wrote them.

#ifndef DSIN_CHECKPOINT_H_
#define DSIN_CHECKPOINT_H_

#include <map>
#include <string>

#include "dsin/autodiff.h"
#include "dsin/codec.h"
#include "dsin/sha256.h"
#include "dsin/si_finder.h"
#include "dsin/si_net.h"

namespace dsin {

struct Checkpoint {
  CodecConfig codec;
  SiNetConfig si_net;
  MatcherConfig matcher;
  std::map<std::string, Tensor> params;
};

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

// Whole-file digest used by the bitstream header.
Sha256Digest CheckpointHash(const std::string& path);

// All model parameters (codec + fusion) in one store, freshly initialized
// from the seed.
struct ModelBundle {
  CodecConfig codec;
  SiNetConfig si_net;
  MatcherConfig matcher;
  ad::ParamStore params;
};

ModelBundle MakeModel(const CodecConfig& codec, const SiNetConfig& si_net,
                      const MatcherConfig& matcher, uint64_t seed);
ModelBundle ModelFromCheckpoint(const Checkpoint& ckpt);
Checkpoint ToCheckpoint(const ModelBundle& model);

// Throws if the checkpoint was built for a different architecture than the
// given configs, naming the section that drifted. Only the sections that
// carry learned parameters are compared; the patch search is parameter-free
// and may legitimately differ between runs of the same weights.
void RequireSameArchitecture(const Checkpoint& ckpt, const CodecConfig& codec,
                             const SiNetConfig& si_net);

}  // namespace dsin

#endif  // DSIN_CHECKPOINT_H_
