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

// JSON conversions for the model config sections, shared between the run
// config loader and the checkpoint container. Not part of the public API.

#ifndef DSIN_INTERNAL_CONFIG_JSON_H_
#define DSIN_INTERNAL_CONFIG_JSON_H_

#include "dsin/run_config.h"
#include "json.hpp"

namespace dsin::internal {

nlohmann::json ToJson(const CodecConfig& c);
nlohmann::json ToJson(const SiNetConfig& c);
nlohmann::json ToJson(const MatcherConfig& c);

void FromJson(const nlohmann::json& j, CodecConfig* c);
void FromJson(const nlohmann::json& j, SiNetConfig* c);
void FromJson(const nlohmann::json& j, MatcherConfig* c);

}  // namespace dsin::internal

#endif  // DSIN_INTERNAL_CONFIG_JSON_H_
