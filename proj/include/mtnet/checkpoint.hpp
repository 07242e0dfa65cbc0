// Copyright 2026 The MTNet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <string>

#include "mtnet/config.hpp"
#include "mtnet/model.hpp"
#include "mtnet/nn.hpp"

namespace mtnet {

// Checkpoint container: 8-byte magic "MTCK0001", little-endian uint64 header
// length, JSON header (config echo plus a tensor directory of name, shape,
// and blob offset), then the raw float32 payload. Weights round-trip
// bit-exactly.

void save_checkpoint(const std::string& path, const Config& cfg,
                     const nn::StateList& state);

Config read_checkpoint_config(const std::string& path);

// Loads every tensor in `state` from the file. A tensor missing from the
// file, an unexpected extra tensor, or a shape mismatch (both shapes named)
// is an error. cfg_out, when given, receives the config echo.
void load_checkpoint(const std::string& path, nn::StateList& state,
                     Config* cfg_out = nullptr);

// Replaces only the backbone weights of `model` from a checkpoint trained in
// any mode. The checkpoint's backbone architecture must match; differing
// fields are listed. Heads keep their fresh initialization and nothing is
// frozen.
void load_pretrained_backbone(const std::string& path, Model& model);

}  // namespace mtnet
