// Copyright 2026 The mwpgen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>

#include "mwpgen/tensor.hpp"

namespace mwpgen::nn {

// Checkpoint = <stem>.json manifest + <stem>.bin blob.
//
// The manifest is UTF-8 JSON:
//   {"format": "mwpgen-params-v1", "blob": "<stem>.bin",
//    "params": {"<name>": {"shape": [rows, cols], "offset": bytes, "length": bytes}, ...}}
// The blob holds every parameter, row-major, as little-endian IEEE-754 float64,
// in store order.

void save_checkpoint(const ParameterStore& params, const std::filesystem::path& manifest_path);

/// Overwrites values of parameters already present in the store; every
/// store parameter must appear in the manifest with a matching shape.
void load_checkpoint(ParameterStore& params, const std::filesystem::path& manifest_path);

}  // namespace mwpgen::nn
