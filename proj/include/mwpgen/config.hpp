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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwpgen/corpus.hpp"
#include "mwpgen/model.hpp"
#include "mwpgen/pipeline.hpp"

namespace mwpgen {

/// Everything a command needs, loaded from one JSON document:
///
///   {"paths":  {"data_dir", "cskg", "templates", "checkpoint"},
///    "model":  {"embedding", "hidden", "latent", "hops", "share_encoders", "init_std"},
///    "train":  {"batch", "teacher_forcing", "kl_ramp_fraction", "kl_weight_max", "lr", "max_steps", "seed",
///               "eval_every", "patience", "clip_norm", "bpe_merges", "max_len"},
///    "decode": {"beam", "max_len", "samples"},
///    "synth":  {"count", "dev_fraction", "test_fraction", "seed", "coef_min", "coef_max",
///               "solution_min", "solution_max", "shapes", "topics", "all_variants"}}
///
/// Missing keys keep their defaults; unknown keys raise ConfigError.
struct RunConfig {
  struct Paths {
    std::filesystem::path data_dir = "data/synth";
    std::filesystem::path cskg = "data/cskg.tsv";
    std::filesystem::path templates = "data/templates.jsonl";
    std::filesystem::path checkpoint = "runs/model";
  } paths;
  gen::ModelConfig model;
  struct Train {
    pipeline::TrainConfig loop;
    int bpe_merges = 500;
    int max_len = 100;
  } train;
  struct Decode {
    int beam = 5;
    int max_len = 100;
    int samples = 4;
  } decode;
  struct Synth {
    int count = 1000;
    double dev_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 1;
    corpus::SynthOptions options;
  } synth;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);
/// Checks ranges (positive dims, fractions in [0, 1], ...).
void validate(const RunConfig& config);

}  // namespace mwpgen
