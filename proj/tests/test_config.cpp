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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "mwpgen/config.hpp"
#include "mwpgen/error.hpp"

using namespace mwpgen;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kContract;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.model.embedding == 128);
  CHECK(c.model.hidden == 512);
  CHECK(c.model.latent == 128);
  CHECK(c.model.hops == 3);
  CHECK(c.train.loop.batch == 32);
  CHECK(c.train.loop.teacher_forcing == 0.5);
  CHECK(c.train.loop.kl_weight_max == 1.0);
  CHECK(c.decode.beam == 5);
  CHECK(c.decode.samples == 4);
}

TEST_CASE("config partial override and round trip") {
  const RunConfig c = parse_config(R"({"model": {"hidden": 64}, "train": {"lr": 0.01, "seed": 9},
                                       "synth": {"shapes": ["x+y=<m>; x=<d>y"], "all_variants": true}})");
  CHECK(c.model.hidden == 64);
  CHECK(c.model.embedding == 128);
  CHECK(c.train.loop.lr == 0.01);
  CHECK(c.train.loop.seed == 9);
  CHECK(c.synth.options.shapes == std::vector<std::string>{"x+y=<m>; x=<d>y"});
  CHECK(c.synth.options.all_variants);
  const std::string once = config_to_json(c);
  CHECK(config_to_json(parse_config(once)) == once);
}

TEST_CASE("config errors") {
  CHECK(code_of([] { parse_config("{\"model\": {\"hiden\": 3}}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"modle\": {}}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"model\": {\"hidden\": \"big\"}}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"model\": 3}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("[1, 2]"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{not json"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"model\": {\"hidden\": 0}}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"train\": {\"teacher_forcing\": 1.5}}"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config("{\"synth\": {\"dev_fraction\": 0.6, \"test_fraction\": 0.4}}"); }) ==
        ErrorCode::kConfig);
  CHECK(code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kIo);
}

TEST_CASE("shipped configs parse") {
  for (const char* name : {"default.json", "overfit.json"}) {
    CAPTURE(name);
    const RunConfig c = load_config(std::filesystem::path(MWPGEN_SOURCE_DIR) / "configs" / name);
    CHECK(c.train.loop.max_steps <= 2000);
  }
  const RunConfig d = load_config(std::filesystem::path(MWPGEN_SOURCE_DIR) / "configs" / "default.json");
  CHECK(config_to_json(d) == config_to_json(parse_config("{}")));
}
