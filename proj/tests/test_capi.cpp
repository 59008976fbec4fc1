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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mwpgen.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = MWPGEN_DATA_DIR;
const std::string kCli = MWPGEN_CLI;

std::string take(char* s) {
  std::string out = s ? s : "";
  mwpgen_string_free(s);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mwpgen_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json tiny_config(const fs::path& dir) {
  return {{"paths",
           {{"data_dir", (dir / "data").string()},
            {"cskg", kData + "/cskg.tsv"},
            {"templates", kData + "/templates.jsonl"},
            {"checkpoint", (dir / "model").string()}}},
          {"model", {{"embedding", 6}, {"hidden", 8}, {"latent", 4}, {"hops", 1}}},
          {"train", {{"max_steps", 0}, {"bpe_merges", 20}}},
          {"synth", {{"count", 30}, {"seed", 3}}}};
}

int run(const std::string& args) {
  const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("capi: status names and solve") {
  CHECK(std::string(mwpgen_status_name(MWPGEN_OK)) == "Ok");
  CHECK(std::string(mwpgen_status_name(MWPGEN_ERR_CONSTRAINT_VIOLATION)) == "ConstraintViolation");
  CHECK(std::string(mwpgen_status_name(MWPGEN_ERR_CONFIG)) == "ConfigError");
  char* out = nullptr;
  REQUIRE(mwpgen_solve("x+y=27; 2x+4y=86", &out) == MWPGEN_OK);
  const json j = json::parse(take(out));
  CHECK(j["x"] == "11");
  CHECK(j["y"] == "16");
  CHECK(j["positive"] == true);
  out = nullptr;
  CHECK(mwpgen_solve("-2x-3y=5; x+y=1", &out) == MWPGEN_ERR_CONSTRAINT_VIOLATION);
  CHECK(out == nullptr);
  CHECK(std::string(mwpgen_last_error()).find("ConstraintViolation") != std::string::npos);
  CHECK(mwpgen_solve(nullptr, &out) == MWPGEN_ERR_CONTRACT);
  CHECK(mwpgen_config_normalize("{\"bogus\": 1}", &out) == MWPGEN_ERR_CONFIG);
}

TEST_CASE("capi: synth is reproducible and reports errors with the path") {
  const auto dir = scratch("synth");
  json c = tiny_config(dir);
  char* out = nullptr;
  REQUIRE(mwpgen_synth(c.dump().c_str(), &out) == MWPGEN_OK);
  const json summary = json::parse(take(out));
  CHECK(summary["count"] == 30);
  CHECK(summary["train"].get<int>() + summary["dev"].get<int>() + summary["test"].get<int>() == 30);
  const std::string first = slurp(dir / "data" / "train.jsonl");
  REQUIRE(mwpgen_synth(c.dump().c_str(), &out) == MWPGEN_OK);
  take(out);
  CHECK(slurp(dir / "data" / "train.jsonl") == first);

  c["paths"]["templates"] = (dir / "missing.jsonl").string();
  CHECK(mwpgen_synth(c.dump().c_str(), &out) == MWPGEN_ERR_IO);
  CHECK(std::string(mwpgen_last_error()).find("missing.jsonl") != std::string::npos);
}

TEST_CASE("capi: zero-step training writes an initial checkpoint that generates") {
  const auto dir = scratch("train");
  const json c = tiny_config(dir);
  char* out = nullptr;
  REQUIRE(mwpgen_synth(c.dump().c_str(), &out) == MWPGEN_OK);
  take(out);
  REQUIRE(mwpgen_train(c.dump().c_str(), nullptr, nullptr, &out) == MWPGEN_OK);
  CHECK(json::parse(take(out))["steps"] == 0);
  CHECK(fs::exists(dir / "model" / "last" / "model.json"));

  mwpgen_model* model = nullptr;
  REQUIRE(mwpgen_model_load((dir / "model").string().c_str(), &model) == MWPGEN_OK);
  REQUIRE(mwpgen_generate(model, "y-x=6; 8y-4x=64", "rowing boat", "small boat", "big boat", 4, 5, 3, 12, &out) ==
          MWPGEN_OK);
  const std::string a = take(out);
  const json j = json::parse(a);
  CHECK(j["outputs"].size() == 4);
  CHECK(j["solution"]["x"] == "4");
  REQUIRE(mwpgen_generate(model, "y-x=6; 8y-4x=64", "rowing boat", "small boat", "big boat", 4, 5, 3, 12, &out) ==
          MWPGEN_OK);
  CHECK(take(out) == a);
  CHECK(mwpgen_generate(model, "x+y=1; 2x+2y=2", "rowing boat", "small boat", "big boat", 4, 5, 3, 12, &out) ==
        MWPGEN_ERR_SINGULAR_SYSTEM);
  CHECK(mwpgen_generate(model, "x+y=5; x-y=1", "space", "small boat", "big boat", 4, 5, 3, 12, &out) ==
        MWPGEN_ERR_TOPIC_NOT_FOUND);
  mwpgen_model_free(model);
  CHECK(mwpgen_model_load((dir / "nothing").string().c_str(), &model) == MWPGEN_ERR_IO);
}

TEST_CASE("capi: evaluate") {
  const auto dir = scratch("eval");
  write(dir / "ref.jsonl", "{\"text\": \"the cat sat on the mat\"}\n{\"text\": \"a dog ran\"}\n");
  write(dir / "short.jsonl", "{\"text\": \"the cat sat on the mat\"}\n");
  write(dir / "four.jsonl", "{\"samples\": [\"a b c d\", \"a b c d\", \"a b c d\", \"a b c d\"]}\n"
                            "{\"samples\": [\"x y\", \"x y\", \"x y\", \"x y\"]}\n");
  char* out = nullptr;
  const auto ref = (dir / "ref.jsonl").string();
  REQUIRE(mwpgen_evaluate(ref.c_str(), ref.c_str(), &out) == MWPGEN_OK);
  json j = json::parse(take(out));
  CHECK(j["bleu4"].get<double>() == doctest::Approx(100.0));
  CHECK(j["rouge_l"].get<double>() == doctest::Approx(100.0));
  CHECK(j["self_bleu"].is_null());
  CHECK(mwpgen_evaluate((dir / "short.jsonl").string().c_str(), ref.c_str(), &out) == MWPGEN_ERR_CONTRACT);
  REQUIRE(mwpgen_evaluate((dir / "four.jsonl").string().c_str(), ref.c_str(), &out) == MWPGEN_OK);
  j = json::parse(take(out));
  CHECK(j["self_bleu"].get<double>() == doctest::Approx(100.0));
}

TEST_CASE("cli: exit codes and deterministic output") {
  const auto dir = scratch("cli");
  write(dir / "ref.jsonl", "{\"text\": \"a b c\"}\n");
  write(dir / "two.jsonl", "{\"text\": \"a b c\"}\n{\"text\": \"a b c\"}\n");
  CHECK(run("eval " + (dir / "ref.jsonl").string() + " " + (dir / "ref.jsonl").string()) == 0);
  CHECK(run("eval " + (dir / "two.jsonl").string() + " " + (dir / "ref.jsonl").string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("synth --templates " + (dir / "none.jsonl").string() + " --cskg " + kData + "/cskg.tsv") == 2);

  write(dir / "config.json", tiny_config(dir).dump());
  const std::string cfg = " -c " + (dir / "config.json").string();
  REQUIRE(run("synth" + cfg) == 0);
  REQUIRE(run("train -q" + cfg) == 0);
  const std::string gen = kCli + " generate -m " + (dir / "model").string() +
                          " -e 'x+y=27; 2x+4y=86' -t livestock -x chicken -y rabbit --max-len 10 --seed 4";
  CHECK(std::system((gen + " > " + (dir / "a.txt").string()).c_str()) == 0);
  CHECK(std::system((gen + " > " + (dir / "b.txt").string()).c_str()) == 0);
  CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
  CHECK(run("generate -m " + (dir / "model").string() + " -e '-2x-3y=5; x+y=1' -t livestock -x chicken -y rabbit") ==
        2);
}
