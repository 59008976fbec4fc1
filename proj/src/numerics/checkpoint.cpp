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

#include "mwpgen/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include "json.hpp"

#include "mwpgen/error.hpp"

namespace mwpgen::nn {

namespace {

void put_le(std::ofstream& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

double get_le(const unsigned char* buf) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_checkpoint(const ParameterStore& params, const std::filesystem::path& manifest_path) {
  std::filesystem::path blob_path = manifest_path;
  blob_path.replace_extension(".bin");
  nlohmann::ordered_json manifest;
  manifest["format"] = "mwpgen-params-v1";
  manifest["blob"] = blob_path.filename().string();
  manifest["params"] = nlohmann::ordered_json::object();

  std::ofstream blob(blob_path, std::ios::binary | std::ios::trunc);
  require(blob.good(), ErrorCode::kIo, "cannot write " + blob_path.string());
  std::uint64_t offset = 0;
  for (const Parameter* p : params.all()) {
    const std::uint64_t length = static_cast<std::uint64_t>(p->value.size()) * 8;
    manifest["params"][p->name] = {{"shape", {p->value.rows(), p->value.cols()}}, {"offset", offset}, {"length", length}};
    for (Eigen::Index i = 0; i < p->value.size(); ++i) put_le(blob, p->value.data()[i]);
    offset += length;
  }
  require(blob.good(), ErrorCode::kIo, "short write to " + blob_path.string());

  std::ofstream out(manifest_path, std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write " + manifest_path.string());
  out << manifest.dump(2) << "\n";
}

void load_checkpoint(ParameterStore& params, const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  require(in.good(), ErrorCode::kIo, "cannot read " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kIo, manifest_path.string() + ": " + e.what());
  }
  require(manifest.value("format", "") == "mwpgen-params-v1", ErrorCode::kIo, "unknown checkpoint format");
  const auto blob_path = manifest_path.parent_path() / manifest.at("blob").get<std::string>();
  std::ifstream blob(blob_path, std::ios::binary);
  require(blob.good(), ErrorCode::kIo, "cannot read " + blob_path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  const auto& entries = manifest.at("params");
  for (Parameter* p : params.all()) {
    require(entries.contains(p->name), ErrorCode::kIo, "checkpoint lacks parameter '" + p->name + "'");
    const auto& e = entries.at(p->name);
    const auto rows = e.at("shape")[0].get<Eigen::Index>();
    const auto cols = e.at("shape")[1].get<Eigen::Index>();
    require(rows == p->value.rows() && cols == p->value.cols(), ErrorCode::kDimension,
            "checkpoint shape mismatch for '" + p->name + "'");
    const auto offset = e.at("offset").get<std::uint64_t>();
    const auto length = e.at("length").get<std::uint64_t>();
    require(length == static_cast<std::uint64_t>(rows * cols) * 8 && offset + length <= bytes.size(), ErrorCode::kIo,
            "checkpoint blob range invalid for '" + p->name + "'");
    for (Eigen::Index i = 0; i < rows * cols; ++i) p->value.data()[i] = get_le(bytes.data() + offset + 8 * i);
  }
}

}  // namespace mwpgen::nn
