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

#include "mwpgen/error.hpp"

namespace mwpgen {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kContract: return "ContractError";
    case ErrorCode::kDimension: return "DimensionError";
    case ErrorCode::kNumeric: return "NumericError";
    case ErrorCode::kSyntax: return "SyntaxError";
    case ErrorCode::kConstraintViolation: return "ConstraintViolation";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNonLinear: return "NonLinearEquation";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kTopicNotFound: return "TopicNotFound";
    case ErrorCode::kEntityNotFound: return "EntityNotFound";
    case ErrorCode::kDisconnectedBinding: return "DisconnectedBinding";
    case ErrorCode::kVocab: return "VocabError";
    case ErrorCode::kMissingSlot: return "MissingSlot";
    case ErrorCode::kTemplateGap: return "TemplateGap";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Error";
}

}  // namespace mwpgen
