// Copyright 2026 The elicit Authors
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

#include "elicit/error.hpp"

namespace elicit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroMarginal: return "ZeroMarginal";
    case ErrorCode::Arity: return "ArityError";
    case ErrorCode::Shape: return "ShapeError";
    case ErrorCode::Index: return "IndexError";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateBelief: return "DegenerateBelief";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::DegenerateConstruction: return "DegenerateConstruction";
    case ErrorCode::MissingFactorization: return "MissingFactorization";
    case ErrorCode::Dimension: return "DimensionError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Validation: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace elicit
