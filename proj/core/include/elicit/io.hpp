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

#pragma once

// JSON instance and mechanism files, and machine-readable result reports.
// Field layout is documented in docs/schemas.md.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/analysis.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/model.hpp"
#include "elicit/synthesis.hpp"
#include "elicit/verifier.hpp"

namespace elicit {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parse for malformed JSON, wrong types or unknown fields; Validation for
/// probability invariants.
ProblemInstance parse_instance(const std::filesystem::path& path);
ProblemInstance instance_from_json(const Json& doc);
ProblemInstance instance_from_string(const std::string& text);

/// Explicit distributions (generator blocks are expanded); factorizations
/// are written alongside when every distribution has one.
Json instance_to_json(const ProblemInstance& instance);
void save_instance(const ProblemInstance& instance, const std::filesystem::path& path);

Json mechanism_to_json(const ScoringMechanism& mech);
ScoringMechanism mechanism_from_json(const Json& doc);
ScoringMechanism parse_mechanism(const std::filesystem::path& path);
void save_mechanism(const ScoringMechanism& mech, const std::filesystem::path& path);

Json to_json(const CheckReport& report);
Json to_json(const Verdict& verdict);
Json to_json(const SynthesisResult& result);
Json to_json(const PowerDiagram& diagram);
Json to_json(const Matrix& m);
Json to_json(const Vector& v);

/// Two-space indented text with a trailing newline.
std::string dump(const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace elicit
