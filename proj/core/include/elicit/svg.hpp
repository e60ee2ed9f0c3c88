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

// Ternary plots of posteriors over peer reports with power-diagram cells.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "elicit/geometry.hpp"
#include "elicit/model.hpp"

namespace elicit {

/// Cells of the two-task CA mechanism for `agent` at the given peer marginal.
PowerDiagram ca_diagram(const ProblemInstance& instance, std::size_t agent, const Vector& marginal);

/// SVG 1.1 document: simplex outline, members of the marginal bucket colored
/// by truthful report, dashed cell boundaries and the marginal point. Uses
/// ca_diagram when no diagram is given. Dimension error unless |R_-i| = 3.
std::string render_simplex_svg(const ProblemInstance& instance, std::size_t agent, const Vector& marginal,
                               const std::optional<PowerDiagram>& diagram = std::nullopt);

void render_simplex_svg(const ProblemInstance& instance, std::size_t agent, const Vector& marginal,
                        const std::filesystem::path& out, const std::optional<PowerDiagram>& diagram = std::nullopt);

}  // namespace elicit
