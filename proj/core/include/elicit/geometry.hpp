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

// Power diagrams over probability simplices. The power distance of u to a
// site v with weight w is <u, v> - w; cells are strict argmins.

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "elicit/lp.hpp"
#include "elicit/model.hpp"

namespace elicit {

inline constexpr double kTieTolerance = 1e-9;
inline constexpr double kStrictMargin = 1e-6;

struct PowerDiagram {
  std::vector<Vector> sites;
  std::vector<double> weights;
  std::vector<std::string> labels;

  std::size_t size() const { return sites.size(); }
  std::size_t dimension() const { return sites.empty() ? 0 : static_cast<std::size_t>(sites.front().size()); }

  /// Throws Shape when sites, weights and labels disagree.
  void validate() const;
};

double power_distance(const Vector& u, const Vector& site, double weight);

struct CellWinner {
  std::size_t index;
  std::string label;
};
struct CellTie {
  std::vector<std::size_t> indices;
  std::vector<std::string> labels;
};
using CellAssignment = std::variant<CellWinner, CellTie>;

CellAssignment cell_assign(const PowerDiagram& diagram, const Vector& u, double tie_tolerance = kTieTolerance);

/// Second-smallest minus smallest power distance at u (infinity when K = 1).
double cell_margin(const PowerDiagram& diagram, const Vector& u);

/// Converts squared-form sites (||u - v||^2 - w) to inner-product form.
PowerDiagram from_squared_form(const std::vector<Vector>& sites, const std::vector<double>& weights,
                               std::vector<std::string> labels = {});

struct FitResult {
  bool feasible = false;
  PowerDiagram diagram;
  double margin = 0.0;  // optimal LP margin
  LpStatus status = LpStatus::Infeasible;
};

/// Max-margin fit of a diagram separating labeled simplex points, with sites
/// and weights boxed to [-1, 1]. Feasible when the optimum exceeds both
/// kStrictMargin and `margin`.
FitResult fit_power_diagram(const std::map<std::string, std::vector<Vector>>& labeled, double margin = 0.0);

struct Segment {
  Vector a;  // barycentric endpoints
  Vector b;
  std::size_t left;  // site indices whose cells meet along the segment
  std::size_t right;
};

/// Boundaries between cells of a diagram over the 2-simplex, clipped to the
/// triangle and to the region where the pair is minimal.
std::vector<Segment> cell_boundaries_2simplex(const PowerDiagram& diagram);

/// Cartesian coordinates of a barycentric point in the unit-edge triangle.
std::pair<double, double> barycentric_to_plane(const Vector& u);

}  // namespace elicit
