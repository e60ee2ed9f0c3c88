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

#include "elicit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elicit/error.hpp"

namespace elicit {

void PowerDiagram::validate() const {
  require(!sites.empty(), ErrorCode::Shape, "power diagram needs at least one site");
  require(weights.size() == sites.size() && labels.size() == sites.size(), ErrorCode::Shape,
          "power diagram sites, weights and labels differ in count");
  for (const auto& s : sites)
    require(s.size() == sites.front().size(), ErrorCode::Shape, "power diagram sites differ in length");
}

double power_distance(const Vector& u, const Vector& site, double weight) {
  require(u.size() == site.size(), ErrorCode::Shape,
          "point has " + std::to_string(u.size()) + " coordinates, site has " + std::to_string(site.size()));
  return u.dot(site) - weight;
}

namespace {

std::vector<double> distances(const PowerDiagram& diagram, const Vector& u) {
  std::vector<double> d(diagram.size());
  for (std::size_t k = 0; k < diagram.size(); ++k) d[k] = power_distance(u, diagram.sites[k], diagram.weights[k]);
  return d;
}

}  // namespace

CellAssignment cell_assign(const PowerDiagram& diagram, const Vector& u, double tie_tolerance) {
  diagram.validate();
  const auto d = distances(diagram, u);
  const double best = *std::min_element(d.begin(), d.end());
  CellTie tie;
  for (std::size_t k = 0; k < d.size(); ++k)
    if (d[k] - best <= tie_tolerance) {
      tie.indices.push_back(k);
      tie.labels.push_back(diagram.labels[k]);
    }
  if (tie.indices.size() == 1) return CellWinner{tie.indices.front(), tie.labels.front()};
  return tie;
}

double cell_margin(const PowerDiagram& diagram, const Vector& u) {
  diagram.validate();
  auto d = distances(diagram, u);
  if (d.size() < 2) return std::numeric_limits<double>::infinity();
  std::partial_sort(d.begin(), d.begin() + 2, d.end());
  return d[1] - d[0];
}

PowerDiagram from_squared_form(const std::vector<Vector>& sites, const std::vector<double>& weights,
                               std::vector<std::string> labels) {
  require(sites.size() == weights.size(), ErrorCode::Shape, "site and weight counts differ");
  if (labels.empty())
    for (std::size_t k = 0; k < sites.size(); ++k) labels.push_back(std::to_string(k));
  PowerDiagram out;
  out.labels = std::move(labels);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    out.sites.push_back(-2.0 * sites[k]);
    out.weights.push_back(weights[k] - sites[k].squaredNorm());
  }
  out.validate();
  return out;
}

FitResult fit_power_diagram(const std::map<std::string, std::vector<Vector>>& labeled, double margin) {
  require(!labeled.empty(), ErrorCode::DegenerateInput, "no labeled point sets");
  Eigen::Index dim = -1;
  for (const auto& [label, points] : labeled) {
    require(!points.empty(), ErrorCode::DegenerateInput, "labeled set '" + label + "' is empty");
    for (const auto& p : points) {
      if (dim < 0) dim = p.size();
      require(p.size() == dim, ErrorCode::Shape, "labeled points differ in dimension");
      require(p.minCoeff() >= -1e-9 && std::abs(p.sum() - 1.0) <= 1e-9, ErrorCode::Validation,
              "labeled point for '" + label + "' is not on the simplex");
    }
  }
  FitResult result;
  const std::size_t k_count = labeled.size();
  for (const auto& entry : labeled) result.diagram.labels.push_back(entry.first);
  if (k_count == 1) {
    result.feasible = true;
    result.status = LpStatus::Optimal;
    result.margin = std::numeric_limits<double>::infinity();
    result.diagram.sites.push_back(Vector::Zero(dim));
    result.diagram.weights.push_back(0.0);
    return result;
  }

  const std::size_t m = static_cast<std::size_t>(dim);
  const std::size_t stride = m + 1;  // site coordinates then weight
  const std::size_t t_var = k_count * stride;
  LpProblem lp(t_var + 1);
  for (std::size_t j = 0; j < t_var; ++j) lp.set_bounds(j, -1.0, 1.0);
  lp.set_bounds(t_var, -5.0, 5.0);
  lp.set_objective(t_var, 1.0);

  std::size_t k = 0;
  for (const auto& [label, points] : labeled) {
    std::vector<Vector> unique;
    for (const auto& p : points)
      if (std::none_of(unique.begin(), unique.end(), [&](const Vector& q) { return max_abs_diff(p, q) == 0.0; }))
        unique.push_back(p);
    for (const auto& p : unique) {
      for (std::size_t l = 0; l < k_count; ++l) {
        if (l == k) continue;
        // d_k(p) - d_l(p) + t <= 0
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t c = 0; c < m; ++c) {
          const double pc = p[static_cast<Eigen::Index>(c)];
          if (pc == 0.0) continue;
          terms.emplace_back(k * stride + c, pc);
          terms.emplace_back(l * stride + c, -pc);
        }
        terms.emplace_back(k * stride + m, -1.0);
        terms.emplace_back(l * stride + m, 1.0);
        terms.emplace_back(t_var, 1.0);
        lp.add_row(std::move(terms), RowType::LessEqual, 0.0);
      }
    }
    ++k;
  }

  const LpResult solved = solve_lp(lp);
  result.status = solved.status;
  if (solved.status != LpStatus::Optimal) return result;
  result.margin = solved.x[static_cast<Eigen::Index>(t_var)];
  for (std::size_t j = 0; j < k_count; ++j) {
    result.diagram.sites.push_back(solved.x.segment(static_cast<Eigen::Index>(j * stride), dim));
    result.diagram.weights.push_back(solved.x[static_cast<Eigen::Index>(j * stride + m)]);
  }
  result.feasible = result.margin > kStrictMargin && result.margin >= margin;
  return result;
}

std::vector<Segment> cell_boundaries_2simplex(const PowerDiagram& diagram) {
  diagram.validate();
  require(diagram.dimension() == 3, ErrorCode::Dimension,
          "boundary extraction needs a diagram over 3 coordinates, got " + std::to_string(diagram.dimension()));
  // Work in (u2, u3) with u1 = 1 - u2 - u3. A linear form a.u - c becomes
  // (a1 - c) + (a2 - a1) u2 + (a3 - a1) u3.
  struct Affine {
    double c0, c2, c3;
  };
  auto reduce = [](const Vector& a, double c) { return Affine{a[0] - c, a[1] - a[0], a[2] - a[0]}; };
  std::vector<Segment> out;
  const std::size_t k_count = diagram.size();
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t l = k + 1; l < k_count; ++l) {
      const Affine f = reduce(diagram.sites[k] - diagram.sites[l], diagram.weights[k] - diagram.weights[l]);
      const double norm2 = f.c2 * f.c2 + f.c3 * f.c3;
      if (norm2 < 1e-24) continue;  // parallel distance functions: no proper boundary
      const double p2 = -f.c0 * f.c2 / norm2;
      const double p3 = -f.c0 * f.c3 / norm2;
      const double d2 = -f.c3;
      const double d3 = f.c2;
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      auto clip = [&](const Affine& g) {  // keep g >= 0
        const double at = g.c0 + g.c2 * p2 + g.c3 * p3;
        const double slope = g.c2 * d2 + g.c3 * d3;
        if (std::abs(slope) < 1e-15) {
          if (at < -1e-12) hi = lo - 1.0;
          return;
        }
        const double s = -at / slope;
        if (slope > 0)
          lo = std::max(lo, s);
        else
          hi = std::min(hi, s);
      };
      clip({0.0, 1.0, 0.0});    // u2 >= 0
      clip({0.0, 0.0, 1.0});    // u3 >= 0
      clip({1.0, -1.0, -1.0});  // u1 >= 0
      for (std::size_t j = 0; j < k_count; ++j) {
        if (j == k || j == l) continue;
        // d_j - d_k >= 0 on the line
        clip(reduce(diagram.sites[j] - diagram.sites[k], diagram.weights[j] - diagram.weights[k]));
      }
      if (!(hi - lo > 1e-12)) continue;
      auto point = [&](double s) {
        const double u2 = p2 + s * d2;
        const double u3 = p3 + s * d3;
        Vector u(3);
        u << 1.0 - u2 - u3, u2, u3;
        return u;
      };
      out.push_back({point(lo), point(hi), k, l});
    }
  }
  return out;
}

std::pair<double, double> barycentric_to_plane(const Vector& u) {
  require(u.size() == 3, ErrorCode::Dimension, "barycentric point needs 3 coordinates");
  return {u[1] + u[2] / 2.0, u[2] * std::sqrt(3.0) / 2.0};
}

}  // namespace elicit
