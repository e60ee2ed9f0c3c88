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

#include "elicit/svg.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "elicit/mechanisms.hpp"
#include "elicit/synthesis.hpp"

namespace elicit {

namespace {

constexpr double kScale = 420.0;
constexpr double kPad = 40.0;
constexpr std::string_view kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Pixel {
  double x, y;
};

Pixel to_pixel(const Vector& u) {
  const auto [x, y] = barycentric_to_plane(u);
  return {kPad + kScale * x, kPad + kScale * (std::sqrt(3.0) / 2.0 - y)};
}

std::pair<std::string, std::string> px(const Vector& u) {
  const Pixel p = to_pixel(u);
  return {fmt(p.x), fmt(p.y)};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

PowerDiagram ca_diagram(const ProblemInstance& instance, std::size_t agent, const Vector& marginal) {
  const SignMatrix signs = shared_sign_pattern(instance);
  const ScoringMechanism ca = ca_mechanism(signs, 2);
  return extract_power_diagram(extract_deh(ca), marginal, agent);
}

std::string render_simplex_svg(const ProblemInstance& instance, std::size_t agent, const Vector& marginal,
                               const std::optional<PowerDiagram>& diagram) {
  require(agent < instance.num_agents(), ErrorCode::Index, "agent out of range");
  if (instance.peer_report_count(agent) != 3)
    fail(ErrorCode::Dimension, "plots need |R_-i| = 3, got " + std::to_string(instance.peer_report_count(agent)));
  require(marginal.size() == 3, ErrorCode::Dimension, "marginal must have 3 coordinates");
  const PowerDiagram cells = diagram ? *diagram : ca_diagram(instance, agent, marginal);

  const double height = 2.0 * kPad + kScale * std::sqrt(3.0) / 2.0;
  const double width = 2.0 * kPad + kScale;
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(width) + "\" height=\"" +
         fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const Vector e0 = Vector::Unit(3, 0), e1 = Vector::Unit(3, 1), e2 = Vector::Unit(3, 2);
  const auto [x0, y0] = px(e0);
  const auto [x1, y1] = px(e1);
  const auto [x2, y2] = px(e2);
  svg += "<polygon id=\"simplex\" points=\"" + x0 + "," + y0 + " " + x1 + "," + y1 + " " + x2 + "," + y2 +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  const auto& peers = instance.reports(agent == 0 ? 1 : 0);
  if (instance.num_agents() == 2) {
    const double dy[] = {18.0, 18.0, -8.0};
    for (std::size_t k = 0; k < 3 && k < peers.size(); ++k)
      svg += "<text x=\"" + fmt(to_pixel(Vector::Unit(3, static_cast<Eigen::Index>(k))).x) + "\" y=\"" +
             fmt(to_pixel(Vector::Unit(3, static_cast<Eigen::Index>(k))).y + dy[k]) +
             "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" + escape(peers.key(k)) +
             "</text>\n";
  }

  svg += "<g id=\"boundaries\" stroke=\"#333333\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\">\n";
  for (const Segment& seg : cell_boundaries_2simplex(cells)) {
    const auto [ax, ay] = px(seg.a);
    const auto [bx, by] = px(seg.b);
    svg += "<line x1=\"" + ax + "\" y1=\"" + ay + "\" x2=\"" + bx + "\" y2=\"" + by + "\" data-cells=\"" +
           std::to_string(seg.left) + "-" + std::to_string(seg.right) + "\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g id=\"posteriors\">\n";
  for (const PosteriorSet& set : posterior_sets(instance, agent, Grouping::ByMarginal)) {
    if (max_abs_diff(set.marginal, marginal) > kDedupTolerance) continue;
    const std::string color(kPalette[set.report % std::size(kPalette)]);
    for (const PosteriorMember& m : set.members) {
      const auto [cx, cy] = px(m.posterior);
      svg += "<circle cx=\"" + cx + "\" cy=\"" + cy + "\" r=\"4\" fill=\"" + color + "\" data-report=\"" +
             escape(set.report_key) + "\"/>\n";
    }
  }
  svg += "</g>\n";

  const auto [mx, my] = px(marginal);
  svg += "<circle id=\"marginal\" cx=\"" + mx + "\" cy=\"" + my +
         "\" r=\"5\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
  svg += "</svg>\n";
  return svg;
}

void render_simplex_svg(const ProblemInstance& instance, std::size_t agent, const Vector& marginal,
                        const std::filesystem::path& out, const std::optional<PowerDiagram>& diagram) {
  write_text(out, render_simplex_svg(instance, agent, marginal, diagram));
}

}  // namespace elicit
