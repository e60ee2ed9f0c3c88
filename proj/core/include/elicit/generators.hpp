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

// Seeded samplers for distributions, mechanisms and strategies. Every
// sampler is deterministic in its seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "elicit/mechanisms.hpp"
#include "elicit/model.hpp"
#include "elicit/verifier.hpp"

namespace elicit {

inline constexpr double kMinDeltaMagnitude = 1e-4;
inline constexpr std::size_t kRejectionLimit = 200000;

/// Symmetric Dirichlet(alpha) draw of the given length.
Vector dirichlet(std::mt19937_64& rng, std::size_t length, double alpha = 1.0);

/// Fixed marginals for the sign-pattern sampler: mu = p q^T + t Delta.
struct FixedMarginals {
  Vector row;
  Vector column;
};

/// Two-agent, single-state distributions whose Delta has exactly `signs`
/// with |Delta| >= kMinDeltaMagnitude entrywise. Rejection sampling from a
/// Dirichlet biased towards the positive cells; ResourceLimit after
/// kRejectionLimit misses in a row.
std::vector<JointDistribution> sample_sign_pattern(const SignMatrix& signs, std::size_t count, std::uint64_t seed,
                                                   const std::optional<FixedMarginals>& marginals = std::nullopt);

/// Conditionally independent models; prior and likelihood columns are
/// Dirichlet(1), or the given prior when supplied.
std::vector<ConditionalModel> sample_conditional_independent(std::size_t state_count,
                                                             const std::vector<std::size_t>& signal_counts,
                                                             std::size_t count, std::uint64_t seed,
                                                             const std::optional<Vector>& prior = std::nullopt);

/// Full-support joints with Dirichlet(alpha) mass.
std::vector<JointDistribution> sample_dirichlet(std::size_t state_count, const std::vector<std::size_t>& signal_counts,
                                                std::size_t count, std::uint64_t seed, double alpha = 1.0);

/// Payments uniform in [-1, 1], independently per task unless task_uniform.
ScoringMechanism random_mechanism(const ProblemInstance& instance, std::uint64_t seed, bool task_uniform = false);

/// Row-stochastic strategy with Dirichlet(1) rows; one matrix when consistent.
Strategy random_strategy(const ProblemInstance& instance, std::size_t agent, std::uint64_t seed, bool consistent);

}  // namespace elicit
