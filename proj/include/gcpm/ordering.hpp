// Copyright 2026 The gcpm Authors
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

// Priority order strategies and the reordering experiment.

#ifndef GCPM_ORDERING_HPP_
#define GCPM_ORDERING_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/mechanism.hpp"

namespace gcpm {

enum class OrderingKind {
  kGiven,
  kRandom,
  kIncreasingVariance,
  kDecreasingVariance,
  kPseudoInferred,
};

struct OrderingStrategy {
  OrderingKind kind = OrderingKind::kGiven;
  std::vector<AgentIndex> given;  // kGiven; empty means identity
  std::uint64_t seed = 0;         // kRandom, kPseudoInferred
  std::shared_ptr<const PreferenceProfile> pseudo;  // kPseudoInferred
  int candidate_count = 100;                        // kPseudoInferred

  static OrderingStrategy Given(std::vector<AgentIndex> order);
  static OrderingStrategy Random(std::uint64_t seed);
  static OrderingStrategy IncreasingVariance();
  static OrderingStrategy DecreasingVariance();
  static OrderingStrategy PseudoInferred(PreferenceProfile pseudo,
                                         int candidate_count, std::uint64_t seed);

  std::string name() const;
};

// Uniform random permutation of 0..n-1.
std::vector<AgentIndex> random_order(int n, std::uint64_t seed);

// `count` permutations drawn in sequence from one generator.
std::vector<std::vector<AgentIndex>> candidate_orders(int n, int count,
                                                      std::uint64_t seed);

// Population variance of each agent's outcome row.
Eigen::VectorXd outcome_variances(const Instance& inst);

std::vector<AgentIndex> variance_order(const Instance& inst, bool increasing);

// Best candidate by the top-3 metric of the mechanism run on `pseudo_instance`.
// The argument carries the pseudo profile in place of the true one, so the
// selection never sees true preferences. First maximum wins; candidates whose
// threshold is infeasible are skipped. Returns the candidate's position.
int select_pseudo_inferred(const Instance& pseudo_instance,
                           const std::vector<std::vector<AgentIndex>>& candidates,
                           double g_bar, const MechanismOptions& options = {});

std::vector<AgentIndex> make_order(const Instance& inst,
                                   const OrderingStrategy& strategy, double g_bar);

struct ReorderRow {
  double g_bar = 0.0;
  std::string strategy;  // random, increasing_variance, decreasing_variance,
                         // pseudo_inferred, or min/mean/max summaries
  int order_id = -1;     // candidate position for random rows, -1 otherwise
  bool feasible = true;
  double top3 = 0.0;
  double realized_mean = 0.0;
};

struct ReorderOptions {
  bool include_variance = true;
  std::shared_ptr<const PreferenceProfile> pseudo;  // adds a pseudo row if set
  int k = 3;
  int threads = 1;
  MechanismOptions mechanism;
};

// For every grid value: R random orders, their min/mean/max, the variance
// orders and optionally the pseudo-inferred order drawn from the same pool.
// Rows at infeasible thresholds are marked infeasible with NaN metrics.
std::vector<ReorderRow> reorder_experiment(const Instance& inst,
                                           const std::vector<double>& g_grid, int R,
                                           std::uint64_t seed,
                                           const ReorderOptions& options = {});

}  // namespace gcpm

#endif  // GCPM_ORDERING_HPP_
