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

// Synthetic instances with controlled preference correlation across agents
// and preference/outcome correlation within agents, and noisy "pseudo"
// preference profiles derived from a true one.

#ifndef GCPM_SIMGEN_HPP_
#define GCPM_SIMGEN_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>

#include "gcpm/core.hpp"

namespace gcpm {

struct SimConfig {
  int n = 100;          // agents = locations, unit capacities
  double rho_p = 0.0;   // correlation of latent preferences across agents
  double rho_op = 0.0;  // correlation of preferences and outcomes within agent
  std::optional<int> truncation_k = 10;  // keep top-k ranks; none or >= n = full
  std::uint64_t seed = 0;

  void validate() const;
};

struct LatentMatrices {
  Eigen::MatrixXd preference;  // P, row = agent, column = location
  Eigen::MatrixXd score;       // S before normalization
};

LatentMatrices generate_latent(const SimConfig& cfg);

// Instance from latent matrices: S min-max normalized over the whole matrix,
// P rows turned into rankings (largest value first), truncated to k.
Instance instance_from_latent(const LatentMatrices& latent,
                              std::optional<int> truncation_k);

Instance generate_instance(const SimConfig& cfg);

// Rank order of one row, largest value first, ties by lower index.
std::vector<LocationIndex> descending_order(const Eigen::VectorXd& row);

// Pseudo profile: each agent's ranking is re-derived from rank-implied
// latent values (unit variance) plus Gaussian noise of the given scale.
// Unlisted locations draw random positions below the listed ones. Prefix
// lengths are preserved; noise_scale == 0 returns the profile unchanged.
PreferenceProfile perturb_preferences(const Instance& inst, double noise_scale,
                                      std::uint64_t seed);

// Share of agents keeping 3, 2, 1, 0 of their true top-3 in the pseudo top-3.
std::array<double, 4> top3_overlap_profile(const PreferenceProfile& truth,
                                           const PreferenceProfile& pseudo);

// Noise scale whose expected share of agents keeping all three top-3
// locations equals `target_keep3` (bisection over common random numbers).
double calibrate_noise_scale(const Instance& inst, double target_keep3,
                             std::uint64_t seed, int replicates = 20);

// Mean Pearson correlation between the rank vectors of distinct agents.
// Only meaningful on untruncated profiles.
double mean_cross_agent_rank_correlation(const PreferenceProfile& prefs);

// Mean over agents of the correlation between preference strength
// (n - rank) and outcome score, on untruncated profiles.
double mean_preference_outcome_correlation(const Instance& inst);

}  // namespace gcpm

#endif  // GCPM_SIMGEN_HPP_
