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

#include "gcpm/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gcpm/parallel.hpp"

namespace gcpm {

OrderingStrategy OrderingStrategy::Given(std::vector<AgentIndex> order) {
  OrderingStrategy s;
  s.kind = OrderingKind::kGiven;
  s.given = std::move(order);
  return s;
}

OrderingStrategy OrderingStrategy::Random(std::uint64_t seed) {
  OrderingStrategy s;
  s.kind = OrderingKind::kRandom;
  s.seed = seed;
  return s;
}

OrderingStrategy OrderingStrategy::IncreasingVariance() {
  OrderingStrategy s;
  s.kind = OrderingKind::kIncreasingVariance;
  return s;
}

OrderingStrategy OrderingStrategy::DecreasingVariance() {
  OrderingStrategy s;
  s.kind = OrderingKind::kDecreasingVariance;
  return s;
}

OrderingStrategy OrderingStrategy::PseudoInferred(PreferenceProfile pseudo,
                                                  int candidate_count,
                                                  std::uint64_t seed) {
  if (candidate_count < 1) throw InvalidConfig("candidate_count must be positive");
  OrderingStrategy s;
  s.kind = OrderingKind::kPseudoInferred;
  s.pseudo = std::make_shared<const PreferenceProfile>(std::move(pseudo));
  s.candidate_count = candidate_count;
  s.seed = seed;
  return s;
}

std::string OrderingStrategy::name() const {
  switch (kind) {
    case OrderingKind::kGiven:
      return "given";
    case OrderingKind::kRandom:
      return "random";
    case OrderingKind::kIncreasingVariance:
      return "increasing_variance";
    case OrderingKind::kDecreasingVariance:
      return "decreasing_variance";
    case OrderingKind::kPseudoInferred:
      return "pseudo_inferred";
  }
  return "unknown";
}

std::vector<AgentIndex> random_order(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<AgentIndex> order = identity_order(n);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<std::vector<AgentIndex>> candidate_orders(int n, int count,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<AgentIndex>> out;
  out.reserve(static_cast<size_t>(std::max(count, 0)));
  for (int c = 0; c < count; ++c) {
    std::vector<AgentIndex> order = identity_order(n);
    std::shuffle(order.begin(), order.end(), rng);
    out.push_back(std::move(order));
  }
  return out;
}

Eigen::VectorXd outcome_variances(const Instance& inst) {
  const auto& g = inst.outcomes();
  Eigen::VectorXd var(g.rows());
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    if (g.cols() == 0) {
      var(i) = 0.0;
      continue;
    }
    const double mean = g.row(i).mean();
    var(i) = (g.row(i).array() - mean).square().sum() / static_cast<double>(g.cols());
  }
  return var;
}

std::vector<AgentIndex> variance_order(const Instance& inst, bool increasing) {
  const Eigen::VectorXd var = outcome_variances(inst);
  std::vector<AgentIndex> order = identity_order(inst.num_agents());
  std::stable_sort(order.begin(), order.end(), [&](AgentIndex a, AgentIndex b) {
    return increasing ? var(a) < var(b) : var(a) > var(b);
  });
  return order;
}

int select_pseudo_inferred(const Instance& pseudo_instance,
                           const std::vector<std::vector<AgentIndex>>& candidates,
                           double g_bar, const MechanismOptions& options) {
  MechanismOptions opts = options;
  opts.record_snapshots = false;
  int best = -1;
  double best_top3 = -1.0;
  for (size_t c = 0; c < candidates.size(); ++c) {
    MechanismOutcome<double> run;
    try {
      run = run_mechanism(pseudo_instance, MechanismParams<double>{g_bar, candidates[c]},
                          opts);
    } catch (const ThresholdInfeasible&) {
      continue;
    }
    const double top3 =
        compute_metrics(run.matching, pseudo_instance, 3).top_k_proportion;
    if (top3 > best_top3) {
      best_top3 = top3;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<AgentIndex> make_order(const Instance& inst,
                                   const OrderingStrategy& strategy, double g_bar) {
  const int n = inst.num_agents();
  switch (strategy.kind) {
    case OrderingKind::kGiven: {
      if (strategy.given.empty()) return identity_order(n);
      if (!is_permutation_of_agents(strategy.given, n)) {
        throw InstanceInvalid("given order is not a permutation of the agents");
      }
      return strategy.given;
    }
    case OrderingKind::kRandom:
      return random_order(n, strategy.seed);
    case OrderingKind::kIncreasingVariance:
      return variance_order(inst, true);
    case OrderingKind::kDecreasingVariance:
      return variance_order(inst, false);
    case OrderingKind::kPseudoInferred: {
      if (!strategy.pseudo) throw InvalidConfig("pseudo_inferred needs a pseudo profile");
      if (strategy.candidate_count < 1) {
        throw InvalidConfig("candidate_count must be positive");
      }
      const auto pool = candidate_orders(n, strategy.candidate_count, strategy.seed);
      const Instance pseudo_instance = inst.with_preferences(*strategy.pseudo);
      const int best = select_pseudo_inferred(pseudo_instance, pool, g_bar);
      if (best < 0) {
        throw ThresholdInfeasible(g_bar, solve_max_matching_value(inst));
      }
      return pool[static_cast<size_t>(best)];
    }
  }
  return identity_order(n);
}

std::vector<ReorderRow> reorder_experiment(const Instance& inst,
                                           const std::vector<double>& g_grid, int R,
                                           std::uint64_t seed,
                                           const ReorderOptions& options) {
  if (R < 1) throw InvalidConfig("R must be positive");
  const int n = inst.num_agents();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double best_total = optimal_engine(inst).total();
  const auto pool = candidate_orders(n, R, seed);
  std::vector<std::vector<AgentIndex>> fixed;
  std::vector<std::string> fixed_names;
  if (options.include_variance) {
    fixed.push_back(variance_order(inst, true));
    fixed_names.emplace_back("increasing_variance");
    fixed.push_back(variance_order(inst, false));
    fixed_names.emplace_back("decreasing_variance");
  }
  std::optional<Instance> pseudo_instance;
  if (options.pseudo) pseudo_instance = inst.with_preferences(*options.pseudo);

  MechanismOptions mopts = options.mechanism;
  mopts.record_snapshots = false;

  struct Cell {
    double top3 = 0.0;
    double mean = 0.0;
  };
  const int per_g = R + static_cast<int>(fixed.size());
  const int num_g = static_cast<int>(g_grid.size());
  std::vector<Cell> cells(static_cast<size_t>(num_g * per_g));
  std::vector<int> pseudo_pick(static_cast<size_t>(num_g), -1);
  std::vector<char> feasible(static_cast<size_t>(num_g), 0);
  for (int gi = 0; gi < num_g; ++gi) {
    feasible[gi] = meets_threshold(best_total, n, g_grid[gi], mopts.tolerance);
  }

  const int jobs_per_g = per_g + (pseudo_instance ? 1 : 0);
  parallel_for(num_g * jobs_per_g, options.threads, [&](int job) {
    const int gi = job / jobs_per_g;
    const int j = job % jobs_per_g;
    if (!feasible[gi]) return;
    const double g = g_grid[gi];
    if (j == per_g) {
      pseudo_pick[gi] = select_pseudo_inferred(*pseudo_instance, pool, g, mopts);
      return;
    }
    const auto& order = j < R ? pool[j] : fixed[j - R];
    const auto run = run_mechanism(inst, MechanismParams<double>{g, order}, mopts);
    const auto m = compute_metrics(run.matching, inst, options.k);
    cells[static_cast<size_t>(gi * per_g + j)] = {m.top_k_proportion, m.realized_mean};
  });

  std::vector<ReorderRow> rows;
  for (int gi = 0; gi < num_g; ++gi) {
    const double g = g_grid[gi];
    auto cell = [&](int j) { return cells[static_cast<size_t>(gi * per_g + j)]; };
    auto push = [&](std::string name, int id, double top3, double mean) {
      rows.push_back({g, std::move(name), id, static_cast<bool>(feasible[gi]),
                      feasible[gi] ? top3 : nan, feasible[gi] ? mean : nan});
    };
    double lo_t = std::numeric_limits<double>::infinity(), hi_t = -lo_t, sum_t = 0.0;
    double lo_m = lo_t, hi_m = -lo_t, sum_m = 0.0;
    for (int r = 0; r < R; ++r) {
      const Cell c = cell(r);
      push("random", r, c.top3, c.mean);
      lo_t = std::min(lo_t, c.top3);
      hi_t = std::max(hi_t, c.top3);
      sum_t += c.top3;
      lo_m = std::min(lo_m, c.mean);
      hi_m = std::max(hi_m, c.mean);
      sum_m += c.mean;
    }
    push("random_min", -1, lo_t, lo_m);
    push("random_mean", -1, sum_t / R, sum_m / R);
    push("random_max", -1, hi_t, hi_m);
    for (size_t f = 0; f < fixed.size(); ++f) {
      const Cell c = cell(R + static_cast<int>(f));
      push(fixed_names[f], -1, c.top3, c.mean);
    }
    if (pseudo_instance) {
      const int pick = pseudo_pick[gi];
      if (pick >= 0) {
        const Cell c = cell(pick);
        push("pseudo_inferred", pick, c.top3, c.mean);
      } else {
        push("pseudo_inferred", -1, nan, nan);
      }
    }
  }
  return rows;
}

}  // namespace gcpm
