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


#include <gtest/gtest.h>

#include <random>

#include "gcpm/lsap.hpp"
#include "gcpm/mechanism.hpp"
#include "gcpm/oracles.hpp"
#include "test_support.hpp"

namespace gcpm {
namespace {

constexpr LocationIndex A = 0, B = 1, C = 2;

MechanismOutcome<double> run(const Instance& inst, double g_bar,
                             std::vector<AgentIndex> order,
                             const MechanismOptions& opts = {}) {
  return run_mechanism(inst, MechanismParams<double>{g_bar, std::move(order)}, opts);
}

TEST(RunMechanism, TwoAgentExampleOrderOneTwo) {
  auto out = run(two_agent_example(), kTwoAgentThreshold, {0, 1});
  EXPECT_EQ(out.matching, Matching({A, B}));
  EXPECT_DOUBLE_EQ(out.realized_mean, 0.5);
}

TEST(RunMechanism, TwoAgentExampleOrderTwoOne) {
  auto out = run(two_agent_example(), kTwoAgentThreshold, {1, 0});
  EXPECT_EQ(out.matching, Matching({C, A}));
  EXPECT_DOUBLE_EQ(out.realized_mean, 0.5);
}

TEST(RunMechanism, TwoAgentTraceOrderOneTwo) {
  auto out = run(two_agent_example(), kTwoAgentThreshold, {0, 1});
  ASSERT_EQ(out.trace.steps.size(), 2u);
  const auto& s1 = out.trace.steps[0];
  EXPECT_EQ(s1.agent, 0);
  EXPECT_EQ(s1.action, StepAction::kAssigned);
  EXPECT_EQ(s1.location, A);
  ASSERT_EQ(s1.probes.size(), 1u);
  EXPECT_DOUBLE_EQ(s1.probes[0].value, 0.5);
  EXPECT_TRUE(s1.probes[0].passed);
  const auto& s2 = out.trace.steps[1];
  EXPECT_EQ(s2.agent, 1);
  EXPECT_EQ(s2.location, B);
  // Agent 2 ranks A, C, B: A is full, C gives mean 0.3 and fails.
  ASSERT_EQ(s2.probes.size(), 2u);
  EXPECT_EQ(s2.probes[0].location, C);
  EXPECT_FALSE(s2.probes[0].passed);
  EXPECT_NEAR(s2.probes[0].value, 0.3, 1e-15);
  EXPECT_EQ(s2.probes[1].location, B);
  EXPECT_TRUE(s2.probes[1].passed);
  EXPECT_TRUE(out.trace.final_assignment.empty());
  EXPECT_DOUBLE_EQ(out.trace.g_max, 0.9);
}

TEST(RunMechanism, ThresholdAboveMaximumIsRejected) {
  EXPECT_THROW(run(two_agent_example(), 0.95, {0, 1}), ThresholdInfeasible);
  // Within the slack on the total the maximum itself is accepted.
  EXPECT_NO_THROW(run(two_agent_example(), 0.9 + 0.4e-9, {0, 1}));
}

TEST(RunMechanism, RejectsBadOrders) {
  EXPECT_THROW(run(two_agent_example(), 0.1, {0, 0}), InstanceInvalid);
  EXPECT_THROW(run(two_agent_example(), 0.1, {0}), InstanceInvalid);
  EXPECT_THROW(run(two_agent_example(), 0.1, {0, 2}), InstanceInvalid);
}

TEST(RunMechanism, InfeasibleInstanceThrows) {
  EXPECT_THROW(run(two_agent_example().with_capacities({1, 0, 0}), 0.0, {0, 1}),
               InstanceInvalid);
}

TEST(RunMechanism, ZeroThresholdIsSerialDictatorship) {
  std::mt19937_64 rng(3);
  SmallInstanceSpec spec;
  spec.max_agents = 6;
  spec.max_locations = 5;
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = random_small_instance(rng, spec);
    // Seats exactly match agents, every preference fully strict.
    std::vector<int> caps(static_cast<size_t>(inst.num_agents()), 1);
    ScoreMatrix<double> g = ScoreMatrix<double>::Zero(inst.num_agents(), inst.num_agents());
    g.leftCols(std::min(inst.num_agents(), inst.num_locations())) =
        inst.outcomes().leftCols(std::min(inst.num_agents(), inst.num_locations()));
    std::vector<std::string> names;
    for (int l = 0; l < inst.num_agents(); ++l) names.push_back("S" + std::to_string(l));
    Instance square(names, caps, g,
                    PreferenceProfile::FromPrefixes(
                        std::vector<std::vector<LocationIndex>>(
                            static_cast<size_t>(inst.num_agents())),
                        inst.num_agents()));
    square = testing::with_full_random_prefs(square, rng);
    auto order = testing::shuffled_order(square.num_agents(), rng);
    EXPECT_EQ(run(square, 0.0, order).matching,
              testing::serial_dictatorship(square, order));
  }
}

TEST(RunMechanism, FullyIndifferentAgentsReachTheMaximum) {
  std::mt19937_64 rng(4);
  SmallInstanceSpec spec;
  spec.max_agents = 6;
  spec.max_locations = 5;
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = random_small_instance(rng, spec);
    inst = inst.with_preferences(PreferenceProfile::FromPrefixes(
        std::vector<std::vector<LocationIndex>>(static_cast<size_t>(inst.num_agents())),
        inst.num_locations()));
    const double gmax = solve_max_matching_value(inst);
    std::uniform_real_distribution<double> u(0.0, gmax);
    auto out = run(inst, u(rng), identity_order(inst.num_agents()));
    EXPECT_NEAR(out.realized_mean, gmax, 1e-12);
    EXPECT_EQ(out.matching, solve_max_matching(inst));
  }
}

TEST(RunMechanism, HeldAgentsArePlacedAtTheEnd) {
  // Both agents list only A; at g_max neither can take it.
  ScoreMatrix<double> g(2, 3);
  g << 0.0, 1.0, 0.5,  //
      0.0, 0.5, 1.0;
  Instance inst({"A", "B", "C"}, {1, 1, 1}, g,
                PreferenceProfile::FromPrefixes({{0}, {0}}, 3));
  auto out = run(inst, 1.0, {0, 1});
  EXPECT_EQ(out.matching, Matching({B, C}));
  ASSERT_EQ(out.trace.steps.size(), 2u);
  EXPECT_EQ(out.trace.steps[0].action, StepAction::kHeld);
  EXPECT_EQ(out.trace.steps[1].action, StepAction::kHeld);
  EXPECT_EQ(out.trace.final_assignment,
            (std::vector<std::pair<AgentIndex, LocationIndex>>{{0, B}, {1, C}}));
  EXPECT_EQ(out.trace.steps[1].before.held, std::vector<AgentIndex>{0});
}

TEST(RunMechanism, ProbeIncludesHeldAgents) {
  // Agent 1 lists nothing and is held; agent 2 can still take its first
  // choice A because the completion seats agent 1 at C.
  ScoreMatrix<double> g(3, 3);
  g << 0.25, 0.75, 0.5,  //
      0.5, 0.0, 0.25,    //
      1.0, 1.0, 0.75;
  Instance inst({"A", "B", "C"}, {1, 1, 1}, g,
                PreferenceProfile::FromPrefixes({{B, A, C}, {}, {A, C, B}}, 3));
  const double g_bar = 2.0 / 3;
  auto out = run(inst, g_bar, {0, 1, 2});
  EXPECT_EQ(out.matching, Matching({B, C, A}));
  EXPECT_EQ(out.trace.final_assignment,
            (std::vector<std::pair<AgentIndex, LocationIndex>>{{1, C}}));
  // Leaving the held agent out undervalues A and C, so agent 2 is held too
  // and ends at C, which the correct outcome dominates.
  MechanismOptions omit;
  omit.mutation = ProbeMutation::kOmitHeldAgents;
  auto broken = run(inst, g_bar, {0, 1, 2}, omit);
  EXPECT_EQ(broken.matching, Matching({B, A, C}));
  EXPECT_TRUE(pareto_dominates(out.matching, broken.matching, inst.preferences()));
}

TEST(RunMechanism, TraceInvariants) {
  std::mt19937_64 rng(21);
  SmallInstanceSpec spec;
  spec.max_agents = 6;
  spec.max_locations = 5;
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = random_small_instance(rng, spec);
    const double gmax = solve_max_matching_value(inst);
    const double g_bar = std::uniform_real_distribution<double>(0.0, gmax)(rng);
    auto order = testing::shuffled_order(inst.num_agents(), rng);
    auto out = run(inst, g_bar, order);
    ASSERT_TRUE(is_feasible(out.matching, inst));
    ASSERT_TRUE(is_g_acceptable(out.matching, inst, g_bar));
    ASSERT_EQ(static_cast<int>(out.trace.steps.size()), inst.num_agents());
    size_t held = 0;
    std::vector<int> prev_caps = inst.capacities();
    for (size_t s = 0; s < out.trace.steps.size(); ++s) {
      const auto& step = out.trace.steps[s];
      EXPECT_EQ(step.step, static_cast<int>(s) + 1);
      EXPECT_EQ(step.agent, order[s]);
      EXPECT_GE(step.before.held.size(), held);
      held = step.before.held.size();
      for (size_t l = 0; l < prev_caps.size(); ++l) {
        EXPECT_LE(step.before.residual_capacities[l], prev_caps[l]);
      }
      prev_caps = step.before.residual_capacities;
      // Probes follow the strict prefix, skip full locations, and stop at
      // the first pass.
      auto prefix = inst.preferences()[step.agent].strict_prefix();
      size_t p = 0;
      for (LocationIndex l : prefix) {
        if (step.before.residual_capacities[l] == 0) continue;
        ASSERT_LT(p, step.probes.size());
        EXPECT_EQ(step.probes[p].location, l);
        if (step.probes[p].passed) break;
        ++p;
      }
      if (step.action == StepAction::kAssigned) {
        EXPECT_EQ(step.probes.back().location, step.location);
        EXPECT_EQ(out.matching[step.agent], step.location);
      } else {
        for (const auto& pr : step.probes) EXPECT_FALSE(pr.passed);
      }
    }
    if (inst.num_locations() > 2) {
      EXPECT_LE(out.trace.lsap_solves,
                solve_bound(inst.num_agents(), inst.num_locations()));
    }
  }
}

TEST(RunMechanism, ProbeValuesMatchBruteForceCompletions) {
  std::mt19937_64 rng(22);
  SmallInstanceSpec spec;
  spec.max_agents = 4;
  spec.max_locations = 4;
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = random_small_instance(rng, spec);
    const double gmax = solve_max_matching_value(inst);
    const double g_bar = std::uniform_real_distribution<double>(0.0, gmax)(rng);
    auto out = run(inst, g_bar, identity_order(inst.num_agents()));
    for (const auto& step : out.trace.steps) {
      for (const auto& pr : step.probes) {
        // Best completion consistent with the snapshot and the probe.
        double best = -1.0;
        for (const auto& m : enumerate_feasible_matchings(inst)) {
          if (m[step.agent] != pr.location) continue;
          bool ok = true;
          for (int j = 0; j < inst.num_agents(); ++j) {
            const LocationIndex fixed = step.before.completed[j];
            if (fixed != kNoLocation && m[j] != fixed) ok = false;
          }
          if (ok) best = std::max(best, total_score(m, inst));
        }
        ASSERT_GE(best, 0.0);
        EXPECT_NEAR(pr.value * inst.num_agents(), best, 1e-12);
      }
    }
  }
}

TEST(FeasibleLocations, TwoAgentStepOne) {
  const Instance ex = two_agent_example();
  MechanismSnapshot s{{kNoLocation, kNoLocation}, {}, {1, 1, 1}};
  EXPECT_EQ(feasible_locations(s, 0, ex, 0.45), (std::vector<LocationIndex>{A, B, C}));
  // At the maximum only the optimal completion survives.
  EXPECT_EQ(feasible_locations(s, 0, ex, 0.9), (std::vector<LocationIndex>{C}));
}

TEST(FeasibleLocations, FullLocationIsExcluded) {
  const Instance ex = two_agent_example();
  MechanismSnapshot s{{A, kNoLocation}, {}, {0, 1, 1}};
  EXPECT_EQ(feasible_locations(s, 1, ex, 0.0), (std::vector<LocationIndex>{B, C}));
  EXPECT_EQ(feasible_locations(s, 1, ex, 0.45), (std::vector<LocationIndex>{B}));
  EXPECT_THROW(feasible_locations(s, 0, ex, 0.0), InstanceInvalid);
}

TEST(RunMechanism, EqualInputsGiveEqualTraces) {
  std::mt19937_64 rng(23);
  SmallInstanceSpec spec;
  spec.max_agents = 6;
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = random_small_instance(rng, spec);
    const double g_bar = 0.5 * solve_max_matching_value(inst);
    auto a = run(inst, g_bar, identity_order(inst.num_agents()));
    auto b = run(inst, g_bar, identity_order(inst.num_agents()));
    EXPECT_EQ(a.matching, b.matching);
    EXPECT_EQ(a.trace.probes, b.trace.probes);
    EXPECT_EQ(a.trace.lsap_solves, b.trace.lsap_solves);
  }
}

TEST(RunMechanism, ObserverSeesEveryRun) {
  int calls = 0;
  MechanismOptions opts;
  opts.observer = [&](const Instance&, double g, const MechanismOutcome<double>& o) {
    ++calls;
    EXPECT_DOUBLE_EQ(g, 0.45);
    EXPECT_EQ(o.matching.num_agents(), 2);
  };
  run(two_agent_example(), 0.45, {0, 1}, opts);
  run(two_agent_example(), 0.45, {1, 0}, opts);
  EXPECT_EQ(calls, 2);
}

}  // namespace
}  // namespace gcpm
