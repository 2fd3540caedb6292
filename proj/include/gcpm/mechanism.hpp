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

// Threshold-constrained priority (serial dictatorship) mechanism.
//
// Agents act in priority order. An agent takes the best strictly ranked
// location that still admits a completion of everybody else whose mean score
// reaches the threshold; if no strictly ranked location qualifies it is held
// back. Held agents are placed at the end by outcome maximization over the
// residual capacities.

#ifndef GCPM_MECHANISM_HPP_
#define GCPM_MECHANISM_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <type_traits>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/lsap.hpp"

namespace gcpm {

// Deliberate corruptions of the probe, used to check that the verifiers can
// tell a broken mechanism apart.
enum class ProbeMutation {
  kNone,
  kOmitHeldAgents,  // held agents left out of the completion value
  kSignFlip,        // agent's own score subtracted instead of added
};

template <typename Scalar>
struct MechanismParams {
  Scalar g_bar = Scalar(0);
  std::vector<AgentIndex> order;  // priority order, a permutation of 0..n-1
};

template <typename Scalar>
struct MechanismOutcome;

struct MechanismOptions {
  double tolerance = kThresholdTolerance;
  ProbeMutation mutation = ProbeMutation::kNone;
  bool record_snapshots = true;
  // Called after every completed run on a double instance, with the
  // threshold used. Must be thread-safe when runs are parallel.
  std::function<void(const BasicInstance<double>&, double,
                     const MechanismOutcome<double>&)>
      observer;
};

// State at the start of a step: completed assignment, holding set and
// residual capacities.
struct MechanismSnapshot {
  std::vector<LocationIndex> completed;  // kNoLocation for unassigned agents
  std::vector<AgentIndex> held;
  std::vector<int> residual_capacities;
};

template <typename Scalar>
struct ProbeRecord {
  LocationIndex location = kNoLocation;
  Scalar value = Scalar(0);   // mean outcome of the best completion
  Scalar margin = Scalar(0);  // completion total minus n * g_bar
  bool passed = false;
  bool near_tie = false;  // |margin| within 10x tolerance
};

enum class StepAction { kAssigned, kHeld };

template <typename Scalar>
struct StepRecord {
  int step = 0;  // 1-based
  AgentIndex agent = 0;
  std::vector<ProbeRecord<Scalar>> probes;
  StepAction action = StepAction::kHeld;
  LocationIndex location = kNoLocation;  // set when assigned
  MechanismSnapshot before;  // empty unless snapshots are recorded
};

template <typename Scalar>
struct MechanismTrace {
  std::vector<StepRecord<Scalar>> steps;
  // Step n+1 placements of held agents, sorted by agent.
  std::vector<std::pair<AgentIndex, LocationIndex>> final_assignment;
  int probes = 0;       // completion values examined
  int lsap_solves = 0;  // assignment re-optimizations in Steps 1..n+1
  int near_ties = 0;
  Scalar g_max = Scalar(0);
};

template <typename Scalar>
struct MechanismOutcome {
  Matching matching;
  MechanismTrace<Scalar> trace;
  Scalar realized_mean = Scalar(0);
};

inline bool is_permutation_of_agents(const std::vector<AgentIndex>& order, int n) {
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (AgentIndex a : order) {
    if (a < 0 || a >= n || seen[a]) return false;
    seen[a] = 1;
  }
  return true;
}

inline std::vector<AgentIndex> identity_order(int n) {
  std::vector<AgentIndex> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  return order;
}

// `initial` must be an optimal state of the whole instance, as returned by
// optimal_engine(inst). Sharing it saves the Step 0 solve across many runs
// on one instance.
template <typename Scalar>
MechanismOutcome<Scalar> run_mechanism(const BasicInstance<Scalar>& inst,
                                       const MechanismParams<Scalar>& params,
                                       const MechanismOptions& options,
                                       const AssignmentEngine<Scalar>& initial) {
  const int n = inst.num_agents();
  if (!is_permutation_of_agents(params.order, n)) {
    throw InstanceInvalid("priority order is not a permutation of the agents");
  }
  if (!inst.is_assignable()) {
    throw InstanceInvalid("instance infeasible: more agents than capacity");
  }
  if (!std::isfinite(static_cast<double>(params.g_bar))) {
    throw InstanceInvalid("threshold must be finite");
  }
  const Scalar tol = Scalar(options.tolerance);
  const Scalar required = Scalar(n) * params.g_bar;
  const auto& prefs = inst.preferences();

  MechanismOutcome<Scalar> out;
  auto& trace = out.trace;

  if (initial.num_members() != n || initial.capacities() != inst.capacities()) {
    throw InstanceInvalid("initial state does not match instance");
  }

  // Step 0.
  AssignmentEngine<Scalar> engine = initial;
  trace.g_max = n == 0 ? Scalar(0) : engine.total() / Scalar(n);
  if (!meets_threshold(engine.total(), n, params.g_bar, tol)) {
    throw ThresholdInfeasible(static_cast<double>(params.g_bar),
                              static_cast<double>(trace.g_max));
  }

  std::vector<LocationIndex> completed(static_cast<size_t>(n), kNoLocation);
  std::vector<AgentIndex> held;
  Scalar assigned_total(0);
  trace.steps.reserve(static_cast<size_t>(n));

  for (int i = 0; i < n; ++i) {
    const AgentIndex a = params.order[i];
    StepRecord<Scalar> rec;
    rec.step = i + 1;
    rec.agent = a;
    if (options.record_snapshots) {
      rec.before.completed = completed;
      rec.before.held = held;
      rec.before.residual_capacities = engine.capacities();
    }

    std::optional<typename AssignmentEngine<Scalar>::Probe> probe;
    for (LocationIndex l : prefs[a].strict_prefix()) {
      if (engine.capacity(l) == 0) continue;
      const bool at_optimum = engine.location_of(a) == l &&
                              options.mutation != ProbeMutation::kSignFlip;
      Scalar total;
      if (at_optimum) {
        // The current optimal completion already places a at l.
        total = assigned_total + engine.total();
      } else {
        if (!probe) {
          probe.emplace(engine.probe(a));
          ++trace.lsap_solves;
        }
        const Scalar own = options.mutation == ProbeMutation::kSignFlip
                               ? -inst.score(a, l)
                               : inst.score(a, l);
        total = assigned_total + own + probe->completion_total(l);
      }
      ProbeRecord<Scalar> pr;
      pr.location = l;
      pr.margin = total - required;
      pr.value = n == 0 ? Scalar(0) : total / Scalar(n);
      pr.passed = total >= required - tol;
      pr.near_tie = std::abs(pr.margin) <= Scalar(10) * tol;
      ++trace.probes;
      if (pr.near_tie) ++trace.near_ties;
      rec.probes.push_back(pr);
      if (pr.passed) {
        rec.action = StepAction::kAssigned;
        rec.location = l;
        break;
      }
    }

    if (rec.action == StepAction::kAssigned) {
      const LocationIndex l = rec.location;
      if (engine.location_of(a) == l) {
        engine.fix_at_current(a);
      } else {
        AssignmentEngine<Scalar> next =
            probe ? std::move(*probe).commit(l) : engine.probe(a).commit(l);
        engine = std::move(next);
      }
      completed[a] = l;
      assigned_total += inst.score(a, l);
    } else {
      held.push_back(a);
      if (options.mutation == ProbeMutation::kOmitHeldAgents) engine.remove(a);
    }
    trace.steps.push_back(std::move(rec));
  }

  // Step n+1.
  if (!held.empty()) {
    std::vector<std::pair<AgentIndex, LocationIndex>> placed;
    if (options.mutation == ProbeMutation::kOmitHeldAgents) {
      PartialProblem<Scalar> rest;
      rest.agent_subset = held;
      rest.residual_capacities = engine.capacities();
      rest.scores = &inst.outcomes();
      placed = solve_max_assignment(rest).assignment;
    } else {
      // The engine now holds exactly the held agents, optimally placed over
      // the residual capacities.
      placed = canonical_assignment(std::move(engine), held, inst.outcomes());
    }
    ++trace.lsap_solves;
    for (const auto& [a, l] : placed) completed[a] = l;
    trace.final_assignment = std::move(placed);
  }

  out.matching = Matching(std::move(completed));
  out.realized_mean =
      n == 0 ? Scalar(0) : total_score(out.matching, inst) / Scalar(n);
  if constexpr (std::is_same_v<Scalar, double>) {
    if (options.observer) options.observer(inst, params.g_bar, out);
  }
  return out;
}

template <typename Scalar>
MechanismOutcome<Scalar> run_mechanism(const BasicInstance<Scalar>& inst,
                                       const MechanismParams<Scalar>& params,
                                       const MechanismOptions& options = {}) {
  if (!inst.is_assignable()) {
    throw InstanceInvalid("instance infeasible: more agents than capacity");
  }
  return run_mechanism(inst, params, options, optimal_engine(inst));
}

// Locations agent may take given a snapshot: residual capacity left and a
// completion of all unassigned agents reaching the threshold. Sorted by index.
template <typename Scalar>
std::vector<LocationIndex> feasible_locations(const MechanismSnapshot& state,
                                              AgentIndex agent,
                                              const BasicInstance<Scalar>& inst,
                                              Scalar g_bar,
                                              Scalar tolerance = Scalar(kThresholdTolerance)) {
  const int n = inst.num_agents();
  if (static_cast<int>(state.completed.size()) != n ||
      static_cast<int>(state.residual_capacities.size()) != inst.num_locations()) {
    throw InstanceInvalid("snapshot does not match instance");
  }
  if (state.completed[agent] != kNoLocation) {
    throw InstanceInvalid("agent already assigned in snapshot");
  }
  AssignmentEngine<Scalar> engine(inst.outcomes(), state.residual_capacities);
  Scalar assigned(0);
  for (AgentIndex j = 0; j < n; ++j) {
    if (state.completed[j] == kNoLocation) {
      engine.insert(j);
    } else {
      assigned += inst.score(j, state.completed[j]);
    }
  }
  auto probe = engine.probe(agent);
  std::vector<LocationIndex> out;
  for (LocationIndex l = 0; l < inst.num_locations(); ++l) {
    const Scalar rest = probe.completion_total(l);
    if (rest == AssignmentEngine<Scalar>::kMinusInf) continue;
    if (meets_threshold(assigned + inst.score(agent, l) + rest, n, g_bar, tolerance)) {
      out.push_back(l);
    }
  }
  return out;
}

}  // namespace gcpm

#endif  // GCPM_MECHANISM_HPP_
