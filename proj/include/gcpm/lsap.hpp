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

// Maximum-total-score assignment of a set of agents to capacitated locations.
//
// The column-replicated assignment problem (one column per capacity slot) is
// solved in its transportation form: slots of one location are
// interchangeable, so the residual graph collapses onto the locations. An arc
// a -> b carries the best score change of moving one agent currently at a over
// to b. Starting from an optimal state, every elementary change (insert an
// agent, remove an agent, add or remove one unit of capacity) is restored to
// optimality by a single maximum-gain chain ending at a location with slack,
// exactly as one augmentation of a successive-shortest-path min-cost flow.
//
// The engine keeps that optimal state alive so that the mechanism can price
// "agent a takes location l" for every l with one chain search.

#ifndef GCPM_LSAP_HPP_
#define GCPM_LSAP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gcpm/core.hpp"

namespace gcpm {

template <typename Scalar>
class AssignmentEngine {
 private:
  // Best gain of a chain from each location to the target set and the next
  // hop on that chain. gain is -inf where no chain exists.
  struct Chains {
    std::vector<Scalar> gain;
    std::vector<LocationIndex> next;
    std::vector<AgentIndex> mover;  // agent moving along next hop
    std::vector<char> target;
  };

 public:
  using Matrix = ScoreMatrix<Scalar>;

  static constexpr Scalar kMinusInf = -std::numeric_limits<Scalar>::infinity();

  // Empty problem over all rows of `scores`; `capacities` are the residual
  // capacities available to the agents inserted later.
  AssignmentEngine(const Matrix& scores, std::vector<int> capacities)
      : scores_(&scores),
        capacity_(std::move(capacities)),
        load_(capacity_.size(), 0),
        location_(static_cast<size_t>(scores.rows()), kNoLocation) {
    if (static_cast<Eigen::Index>(capacity_.size()) != scores.cols()) {
      throw InstanceInvalid("capacity vector does not match score columns");
    }
    for (int q : capacity_) {
      if (q < 0) throw InstanceInvalid("negative residual capacity");
    }
    const Scalar scale =
        scores.size() == 0 ? Scalar(0) : scores.cwiseAbs().maxCoeff();
    epsilon_ = std::numeric_limits<Scalar>::epsilon() * Scalar(1e4) *
               (Scalar(1) + scale);
  }

  int num_locations() const { return static_cast<int>(capacity_.size()); }
  int num_members() const { return members_; }
  int capacity(LocationIndex l) const { return capacity_[l]; }
  int load(LocationIndex l) const { return load_[l]; }
  const std::vector<int>& capacities() const { return capacity_; }
  LocationIndex location_of(AgentIndex a) const { return location_[a]; }
  bool contains(AgentIndex a) const { return location_[a] != kNoLocation; }
  Scalar total() const { return total_; }
  // Slack in gain comparisons; chains gaining less than this are ignored.
  Scalar epsilon() const { return epsilon_; }

  // Adds agent a and re-optimizes. Throws InfeasibleProblem when no capacity
  // is left.
  void insert(AgentIndex a) {
    if (contains(a)) throw std::logic_error("agent already in problem");
    Chains chains = search_to_slack();
    LocationIndex best = kNoLocation;
    Scalar best_value = kMinusInf;
    for (LocationIndex l = 0; l < num_locations(); ++l) {
      if (capacity_[l] == 0) continue;
      const Scalar tail = load_[l] < capacity_[l] ? Scalar(0) : chains.gain[l];
      if (tail == kMinusInf) continue;
      const Scalar value = score(a, l) + tail;
      if (best == kNoLocation || value > best_value + epsilon_) {
        best = l;
        best_value = value;
      }
    }
    if (best == kNoLocation) {
      throw InfeasibleProblem("instance infeasible: no residual capacity");
    }
    if (load_[best] == capacity_[best]) apply_chain(chains, best);
    place(a, best);
    recompute_total();
  }

  // Removes agent a (its slot becomes free) and re-optimizes.
  void remove(AgentIndex a) {
    const LocationIndex from = location_[a];
    if (from == kNoLocation) throw std::logic_error("agent not in problem");
    unplace(a);
    // The freed unit may let another agent improve: best chain into `from`.
    std::vector<char> target(capacity_.size(), 0);
    target[from] = 1;
    Chains chains = search(target);
    LocationIndex start = kNoLocation;
    Scalar best = epsilon_;
    for (LocationIndex l = 0; l < num_locations(); ++l) {
      if (l != from && chains.gain[l] > best) {
        best = chains.gain[l];
        start = l;
      }
    }
    if (start != kNoLocation) apply_chain(chains, start);
    recompute_total();
  }

  // Result of taking one agent out of an optimal state. Prices every
  // location for that agent and can commit one of them.
  class Probe {
   public:
    // Optimal total of the remaining members when one unit of l is consumed
    // by the probed agent; -inf if l has no residual capacity.
    Scalar completion_total(LocationIndex l) const {
      const AssignmentEngine& e = rest_;
      if (e.capacity_[l] == 0) return kMinusInf;
      if (e.load_[l] < e.capacity_[l]) return e.total_;
      const Scalar g = chains_.gain[l];
      return g == kMinusInf ? kMinusInf : e.total_ + g;
    }

    AgentIndex agent() const { return agent_; }

    // State after the probed agent is fixed at l (it leaves the problem and
    // one unit of l is consumed).
    AssignmentEngine commit(LocationIndex l) const& {
      AssignmentEngine e = rest_;
      e.consume(l, chains_);
      return e;
    }
    AssignmentEngine commit(LocationIndex l) && {
      rest_.consume(l, chains_);
      return std::move(rest_);
    }

   private:
    friend class AssignmentEngine;
    Probe(AgentIndex agent, AssignmentEngine rest)
        : agent_(agent), rest_(std::move(rest)) {
      chains_ = rest_.search_to_slack();
    }

    AgentIndex agent_;
    AssignmentEngine rest_;
    Chains chains_;
  };

  Probe probe(AgentIndex a) const {
    AssignmentEngine rest = *this;
    rest.remove(a);
    return Probe(a, std::move(rest));
  }

  // Fixes agent a at its current location: it leaves the problem together
  // with the unit it occupies. The rest of an optimal state stays optimal.
  void fix_at_current(AgentIndex a) {
    const LocationIndex l = location_[a];
    if (l == kNoLocation) throw std::logic_error("agent not in problem");
    unplace(a);
    --capacity_[l];
    recompute_total();
  }

  // Consume one unit of capacity at l without placing anybody there.
  void consume_capacity(LocationIndex l) { consume(l, search_to_slack()); }

 private:
  Scalar score(AgentIndex a, LocationIndex l) const { return (*scores_)(a, l); }

  void place(AgentIndex a, LocationIndex l) {
    location_[a] = l;
    ++load_[l];
    ++members_;
  }
  void unplace(AgentIndex a) {
    --load_[location_[a]];
    location_[a] = kNoLocation;
    --members_;
  }

  void recompute_total() {
    total_ = Scalar(0);
    for (size_t a = 0; a < location_.size(); ++a) {
      if (location_[a] != kNoLocation) {
        total_ += score(static_cast<AgentIndex>(a), location_[a]);
      }
    }
  }

  // Lower capacity at l by one and evict along the given chain if l was full.
  void consume(LocationIndex l, const Chains& chains) {
    if (capacity_[l] == 0) throw std::logic_error("no residual capacity at location");
    if (load_[l] == capacity_[l]) {
      if (chains.gain[l] == kMinusInf) {
        throw InfeasibleProblem("instance infeasible: cannot free a unit");
      }
      apply_chain(chains, l);
    }
    --capacity_[l];
    recompute_total();
  }

  Chains search_to_slack() const {
    std::vector<char> target(capacity_.size(), 0);
    for (size_t l = 0; l < capacity_.size(); ++l) {
      target[l] = load_[l] < capacity_[l];
    }
    return search(target);
  }

  // Longest-gain chains into the target set (label-correcting, reverse).
  // The residual graph has no positive cycle at an optimum, so labels settle.
  Chains search(const std::vector<char>& target) const {
    const int m = num_locations();
    const auto mm = static_cast<size_t>(m) * static_cast<size_t>(m);
    // Condensed arcs stored by head: arc[v * m + u] is the best gain of moving
    // one agent from u to v; ties keep the lowest agent.
    thread_local std::vector<Scalar> arc;
    thread_local std::vector<AgentIndex> via;
    thread_local std::vector<LocationIndex> sources;
    thread_local std::vector<LocationIndex> ring;
    arc.assign(mm, kMinusInf);
    via.resize(mm);
    sources.clear();
    for (size_t k = 0; k < location_.size(); ++k) {
      const LocationIndex a = location_[k];
      if (a == kNoLocation) continue;
      const Scalar* row = scores_->data() + k * static_cast<size_t>(scores_->cols());
      const Scalar here = row[a];
      for (LocationIndex b = 0; b < m; ++b) {
        if (b == a) continue;
        const Scalar w = row[b] - here;
        Scalar& cur = arc[static_cast<size_t>(b) * m + a];
        if (w > cur) {
          cur = w;
          via[static_cast<size_t>(b) * m + a] = static_cast<AgentIndex>(k);
        }
      }
    }
    for (LocationIndex l = 0; l < m; ++l) {
      if (load_[l] > 0 && !target[l]) sources.push_back(l);
    }

    Chains c;
    c.gain.assign(m, kMinusInf);
    c.next.assign(m, kNoLocation);
    c.mover.assign(m, -1);
    c.target = target;
    // Every location is queued at most once at a time, so a ring of m slots
    // is enough.
    ring.resize(static_cast<size_t>(std::max(m, 1)));
    std::vector<char> queued(m, 0);
    size_t head = 0;
    size_t size = 0;
    auto push = [&](LocationIndex v) {
      ring[(head + size) % ring.size()] = v;
      ++size;
      queued[v] = 1;
    };
    for (LocationIndex t = 0; t < m; ++t) {
      if (target[t]) {
        c.gain[t] = Scalar(0);
        push(t);
      }
    }
    long long budget = 4LL * m * m + 16;
    while (size > 0) {
      const LocationIndex v = ring[head];
      head = (head + 1) % ring.size();
      --size;
      queued[v] = 0;
      const Scalar base = c.gain[v];
      const Scalar* into = arc.data() + static_cast<size_t>(v) * m;
      for (LocationIndex u : sources) {
        const Scalar w = into[u];
        if (w == kMinusInf) continue;
        const Scalar cand = w + base;
        if (c.gain[u] == kMinusInf || cand > c.gain[u] + epsilon_) {
          c.gain[u] = cand;
          c.next[u] = v;
          c.mover[u] = via[static_cast<size_t>(v) * m + u];
          if (!queued[u]) push(u);
        }
      }
      if (--budget < 0) throw std::logic_error("assignment state is not optimal");
    }
    return c;
  }

  // Walks the chain from `start`, moving one agent per hop.
  void apply_chain(const Chains& c, LocationIndex start) {
    LocationIndex cur = start;
    int hops = 0;
    while (!c.target[cur]) {
      const LocationIndex nxt = c.next[cur];
      const AgentIndex mover = c.mover[cur];
      if (nxt == kNoLocation || location_[mover] != cur || ++hops > num_locations()) {
        throw std::logic_error("broken augmenting chain");
      }
      --load_[cur];
      ++load_[nxt];
      location_[mover] = nxt;
      cur = nxt;
    }
  }

  const Matrix* scores_;
  std::vector<int> capacity_;
  std::vector<int> load_;
  std::vector<LocationIndex> location_;
  int members_ = 0;
  Scalar total_ = Scalar(0);
  Scalar epsilon_ = Scalar(0);
};

// Agents {i..n} u N_i with residual capacities q^i.
template <typename Scalar>
struct PartialProblem {
  std::vector<AgentIndex> agent_subset;
  std::vector<int> residual_capacities;
  const ScoreMatrix<Scalar>* scores = nullptr;
};

template <typename Scalar>
struct SolveResult {
  Scalar total = Scalar(0);
  // (agent, location) sorted by agent.
  std::vector<std::pair<AgentIndex, LocationIndex>> assignment;

  LocationIndex location_of(AgentIndex a) const {
    auto it = std::lower_bound(
        assignment.begin(), assignment.end(), a,
        [](const auto& p, AgentIndex x) { return p.first < x; });
    return it != assignment.end() && it->first == a ? it->second : kNoLocation;
  }
};

// Turns an optimal state into the lexicographically smallest optimal
// assignment (agent ascending, location ascending). Consumes the engine.
template <typename Scalar>
std::vector<std::pair<AgentIndex, LocationIndex>> canonical_assignment(
    AssignmentEngine<Scalar> engine, std::vector<AgentIndex> agents,
    const ScoreMatrix<Scalar>& scores) {
  std::sort(agents.begin(), agents.end());
  std::vector<std::pair<AgentIndex, LocationIndex>> out;
  out.reserve(agents.size());
  for (AgentIndex a : agents) {
    const Scalar opt = engine.total();
    const Scalar tol = Scalar(1e-11) * (Scalar(1) + std::abs(opt));
    auto probe = engine.probe(a);
    LocationIndex chosen = engine.location_of(a);
    for (LocationIndex l = 0; l < engine.num_locations(); ++l) {
      const Scalar rest = probe.completion_total(l);
      if (rest == AssignmentEngine<Scalar>::kMinusInf) continue;
      if (scores(a, l) + rest >= opt - tol) {
        chosen = l;
        break;
      }
    }
    out.emplace_back(a, chosen);
    engine = std::move(probe).commit(chosen);
  }
  return out;
}

template <typename Scalar>
SolveResult<Scalar> solve_max_assignment(const PartialProblem<Scalar>& p) {
  if (p.scores == nullptr) throw InstanceInvalid("partial problem has no scores");
  const auto& scores = *p.scores;
  long long slots = 0;
  for (int q : p.residual_capacities) slots += q;
  if (static_cast<long long>(p.agent_subset.size()) > slots) {
    throw InfeasibleProblem("instance infeasible: " +
                            std::to_string(p.agent_subset.size()) +
                            " agents for " + std::to_string(slots) + " slots");
  }
  std::vector<AgentIndex> agents = p.agent_subset;
  std::sort(agents.begin(), agents.end());
  if (std::adjacent_find(agents.begin(), agents.end()) != agents.end()) {
    throw InstanceInvalid("duplicate agent in partial problem");
  }
  for (AgentIndex a : agents) {
    if (a < 0 || a >= scores.rows()) throw InstanceInvalid("agent index out of range");
  }
  AssignmentEngine<Scalar> engine(scores, p.residual_capacities);
  for (AgentIndex a : agents) engine.insert(a);

  SolveResult<Scalar> result;
  result.assignment = canonical_assignment(std::move(engine), agents, scores);
  for (const auto& [a, l] : result.assignment) result.total += scores(a, l);
  return result;
}

// Optimal engine state for the whole instance (Step 0 / G_1(q^1)).
template <typename Scalar>
AssignmentEngine<Scalar> optimal_engine(const BasicInstance<Scalar>& inst) {
  if (!inst.is_assignable()) {
    throw InfeasibleProblem("instance infeasible: " +
                            std::to_string(inst.num_agents()) + " agents for " +
                            std::to_string(inst.total_capacity()) + " slots");
  }
  AssignmentEngine<Scalar> engine(inst.outcomes(), inst.capacities());
  for (AgentIndex a = 0; a < inst.num_agents(); ++a) engine.insert(a);
  return engine;
}

// Lexicographically smallest outcome-maximizing matching of the instance.
template <typename Scalar>
Matching solve_max_matching(const BasicInstance<Scalar>& inst) {
  PartialProblem<Scalar> p;
  p.agent_subset.resize(static_cast<size_t>(inst.num_agents()));
  for (AgentIndex a = 0; a < inst.num_agents(); ++a) p.agent_subset[a] = a;
  p.residual_capacities = inst.capacities();
  p.scores = &inst.outcomes();
  if (!inst.is_assignable()) {
    throw InfeasibleProblem("instance infeasible");
  }
  auto r = solve_max_assignment(p);
  std::vector<LocationIndex> m(static_cast<size_t>(inst.num_agents()));
  for (const auto& [a, l] : r.assignment) m[a] = l;
  return Matching(std::move(m));
}

// g^max = G_1(q^1) / n.
template <typename Scalar>
Scalar solve_max_matching_value(const BasicInstance<Scalar>& inst) {
  if (inst.num_agents() == 0) return Scalar(0);
  return optimal_engine(inst).total() / Scalar(inst.num_agents());
}

}  // namespace gcpm

#endif  // GCPM_LSAP_HPP_
