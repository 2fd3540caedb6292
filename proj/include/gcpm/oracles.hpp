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

// Brute-force references for small instances: exhaustive enumeration of
// feasible matchings, constrained-efficiency and strategy-proofness checks,
// and a threshold-constrained top trading cycles variant that serves as a
// manipulable counterpart to the priority mechanism.

#ifndef GCPM_ORACLES_HPP_
#define GCPM_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/lsap.hpp"
#include "gcpm/mechanism.hpp"

namespace gcpm {

struct EnumerationBudget {
  int max_agents = 10;
  int max_locations = 8;
  int max_total_slots = 40;
  double max_matchings = 1e7;
  // Admissible-report enumeration is limited to this many locations.
  int max_report_locations = 4;
};

// Number of feasible matchings: n! [x^n] prod_l sum_{k <= q_l} x^k / k!.
template <typename Scalar>
double count_feasible_matchings(const BasicInstance<Scalar>& inst) {
  const int n = inst.num_agents();
  std::vector<long double> poly(static_cast<size_t>(n) + 1, 0.0L);
  poly[0] = 1.0L;
  std::vector<long double> inv_fact(static_cast<size_t>(n) + 1, 1.0L);
  for (int k = 1; k <= n; ++k) inv_fact[k] = inv_fact[k - 1] / k;
  for (LocationIndex l = 0; l < inst.num_locations(); ++l) {
    const int q = std::min(inst.capacity(l), n);
    std::vector<long double> next(poly.size(), 0.0L);
    for (int d = 0; d <= n; ++d) {
      if (poly[d] == 0.0L) continue;
      for (int k = 0; k <= q && d + k <= n; ++k) next[d + k] += poly[d] * inv_fact[k];
    }
    poly.swap(next);
  }
  long double fact = 1.0L;
  for (int k = 2; k <= n; ++k) fact *= k;
  return static_cast<double>(std::round(poly[n] * fact));
}

template <typename Scalar>
void check_budget(const BasicInstance<Scalar>& inst, const EnumerationBudget& b) {
  if (inst.num_agents() > b.max_agents || inst.num_locations() > b.max_locations ||
      inst.total_capacity() > b.max_total_slots) {
    throw BudgetExceeded("instance exceeds enumeration budget dimensions");
  }
  if (count_feasible_matchings(inst) > b.max_matchings) {
    throw BudgetExceeded("feasible matching count exceeds enumeration cap");
  }
}

// Calls visit(m) for every feasible matching, in lexicographic order of the
// assignment vector. Stops early when visit returns false.
template <typename Scalar, typename Visitor>
void for_each_feasible_matching(const BasicInstance<Scalar>& inst,
                                const EnumerationBudget& budget, Visitor&& visit) {
  check_budget(inst, budget);
  const int n = inst.num_agents();
  const int m = inst.num_locations();
  std::vector<LocationIndex> cur(static_cast<size_t>(n), kNoLocation);
  std::vector<int> load(static_cast<size_t>(m), 0);
  bool stop = false;
  std::function<void(int)> rec = [&](int i) {
    if (stop) return;
    if (i == n) {
      if (!visit(Matching(cur))) stop = true;
      return;
    }
    for (LocationIndex l = 0; l < m && !stop; ++l) {
      if (load[l] >= inst.capacity(l)) continue;
      ++load[l];
      cur[i] = l;
      rec(i + 1);
      --load[l];
    }
  };
  rec(0);
}

template <typename Scalar>
std::vector<Matching> enumerate_feasible_matchings(const BasicInstance<Scalar>& inst,
                                                   const EnumerationBudget& budget = {}) {
  std::vector<Matching> out;
  for_each_feasible_matching(inst, budget, [&](const Matching& mm) {
    out.push_back(mm);
    return true;
  });
  return out;
}

// Best total score over all feasible matchings (reference for the solver).
template <typename Scalar>
Scalar brute_force_max_total(const BasicInstance<Scalar>& inst,
                             const EnumerationBudget& budget = {}) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for_each_feasible_matching(inst, budget, [&](const Matching& mm) {
    best = std::max(best, total_score(mm, inst));
    return true;
  });
  return best;
}

struct EfficiencyVerdict {
  bool pass = true;
  std::optional<Matching> witness;  // dominating matching on failure
};

template <typename Scalar>
EfficiencyVerdict check_constrained_efficiency(const BasicInstance<Scalar>& inst,
                                               Scalar g_bar, const Matching& m,
                                               const EnumerationBudget& budget = {},
                                               Scalar tolerance = Scalar(kThresholdTolerance)) {
  EfficiencyVerdict v;
  for_each_feasible_matching(inst, budget, [&](const Matching& mu) {
    if (is_g_acceptable(mu, inst, g_bar, tolerance) &&
        pareto_dominates(mu, m, inst.preferences())) {
      v.pass = false;
      v.witness = mu;
      return false;
    }
    return true;
  });
  return v;
}

// Every report allowed by trailing indifference: strict orderings of subsets
// of size 0..|L| except |L|-1.
inline std::vector<AgentPreference> admissible_reports(int num_locations) {
  std::vector<AgentPreference> out;
  std::vector<LocationIndex> cur;
  std::vector<char> used(static_cast<size_t>(num_locations), 0);
  std::function<void(int)> rec = [&](int size) {
    if (static_cast<int>(cur.size()) == size) {
      out.emplace_back(cur, num_locations);
      return;
    }
    for (LocationIndex l = 0; l < num_locations; ++l) {
      if (used[l]) continue;
      used[l] = 1;
      cur.push_back(l);
      rec(size);
      cur.pop_back();
      used[l] = 0;
    }
  };
  for (int size = 0; size <= num_locations; ++size) {
    if (num_locations >= 2 && size == num_locations - 1) continue;
    rec(size);
  }
  return out;
}

struct StrategyProofnessVerdict {
  bool pass = true;
  AgentIndex agent = -1;
  AgentPreference report;
  LocationIndex truthful_location = kNoLocation;
  LocationIndex misreport_location = kNoLocation;
};

// Generic check: `mechanism` maps an instance (with reported preferences) to
// a matching. Gains are judged with the true preferences of `inst`.
template <typename Scalar, typename Mechanism>
StrategyProofnessVerdict check_strategy_proofness_of(const BasicInstance<Scalar>& inst,
                                                     Mechanism&& mechanism,
                                                     const EnumerationBudget& budget = {}) {
  if (inst.num_locations() > budget.max_report_locations ||
      inst.num_agents() > budget.max_agents) {
    throw BudgetExceeded("report enumeration limited to " +
                         std::to_string(budget.max_report_locations) + " locations");
  }
  const auto& truth = inst.preferences();
  const Matching truthful = mechanism(inst);
  const auto reports = admissible_reports(inst.num_locations());
  StrategyProofnessVerdict v;
  for (AgentIndex i = 0; i < inst.num_agents(); ++i) {
    for (const auto& report : reports) {
      if (report == truth[i]) continue;
      const Matching lie = mechanism(inst.with_preferences(truth.with_agent(i, report)));
      if (truth.prefers(i, lie[i], truthful[i])) {
        v.pass = false;
        v.agent = i;
        v.report = report;
        v.truthful_location = truthful[i];
        v.misreport_location = lie[i];
        return v;
      }
    }
  }
  return v;
}

template <typename Scalar>
StrategyProofnessVerdict check_strategy_proofness(const BasicInstance<Scalar>& inst,
                                                  Scalar g_bar,
                                                  const std::vector<AgentIndex>& order,
                                                  const EnumerationBudget& budget = {},
                                                  const MechanismOptions& options = {}) {
  MechanismOptions opts = options;
  opts.record_snapshots = false;
  MechanismParams<Scalar> params{g_bar, order};
  return check_strategy_proofness_of(
      inst,
      [&](const BasicInstance<Scalar>& reported) {
        return run_mechanism(reported, params, opts).matching;
      },
      budget);
}

// Top trading cycles from the outcome-maximizing endowment, executing one
// cycle at a time (the cycle through the lowest agent index first) and
// stopping before the first cycle that would push the mean below g_bar.
template <typename Scalar>
Matching run_constrained_ttc(const BasicInstance<Scalar>& inst, Scalar g_bar,
                             Scalar tolerance = Scalar(kThresholdTolerance)) {
  const int n = inst.num_agents();
  Matching holding = solve_max_matching(inst);
  Scalar total = total_score(holding, inst);
  if (!meets_threshold(total, n, g_bar, tolerance)) {
    throw ThresholdInfeasible(static_cast<double>(g_bar),
                              static_cast<double>(total / Scalar(std::max(n, 1))));
  }
  const auto& prefs = inst.preferences();
  std::vector<char> active(static_cast<size_t>(n), 1);
  int remaining = n;
  while (remaining > 0) {
    // Each active agent points at the active holder of its favourite held
    // location; indifference prefers keeping its own, then lowest index.
    std::vector<AgentIndex> points(static_cast<size_t>(n), -1);
    for (AgentIndex a = 0; a < n; ++a) {
      if (!active[a]) continue;
      AgentIndex target = a;
      for (AgentIndex b = 0; b < n; ++b) {
        if (!active[b] || b == target) continue;
        const LocationIndex lb = holding[b];
        const LocationIndex lt = holding[target];
        if (prefs.prefers(a, lb, lt) ||
            (target != a && !prefs.prefers(a, lt, lb) && lb < lt)) {
          target = b;
        }
      }
      points[a] = target;
    }
    // Collect every cycle of the pointer graph; execute the one holding the
    // lowest agent index.
    std::vector<AgentIndex> best_cycle;
    std::vector<int> color(static_cast<size_t>(n), 0);
    for (AgentIndex s = 0; s < n; ++s) {
      if (!active[s] || color[s]) continue;
      std::vector<AgentIndex> path;
      AgentIndex v = s;
      while (color[v] == 0) {
        color[v] = 1;
        path.push_back(v);
        v = points[v];
      }
      if (color[v] == 1) {
        auto it = std::find(path.begin(), path.end(), v);
        std::vector<AgentIndex> cycle(it, path.end());
        const AgentIndex lo = *std::min_element(cycle.begin(), cycle.end());
        if (best_cycle.empty() ||
            lo < *std::min_element(best_cycle.begin(), best_cycle.end())) {
          best_cycle = cycle;
        }
      }
      for (AgentIndex p : path) color[p] = 2;
    }
    Matching next = holding;
    for (AgentIndex a : best_cycle) next[a] = holding[points[a]];
    const Scalar next_total = total_score(next, inst);
    if (!meets_threshold(next_total, n, g_bar, tolerance)) break;
    holding = next;
    for (AgentIndex a : best_cycle) {
      active[a] = 0;
      --remaining;
    }
  }
  return holding;
}

// Two agents, three unit-capacity locations A, B, C; both rank A first.
inline Instance two_agent_example() {
  ScoreMatrix<double> g(2, 3);
  g << 0.1, 0.5, 0.9,  //
      0.1, 0.9, 0.5;
  return Instance({"A", "B", "C"}, {1, 1, 1}, g,
                  PreferenceProfile::FromPrefixes({{0, 1, 2}, {0, 2, 1}}, 3));
}
inline constexpr double kTwoAgentThreshold = 0.45;

// Three agents and locations on which constrained TTC can be manipulated by
// agent 0. Scores are constructed; the defining properties are re-verified by
// enumeration and a violation throws std::logic_error.
inline Instance ttc_counterexample() {
  ScoreMatrix<double> g(3, 3);
  g << 0.9, 0.1, 0.6,  //
      0.1, 0.8, 0.2,   //
      0.4, 0.2, 0.7;
  Instance inst({"A", "B", "C"}, {1, 1, 1}, g,
                PreferenceProfile::FromPrefixes({{1, 2, 0}, {0, 1, 2}, {0, 2, 1}}, 3));
  const Matching best({0, 1, 2});
  const double best_total = total_score(best, inst);
  int ties = 0;
  for (const auto& mu : enumerate_feasible_matchings(inst)) {
    const double t = total_score(mu, inst);
    if (t > best_total + 1e-12) throw std::logic_error("fixture: {A,B,C} not optimal");
    if (std::abs(t - best_total) <= 1e-12) ++ties;
  }
  if (ties != 1) throw std::logic_error("fixture: optimum not unique");
  if (total_score(Matching({1, 0, 2}), inst) / 3 >= 0.5) {
    throw std::logic_error("fixture: swapping agents 0 and 1 must break the threshold");
  }
  if (total_score(Matching({2, 1, 0}), inst) / 3 < 0.5) {
    throw std::logic_error("fixture: misreport outcome must meet the threshold");
  }
  return inst;
}
inline constexpr double kTtcThreshold = 0.5;

// Random small instance for property suites.
struct SmallInstanceSpec {
  int min_agents = 2, max_agents = 4;
  int min_locations = 2, max_locations = 4;
  int min_capacity = 1, max_capacity = 2;
  double grid_step = 0.05;  // scores are k * grid_step in [0, 1]
};

inline Instance random_small_instance(std::mt19937_64& rng, const SmallInstanceSpec& spec) {
  auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  const int m = uniform_int(spec.min_locations, spec.max_locations);
  std::vector<int> caps(static_cast<size_t>(m));
  for (int& q : caps) q = uniform_int(spec.min_capacity, spec.max_capacity);
  const int slots = std::accumulate(caps.begin(), caps.end(), 0);
  const int hi = std::min(spec.max_agents, slots);
  const int n = uniform_int(std::min(spec.min_agents, hi), hi);
  const int steps = static_cast<int>(std::lround(1.0 / spec.grid_step));
  ScoreMatrix<double> g(n, m);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < m; ++l) g(i, l) = uniform_int(0, steps) * spec.grid_step;
  }
  std::vector<std::vector<LocationIndex>> prefixes;
  for (int i = 0; i < n; ++i) {
    std::vector<LocationIndex> all(static_cast<size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    int size = uniform_int(0, m);
    if (m >= 2 && size == m - 1) size = m;
    all.resize(static_cast<size_t>(size));
    prefixes.push_back(all);
  }
  std::vector<std::string> names;
  for (int l = 0; l < m; ++l) names.push_back(std::string(1, static_cast<char>('A' + l)));
  return Instance(names, caps, g, PreferenceProfile::FromPrefixes(prefixes, m));
}

inline std::vector<std::vector<AgentIndex>> all_orders(int n) {
  std::vector<std::vector<AgentIndex>> out;
  auto order = identity_order(n);
  do {
    out.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

struct SuiteItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::vector<SuiteItem> items;
  bool all_pass() const {
    return std::all_of(items.begin(), items.end(), [](const SuiteItem& i) { return i.pass; });
  }
};

// Worked examples plus a seeded batch of small instances for the
// efficiency property.
inline SuiteReport verify_mechanism_example_suite(const MechanismOptions& options = {},
                                                  int efficiency_instances = 60,
                                                  std::uint64_t seed = 20240501) {
  SuiteReport report;
  MechanismOptions opts = options;
  const Instance ex = two_agent_example();
  const double g_bar = kTwoAgentThreshold;
  auto run = [&](const Instance& inst, double gb, std::vector<AgentIndex> order) {
    return run_mechanism(inst, MechanismParams<double>{gb, std::move(order)}, opts).matching;
  };
  auto describe = [](const Instance& inst, const Matching& m) {
    std::string s = "{";
    for (AgentIndex i = 0; i < m.num_agents(); ++i) {
      if (i) s += ", ";
      s += std::to_string(i + 1) + "->" + inst.location_name(m[i]);
    }
    return s + "}";
  };

  const Matching first12 = run(ex, g_bar, {0, 1});
  report.items.push_back({"two-agent example, order (1,2)", first12 == Matching({0, 1}),
                          describe(ex, first12)});
  const Matching first21 = run(ex, g_bar, {1, 0});
  report.items.push_back({"two-agent example, order (2,1)", first21 == Matching({2, 0}),
                          describe(ex, first21)});

  {
    const Matching other({1, 2});
    const bool feasible = is_feasible(other, ex);
    const bool acceptable = is_g_acceptable(other, ex, g_bar);
    const bool efficient = check_constrained_efficiency(ex, g_bar, other).pass;
    const bool produced = other == first12 || other == first21;
    report.items.push_back({"non-characterization {1->B, 2->C}",
                            feasible && acceptable && efficient && !produced,
                            "feasible=" + std::to_string(feasible) +
                                " acceptable=" + std::to_string(acceptable) +
                                " efficient=" + std::to_string(efficient) +
                                " produced=" + std::to_string(produced)});
  }

  {
    std::mt19937_64 rng(seed);
    SmallInstanceSpec spec;
    spec.min_agents = 3;
    bool ok = true;
    std::string detail = std::to_string(efficiency_instances) + " instances";
    for (int k = 0; k < efficiency_instances && ok; ++k) {
      const Instance inst = random_small_instance(rng, spec);
      const double gmax = solve_max_matching_value(inst);
      const double gb = std::uniform_real_distribution<double>(0.0, gmax)(rng);
      for (const auto& order : all_orders(inst.num_agents())) {
        const Matching m = run(inst, gb, order);
        if (!is_feasible(m, inst) || !is_g_acceptable(m, inst, gb) ||
            !check_constrained_efficiency(inst, gb, m).pass) {
          ok = false;
          detail = "instance " + std::to_string(k) + " fails";
          break;
        }
      }
    }
    report.items.push_back({"constrained efficiency on random small instances", ok, detail});
  }

  {
    bool ok = true;
    for (auto order : {std::vector<AgentIndex>{0, 1}, std::vector<AgentIndex>{1, 0}}) {
      ok = ok && check_strategy_proofness(ex, g_bar, order, {}, opts).pass;
    }
    report.items.push_back({"strategy-proofness on two-agent example", ok, ""});
  }

  {
    const Instance ttc = ttc_counterexample();
    const Matching truthful = run_constrained_ttc(ttc, kTtcThreshold);
    auto verdict = check_strategy_proofness_of(ttc, [](const Instance& reported) {
      return run_constrained_ttc(reported, kTtcThreshold);
    });
    const bool ok = truthful == Matching({0, 1, 2}) && !verdict.pass && verdict.agent == 0 &&
                    ttc.preferences().prefers(0, verdict.misreport_location,
                                              verdict.truthful_location);
    report.items.push_back({"constrained TTC is manipulable", ok,
                            verdict.pass ? "no manipulation found"
                                         : "agent " + std::to_string(verdict.agent + 1) +
                                               " gets " +
                                               ttc.location_name(verdict.misreport_location) +
                                               " instead of " +
                                               ttc.location_name(verdict.truthful_location)});
  }
  return report;
}

// Bound on re-optimizations in one run: n (|L| - 2) + 1.
inline long long solve_bound(int num_agents, int num_locations) {
  return static_cast<long long>(num_agents) * (num_locations - 2) + 1;
}

// Empty when the run is feasible, meets the threshold and stays within the
// re-optimization bound; otherwise names the first violated invariant.
template <typename Scalar>
std::string run_invariant_violation(const BasicInstance<Scalar>& inst, Scalar g_bar,
                                    const MechanismOutcome<Scalar>& out,
                                    Scalar tolerance = Scalar(kThresholdTolerance)) {
  if (out.matching.num_agents() != inst.num_agents() || !is_feasible(out.matching, inst)) {
    return "infeasible matching";
  }
  if (!is_g_acceptable(out.matching, inst, g_bar, tolerance)) {
    return "mean below threshold";
  }
  if (out.trace.lsap_solves > solve_bound(inst.num_agents(), inst.num_locations())) {
    return "re-optimizations " + std::to_string(out.trace.lsap_solves) + " exceed bound " +
           std::to_string(solve_bound(inst.num_agents(), inst.num_locations()));
  }
  return {};
}

// Tally of run invariants over many runs; plug into MechanismOptions::observer.
class RunInvariantMonitor {
 public:
  explicit RunInvariantMonitor(double tolerance = kThresholdTolerance)
      : tolerance_(tolerance) {}

  void observe(const Instance& inst, double g_bar, const MechanismOutcome<double>& out) {
    const std::string why = run_invariant_violation(inst, g_bar, out, tolerance_);
    std::lock_guard<std::mutex> lock(mu_);
    ++runs_;
    if (why.empty()) return;
    if (why == "infeasible matching") {
      ++infeasible_;
    } else if (why == "mean below threshold") {
      ++below_threshold_;
    } else {
      ++over_bound_;
      if (inst.num_locations() <= 2) ++over_bound_two_locations_;
    }
    if (first_.empty()) {
      first_ = why + " (n=" + std::to_string(inst.num_agents()) +
               ", |L|=" + std::to_string(inst.num_locations()) + ")";
    }
  }

  auto callback() {
    return [this](const Instance& inst, double g_bar, const MechanismOutcome<double>& out) {
      observe(inst, g_bar, out);
    };
  }

  long long runs() const { return runs_; }
  long long infeasible() const { return infeasible_; }
  long long below_threshold() const { return below_threshold_; }
  long long over_bound() const { return over_bound_; }
  long long over_bound_two_locations() const { return over_bound_two_locations_; }
  const std::string& first_violation() const { return first_; }
  bool clean() const { return infeasible_ + below_threshold_ + over_bound_ == 0; }

 private:
  double tolerance_;
  std::mutex mu_;
  long long runs_ = 0;
  long long infeasible_ = 0;
  long long below_threshold_ = 0;
  long long over_bound_ = 0;
  long long over_bound_two_locations_ = 0;
  std::string first_;
};

struct PropertySuiteOptions {
  int instances = 100;
  SmallInstanceSpec spec;
  std::uint64_t seed = 1;
  bool efficiency = true;
  bool strategy_proofness = true;
  // Strategy-proofness under every priority order instead of one random one.
  bool strategy_proofness_all_orders = false;
  MechanismOptions mechanism;
  EnumerationBudget budget;
};

struct PropertySuiteReport {
  int instances = 0;
  long long runs = 0;  // runs checked for efficiency and invariants
  int efficiency_failures = 0;
  int strategy_proofness_failures = 0;
  int invariant_failures = 0;  // infeasible or below the threshold
  long long bound_exceeded = 0;  // runs over n (|L| - 2) + 1 re-optimizations
  std::string first_efficiency_failure;
  std::string first_strategy_proofness_failure;
  std::string first_invariant_failure;

  bool pass() const {
    return efficiency_failures + strategy_proofness_failures + invariant_failures == 0;
  }
};

// Random small instances at a random threshold in [0, g_max].
// Efficiency is checked under every priority order.
inline PropertySuiteReport run_property_suite(const PropertySuiteOptions& o) {
  PropertySuiteReport r;
  std::mt19937_64 rng(o.seed);
  MechanismOptions opts = o.mechanism;
  opts.record_snapshots = false;
  auto note = [](std::string& slot, const std::string& what) {
    if (slot.empty()) slot = what;
  };
  for (int k = 0; k < o.instances; ++k) {
    const Instance inst = random_small_instance(rng, o.spec);
    const double gmax = solve_max_matching_value(inst);
    // A fifth of the draws sit exactly at g_max, where ties are tightest.
    const double u = std::uniform_real_distribution<double>(0.0, 1.25)(rng);
    const double g_bar = u >= 1.0 ? gmax : u * gmax;
    const auto orders = all_orders(inst.num_agents());
    const auto& sp_order = orders[std::uniform_int_distribution<size_t>(
        0, orders.size() - 1)(rng)];
    ++r.instances;
    const std::string tag = "instance " + std::to_string(k);

    for (const auto& order : orders) {
      const auto out = run_mechanism(inst, MechanismParams<double>{g_bar, order}, opts);
      ++r.runs;
      if (!is_feasible(out.matching, inst) ||
          !is_g_acceptable(out.matching, inst, g_bar, opts.tolerance)) {
        ++r.invariant_failures;
        note(r.first_invariant_failure, tag + ": " +
                                            run_invariant_violation(inst, g_bar, out,
                                                                    opts.tolerance));
      }
      if (out.trace.lsap_solves > solve_bound(inst.num_agents(), inst.num_locations())) {
        ++r.bound_exceeded;
      }
      if (o.efficiency &&
          !check_constrained_efficiency(inst, g_bar, out.matching, o.budget, opts.tolerance)
               .pass) {
        ++r.efficiency_failures;
        note(r.first_efficiency_failure,
             tag + ": Pareto-dominating acceptable matching exists");
        break;
      }
    }
    if (o.strategy_proofness) {
      for (const auto& order : orders) {
        if (!o.strategy_proofness_all_orders && order != sp_order) continue;
        const auto v = check_strategy_proofness(inst, g_bar, order, o.budget, opts);
        if (!v.pass) {
          ++r.strategy_proofness_failures;
          note(r.first_strategy_proofness_failure,
               tag + ": agent " + std::to_string(v.agent + 1) + " gains by misreporting");
          break;
        }
      }
    }
  }
  return r;
}

}  // namespace gcpm

#endif  // GCPM_ORACLES_HPP_
