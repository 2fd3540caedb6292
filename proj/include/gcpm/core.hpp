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

// Instance data model shared by every other module: outcome scores,
// preferences with trailing indifference, matchings and the metrics computed
// on them.

#ifndef GCPM_CORE_HPP_
#define GCPM_CORE_HPP_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <compare>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gcpm/errors.hpp"

namespace gcpm {

using AgentIndex = int;
using LocationIndex = int;

inline constexpr LocationIndex kNoLocation = -1;

// Absolute tolerance applied to *total* scores when testing a threshold,
// i.e. sum >= n * g_bar - kThresholdTolerance.
inline constexpr double kThresholdTolerance = 1e-9;

template <typename Scalar>
using ScoreMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Strictly ranked prefix of locations, best first. Locations not listed are
// mutually indifferent and worse than every listed one.
class AgentPreference {
 public:
  AgentPreference() = default;

  // A prefix of length num_locations - 1 is completed with the one missing
  // location, since a lone trailing location is implicitly ranked last.
  AgentPreference(std::vector<LocationIndex> strict_prefix, int num_locations)
      : strict_prefix_(std::move(strict_prefix)) {
    std::vector<char> seen(static_cast<size_t>(num_locations), 0);
    for (LocationIndex l : strict_prefix_) {
      if (l < 0 || l >= num_locations) {
        throw InstanceInvalid("preference references unknown location " +
                              std::to_string(l));
      }
      if (seen[l]) {
        throw InstanceInvalid("preference lists location " + std::to_string(l) +
                              " twice");
      }
      seen[l] = 1;
    }
    if (num_locations >= 2 &&
        static_cast<int>(strict_prefix_.size()) == num_locations - 1) {
      for (LocationIndex l = 0; l < num_locations; ++l) {
        if (!seen[l]) strict_prefix_.push_back(l);
      }
    }
  }

  std::span<const LocationIndex> strict_prefix() const { return strict_prefix_; }
  int size() const { return static_cast<int>(strict_prefix_.size()); }

  friend bool operator==(const AgentPreference&, const AgentPreference&) = default;

 private:
  std::vector<LocationIndex> strict_prefix_;
};

// Preferences of all agents plus a dense rank table for O(1) comparisons.
// Rank is 0-based; every unlisted location shares rank num_locations.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;

  PreferenceProfile(std::vector<AgentPreference> agents, int num_locations)
      : num_locations_(num_locations), agents_(std::move(agents)) {
    ranks_.setConstant(static_cast<Eigen::Index>(agents_.size()), num_locations,
                       num_locations);
    for (size_t i = 0; i < agents_.size(); ++i) {
      auto prefix = agents_[i].strict_prefix();
      for (size_t r = 0; r < prefix.size(); ++r) {
        if (prefix[r] < 0 || prefix[r] >= num_locations) {
          throw InstanceInvalid("preference references unknown location");
        }
        ranks_(static_cast<Eigen::Index>(i), prefix[r]) = static_cast<int>(r);
      }
    }
  }

  // Convenience: build from raw prefixes, normalizing each one.
  static PreferenceProfile FromPrefixes(
      const std::vector<std::vector<LocationIndex>>& prefixes,
      int num_locations) {
    std::vector<AgentPreference> agents;
    agents.reserve(prefixes.size());
    for (const auto& p : prefixes) agents.emplace_back(p, num_locations);
    return PreferenceProfile(std::move(agents), num_locations);
  }

  int num_agents() const { return static_cast<int>(agents_.size()); }
  int num_locations() const { return num_locations_; }
  const AgentPreference& operator[](AgentIndex i) const { return agents_[i]; }
  const std::vector<AgentPreference>& agents() const { return agents_; }

  int rank(AgentIndex i, LocationIndex l) const { return ranks_(i, l); }
  bool is_listed(AgentIndex i, LocationIndex l) const {
    return ranks_(i, l) < num_locations_;
  }
  // a strictly better than b for agent i.
  bool prefers(AgentIndex i, LocationIndex a, LocationIndex b) const {
    return ranks_(i, a) < ranks_(i, b);
  }
  bool weakly_prefers(AgentIndex i, LocationIndex a, LocationIndex b) const {
    return ranks_(i, a) <= ranks_(i, b);
  }

  // Copy with agent i's preference replaced.
  PreferenceProfile with_agent(AgentIndex i, AgentPreference pref) const {
    std::vector<AgentPreference> agents = agents_;
    agents[i] = std::move(pref);
    return PreferenceProfile(std::move(agents), num_locations_);
  }

  friend bool operator==(const PreferenceProfile& a, const PreferenceProfile& b) {
    return a.num_locations_ == b.num_locations_ && a.agents_ == b.agents_;
  }

 private:
  int num_locations_ = 0;
  std::vector<AgentPreference> agents_;
  Eigen::MatrixXi ranks_;
};

// Complete input to the mechanism. Immutable after construction.
template <typename Scalar>
class BasicInstance {
 public:
  using scalar_type = Scalar;
  using Matrix = ScoreMatrix<Scalar>;

  BasicInstance() = default;

  BasicInstance(std::vector<std::string> locations, std::vector<int> capacities,
                Matrix outcomes, PreferenceProfile preferences)
      : locations_(std::move(locations)),
        capacities_(std::move(capacities)),
        outcomes_(std::move(outcomes)),
        preferences_(std::move(preferences)) {
    const auto num_loc = static_cast<Eigen::Index>(locations_.size());
    if (static_cast<Eigen::Index>(capacities_.size()) != num_loc) {
      throw InstanceInvalid("capacity count does not match location count");
    }
    if (outcomes_.cols() != num_loc) {
      throw InstanceInvalid("outcome matrix column count does not match locations");
    }
    if (preferences_.num_agents() != outcomes_.rows()) {
      throw InstanceInvalid("preference profile length does not match agents");
    }
    if (preferences_.num_locations() != num_loc) {
      throw InstanceInvalid("preference profile location count mismatch");
    }
    for (int q : capacities_) {
      if (q < 0) throw InstanceInvalid("negative capacity");
    }
    if (!outcomes_.allFinite()) throw InstanceInvalid("non-finite outcome score");
    if ((outcomes_.array() < Scalar(0)).any()) {
      throw InstanceInvalid("negative outcome score");
    }
    for (Eigen::Index l = 0; l < num_loc; ++l) {
      if (!index_.emplace(locations_[l], static_cast<LocationIndex>(l)).second) {
        throw InstanceInvalid("duplicate location identifier '" + locations_[l] + "'");
      }
    }
  }

  int num_agents() const { return static_cast<int>(outcomes_.rows()); }
  int num_locations() const { return static_cast<int>(locations_.size()); }
  int total_capacity() const {
    return std::accumulate(capacities_.begin(), capacities_.end(), 0);
  }
  // n <= sum of capacities.
  bool is_assignable() const { return num_agents() <= total_capacity(); }

  const std::vector<std::string>& locations() const { return locations_; }
  const std::string& location_name(LocationIndex l) const { return locations_[l]; }
  LocationIndex location_index(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? kNoLocation : it->second;
  }
  const std::vector<int>& capacities() const { return capacities_; }
  int capacity(LocationIndex l) const { return capacities_[l]; }
  const Matrix& outcomes() const { return outcomes_; }
  Scalar score(AgentIndex i, LocationIndex l) const { return outcomes_(i, l); }
  const PreferenceProfile& preferences() const { return preferences_; }

  BasicInstance with_preferences(PreferenceProfile prefs) const {
    return BasicInstance(locations_, capacities_, outcomes_, std::move(prefs));
  }
  BasicInstance with_capacities(std::vector<int> caps) const {
    return BasicInstance(locations_, std::move(caps), outcomes_, preferences_);
  }

  friend bool operator==(const BasicInstance& a, const BasicInstance& b) {
    return a.locations_ == b.locations_ && a.capacities_ == b.capacities_ &&
           a.outcomes_.rows() == b.outcomes_.rows() &&
           a.outcomes_.cols() == b.outcomes_.cols() &&
           a.outcomes_ == b.outcomes_ && a.preferences_ == b.preferences_;
  }

 private:
  std::vector<std::string> locations_;
  std::vector<int> capacities_;
  Matrix outcomes_;
  PreferenceProfile preferences_;
  std::unordered_map<std::string, LocationIndex> index_;
};

using Instance = BasicInstance<double>;

// Total map agent -> location.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<LocationIndex> assignment)
      : assignment_(std::move(assignment)) {}

  int num_agents() const { return static_cast<int>(assignment_.size()); }
  LocationIndex operator[](AgentIndex i) const { return assignment_[i]; }
  LocationIndex& operator[](AgentIndex i) { return assignment_[i]; }
  const std::vector<LocationIndex>& assignment() const { return assignment_; }

  friend auto operator<=>(const Matching&, const Matching&) = default;
  friend bool operator==(const Matching&, const Matching&) = default;

 private:
  std::vector<LocationIndex> assignment_;
};

template <typename Scalar>
struct MetricReport {
  double top_k_proportion = 0.0;
  Scalar realized_mean = Scalar(0);
};

// Per-location load of a matching; agents without a location are skipped.
inline std::vector<int> location_loads(const Matching& m, int num_locations) {
  std::vector<int> load(static_cast<size_t>(num_locations), 0);
  for (LocationIndex l : m.assignment()) {
    if (l >= 0 && l < num_locations) ++load[l];
  }
  return load;
}

template <typename Scalar>
bool is_feasible(const Matching& m, const BasicInstance<Scalar>& inst) {
  if (m.num_agents() != inst.num_agents()) return false;
  for (LocationIndex l : m.assignment()) {
    if (l < 0 || l >= inst.num_locations()) return false;
  }
  auto load = location_loads(m, inst.num_locations());
  for (LocationIndex l = 0; l < inst.num_locations(); ++l) {
    if (load[l] > inst.capacity(l)) return false;
  }
  return true;
}

template <typename Scalar>
Scalar total_score(const Matching& m, const BasicInstance<Scalar>& inst) {
  Scalar total(0);
  for (AgentIndex i = 0; i < m.num_agents(); ++i) total += inst.score(i, m[i]);
  return total;
}

// Threshold test in total-sum form: sum >= n * g_bar - tolerance.
template <typename Scalar>
bool meets_threshold(Scalar total, int n, Scalar g_bar,
                     Scalar tolerance = Scalar(kThresholdTolerance)) {
  return total >= Scalar(n) * g_bar - tolerance;
}

template <typename Scalar>
bool is_g_acceptable(const Matching& m, const BasicInstance<Scalar>& inst,
                     Scalar g_bar,
                     Scalar tolerance = Scalar(kThresholdTolerance)) {
  return meets_threshold(total_score(m, inst), inst.num_agents(), g_bar,
                         tolerance);
}

// Fraction of agents placed within the first min(k, |S_i|) strictly ranked
// locations, and the mean assigned score.
template <typename Scalar>
MetricReport<Scalar> compute_metrics(const Matching& m,
                                     const BasicInstance<Scalar>& inst, int k) {
  if (k < 1) throw InstanceInvalid("metric k must be >= 1");
  const int n = inst.num_agents();
  MetricReport<Scalar> report;
  if (n == 0) return report;
  int hits = 0;
  for (AgentIndex i = 0; i < n; ++i) {
    const auto& prefs = inst.preferences();
    if (prefs.is_listed(i, m[i]) && prefs.rank(i, m[i]) < k) ++hits;
  }
  report.top_k_proportion = static_cast<double>(hits) / n;
  report.realized_mean = total_score(m, inst) / Scalar(n);
  return report;
}

// m1 weakly better for all agents and strictly better for at least one.
inline bool pareto_dominates(const Matching& m1, const Matching& m2,
                             const PreferenceProfile& prefs) {
  bool strict = false;
  for (AgentIndex i = 0; i < m1.num_agents(); ++i) {
    if (!prefs.weakly_prefers(i, m1[i], m2[i])) return false;
    if (prefs.prefers(i, m1[i], m2[i])) strict = true;
  }
  return strict;
}

}  // namespace gcpm

#endif  // GCPM_CORE_HPP_
