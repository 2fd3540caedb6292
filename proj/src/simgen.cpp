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

#include "gcpm/simgen.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace gcpm {
namespace {

Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double den = std::sqrt((dx * dx).sum() * (dy * dy).sum());
  return den > 0.0 ? (dx * dy).sum() / den : 0.0;
}

std::vector<std::string> default_location_names(int n) {
  std::vector<std::string> names(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l) names[l] = "L" + std::to_string(l + 1);
  return names;
}

}  // namespace

void SimConfig::validate() const {
  if (n < 2) throw InvalidConfig("n must be at least 2");
  if (!(rho_p >= 0.0 && rho_p < 1.0)) {
    throw InvalidConfig("rho_p must lie in [0, 1)");
  }
  if (!(std::abs(rho_op) < 1.0)) throw InvalidConfig("rho_op must lie in (-1, 1)");
  if (truncation_k && *truncation_k < 1) {
    throw InvalidConfig("truncation_k must be positive");
  }
}

LatentMatrices generate_latent(const SimConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cfg.n;
  std::mt19937_64 rng(cfg.seed);

  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(n, n, cfg.rho_p);
  corr.diagonal().setOnes();
  const Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success) {
    throw InvalidConfig("equicorrelation matrix is not positive definite");
  }

  LatentMatrices out;
  // Column l holds z_l, one draw per agent.
  out.preference = llt.matrixL() * standard_normal(n, n, rng);

  if (cfg.rho_op == 0.0) {
    out.score = standard_normal(n, n, rng);
  } else {
    const double sigma = std::sqrt(1.0 / (cfg.rho_op * cfg.rho_op) - 1.0);
    const double sign = cfg.rho_op > 0.0 ? 1.0 : -1.0;
    out.score = sign * (out.preference + sigma * standard_normal(n, n, rng));
  }
  return out;
}

std::vector<LocationIndex> descending_order(const Eigen::VectorXd& row) {
  std::vector<LocationIndex> order(static_cast<size_t>(row.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](LocationIndex a, LocationIndex b) { return row(a) > row(b); });
  return order;
}

Instance instance_from_latent(const LatentMatrices& latent,
                              std::optional<int> truncation_k) {
  const auto n = latent.preference.rows();
  if (latent.preference.cols() != n || latent.score.rows() != n ||
      latent.score.cols() != n) {
    throw InvalidConfig("latent matrices must be square and equally sized");
  }
  if (!latent.preference.allFinite() || !latent.score.allFinite()) {
    throw InvalidConfig("latent matrices must be finite");
  }

  const double lo = latent.score.minCoeff();
  const double span = latent.score.maxCoeff() - lo;
  ScoreMatrix<double> outcomes(n, n);
  if (span > 0.0) {
    outcomes = ((latent.score.array() - lo) / span).matrix();
  } else {
    outcomes.setZero();
  }

  const int keep = truncation_k ? std::min<int>(*truncation_k, static_cast<int>(n))
                                : static_cast<int>(n);
  std::vector<AgentPreference> prefs;
  prefs.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto order = descending_order(latent.preference.row(i).transpose());
    order.resize(static_cast<size_t>(keep));
    prefs.emplace_back(std::move(order), static_cast<int>(n));
  }
  return Instance(default_location_names(static_cast<int>(n)),
                  std::vector<int>(static_cast<size_t>(n), 1), std::move(outcomes),
                  PreferenceProfile(std::move(prefs), static_cast<int>(n)));
}

Instance generate_instance(const SimConfig& cfg) {
  return instance_from_latent(generate_latent(cfg), cfg.truncation_k);
}

PreferenceProfile perturb_preferences(const Instance& inst, double noise_scale,
                                      std::uint64_t seed) {
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw InvalidConfig("noise scale must be finite and nonnegative");
  }
  const int n = inst.num_agents();
  const int num_loc = inst.num_locations();
  const auto& prefs = inst.preferences();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Standardized uniform value of each rank position: mean 0, variance ~1.
  const double scale = std::sqrt(12.0);
  auto implied = [&](int r) {
    return scale * ((num_loc - r - 0.5) / num_loc - 0.5);
  };

  std::vector<AgentPreference> out;
  out.reserve(static_cast<size_t>(n));
  Eigen::VectorXd latent(num_loc);
  std::vector<LocationIndex> rest;
  for (AgentIndex i = 0; i < n; ++i) {
    auto prefix = prefs[i].strict_prefix();
    const int depth = static_cast<int>(prefix.size());
    for (int r = 0; r < depth; ++r) latent(prefix[r]) = implied(r);
    rest.clear();
    for (LocationIndex l = 0; l < num_loc; ++l) {
      if (!prefs.is_listed(i, l)) rest.push_back(l);
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    for (size_t j = 0; j < rest.size(); ++j) {
      latent(rest[j]) = implied(depth + static_cast<int>(j));
    }
    for (LocationIndex l = 0; l < num_loc; ++l) {
      latent(l) += noise_scale * noise(rng);
    }
    auto order = descending_order(latent);
    order.resize(static_cast<size_t>(depth));
    out.emplace_back(std::move(order), num_loc);
  }
  return PreferenceProfile(std::move(out), num_loc);
}

std::array<double, 4> top3_overlap_profile(const PreferenceProfile& truth,
                                           const PreferenceProfile& pseudo) {
  if (truth.num_agents() != pseudo.num_agents() ||
      truth.num_locations() != pseudo.num_locations()) {
    throw InstanceInvalid("profiles differ in shape");
  }
  std::array<double, 4> shares{0.0, 0.0, 0.0, 0.0};
  const int n = truth.num_agents();
  if (n == 0) return shares;
  for (AgentIndex i = 0; i < n; ++i) {
    auto t = truth[i].strict_prefix();
    const int depth = std::min<int>(3, static_cast<int>(t.size()));
    int kept = 0;
    for (int r = 0; r < depth; ++r) {
      if (pseudo.rank(i, t[r]) < 3) ++kept;
    }
    shares[static_cast<size_t>(3 - std::min(kept, 3))] += 1.0;
  }
  for (double& s : shares) s /= n;
  return shares;
}

double calibrate_noise_scale(const Instance& inst, double target_keep3,
                             std::uint64_t seed, int replicates) {
  if (!(target_keep3 > 0.0 && target_keep3 < 1.0)) {
    throw InvalidConfig("calibration target must lie in (0, 1)");
  }
  if (replicates < 1) throw InvalidConfig("replicates must be positive");
  auto keep3 = [&](double scale) {
    double sum = 0.0;
    for (int r = 0; r < replicates; ++r) {
      auto pseudo = perturb_preferences(inst, scale, seed + static_cast<std::uint64_t>(r));
      sum += top3_overlap_profile(inst.preferences(), pseudo)[0];
    }
    return sum / replicates;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (keep3(hi) > target_keep3 && hi < 1e3) hi *= 2.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (keep3(mid) > target_keep3) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double mean_cross_agent_rank_correlation(const PreferenceProfile& prefs) {
  const int n = prefs.num_agents();
  const int num_loc = prefs.num_locations();
  if (n < 2) return 0.0;
  Eigen::MatrixXd ranks(n, num_loc);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < num_loc; ++l) ranks(i, l) = prefs.rank(i, l);
  }
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      sum += pearson(ranks.row(i).transpose(), ranks.row(j).transpose());
    }
  }
  return sum / (0.5 * n * (n - 1));
}

double mean_preference_outcome_correlation(const Instance& inst) {
  const int n = inst.num_agents();
  const int num_loc = inst.num_locations();
  if (n == 0) return 0.0;
  const auto& prefs = inst.preferences();
  Eigen::VectorXd strength(num_loc);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < num_loc; ++l) strength(l) = num_loc - prefs.rank(i, l);
    sum += pearson(strength, inst.outcomes().row(i).transpose());
  }
  return sum / n;
}

}  // namespace gcpm
