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

#include "gcpm/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "gcpm/io.hpp"
#include "gcpm/mechanism.hpp"
#include "gcpm/oracles.hpp"
#include "gcpm/parallel.hpp"
#include "gcpm/simgen.hpp"
#include "gcpm/sweep.hpp"

namespace gcpm::cli {
namespace {

std::string trim(std::string_view s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

template <typename T>
T parse_number(std::string_view text, const std::string& what) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidConfig("invalid " + what + " '" + t + "'");
  }
  return value;
}

std::map<std::string, std::string> parse_key_values(std::string_view text,
                                                    const std::string& what) {
  std::map<std::string, std::string> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidConfig("expected key=value in " + what);
    out[lower(trim(item.substr(0, eq)))] = trim(item.substr(eq + 1));
  }
  return out;
}

// Moves `--config PATH` out of the arguments and splices the file's settings
// in right after the subcommand, so explicit flags that follow win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidConfig("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const auto settings = parse_config(read_text_file(path), path);
  auto sub = std::find_if(args.begin(), args.end(),
                          [](const std::string& a) { return !a.empty() && a[0] != '-'; });
  if (sub == args.end()) throw InvalidConfig("--config needs a subcommand");
  std::vector<std::string> injected;
  for (const auto& [key, value] : settings) injected.push_back("--" + key + "=" + value);
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

Instance load_instance(const std::string& path) {
  try {
    return read_instance(path);
  } catch (const InstanceInvalid& e) {
    throw ParseError(path, 0, 0, e.what());
  }
}

void require_assignable(const Instance& inst) {
  if (!inst.is_assignable()) {
    throw InfeasibleProblem(fmt::format("instance infeasible: {} agents for {} slots",
                                        inst.num_agents(), inst.total_capacity()));
  }
}

// Writes to `path`, or to `fallback` when path is empty.
void emit(const std::string& path, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error("cannot write " + path);
  write(f);
  if (!f) throw Error("write failed for " + path);
}

struct GenArgs {
  SimConfig sim;
  int truncation_k = 10;
  std::string out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
  SimConfig cfg = a.sim;
  cfg.truncation_k = a.truncation_k > 0 ? std::optional<int>(a.truncation_k) : std::nullopt;
  const Instance inst = quantize_scores(generate_instance(cfg));
  write_instance(a.out, inst);
  out << "n=" << inst.num_agents() << " locations=" << inst.num_locations()
      << " g_max=" << format_score(solve_max_matching_value(inst)) << "\n";
  return kExitOk;
}

int cmd_gmax(const std::string& path, std::ostream& out) {
  const Instance inst = load_instance(path);
  require_assignable(inst);
  out << format_score(solve_max_matching_value(inst)) << "\n";
  return kExitOk;
}

struct AssignArgs {
  std::string instance;
  double g_bar = 0.0;
  std::string order = "identity";
  bool clamp = false;
  double tolerance = kThresholdTolerance;
  int k = 3;
  std::string matching_out;
  std::string trace_out;
};

int cmd_assign(const AssignArgs& a, std::ostream& out, std::ostream& err) {
  const Instance inst = load_instance(a.instance);
  require_assignable(inst);
  const AssignmentEngine<double> initial = optimal_engine(inst);
  const int n = inst.num_agents();
  const double g_max = n ? initial.total() / n : 0.0;
  const double g_bar = a.clamp ? std::min(a.g_bar, g_max) : a.g_bar;
  const auto strategy = parse_order_spec(a.order, inst);
  MechanismOptions opts;
  opts.tolerance = a.tolerance;
  opts.record_snapshots = false;
  const auto order = make_order(inst, strategy, g_bar);
  const auto run = run_mechanism(inst, MechanismParams<double>{g_bar, order}, opts, initial);
  if (!is_feasible(run.matching, inst) ||
      !is_g_acceptable(run.matching, inst, g_bar, a.tolerance)) {
    err << "internal check failed: matching is not feasible and acceptable\n";
    return kExitOracleFail;
  }
  emit(a.matching_out, out, [&](std::ostream& os) { write_matching_csv(os, run.matching, inst); });
  if (!a.trace_out.empty()) {
    emit(a.trace_out, out, [&](std::ostream& os) { write_trace_csv(os, run, inst); });
  }
  int held = 0;
  for (const auto& s : run.trace.steps) held += s.action == StepAction::kHeld;
  std::ostream& summary = a.matching_out.empty() ? err : out;
  summary << "g_bar=" << format_score(g_bar) << " g_max=" << format_score(g_max)
          << " realized_mean=" << format_score(run.realized_mean) << " top" << a.k << "="
          << format_score(compute_metrics(run.matching, inst, a.k).top_k_proportion)
          << " held=" << held << " probes=" << run.trace.probes
          << " lsap_solves=" << run.trace.lsap_solves << "\n";
  return kExitOk;
}

struct GridArgs {
  std::string grid;
  int divisions = 50;
};

std::vector<double> resolve_grid(const GridArgs& g, const Instance& inst) {
  return g.grid.empty() ? default_grid(inst, g.divisions) : parse_grid(g.grid);
}

struct SweepArgs {
  std::string instance;
  GridArgs grid;
  std::string order = "identity";
  int k = 3;
  int threads = 1;
  double tolerance = kThresholdTolerance;
  std::string out;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  const Instance inst = load_instance(a.instance);
  require_assignable(inst);
  SweepSpec spec;
  spec.grid = resolve_grid(a.grid, inst);
  spec.strategy = parse_order_spec(a.order, inst);
  spec.k = a.k;
  spec.threads = a.threads;
  spec.mechanism.tolerance = a.tolerance;
  const auto rows = run_sweep(inst, spec);
  emit(a.out, out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
  return kExitOk;
}

struct VerifyArgs {
  int instances = 200;
  int max_n = 4;
  int max_locations = 4;
  std::uint64_t seed = 1;
  std::string mutate = "none";
  bool sp_all_orders = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  MechanismOptions opts;
  const std::string m = lower(a.mutate);
  if (m == "none") {
    opts.mutation = ProbeMutation::kNone;
  } else if (m == "omit-held" || m == "omit_held") {
    opts.mutation = ProbeMutation::kOmitHeldAgents;
  } else if (m == "sign-flip" || m == "sign_flip") {
    opts.mutation = ProbeMutation::kSignFlip;
  } else {
    throw InvalidConfig("unknown mutation '" + a.mutate + "'");
  }
  if (a.max_n < 2) throw InvalidConfig("--max-n must be at least 2");
  if (a.max_locations < 2 || a.max_locations > 4) {
    throw InvalidConfig("--max-locations must lie in [2, 4]");
  }
  bool ok = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    ok = ok && pass;
    out << (pass ? "PASS  " : "FAIL  ") << name;
    if (!detail.empty()) out << "  (" << detail << ")";
    out << "\n";
  };

  const auto examples = verify_mechanism_example_suite(opts);
  for (const auto& item : examples.items) line(item.pass, item.name, item.detail);

  RunInvariantMonitor monitor(opts.tolerance);
  PropertySuiteOptions p;
  p.instances = a.instances;
  p.seed = a.seed;
  p.spec.max_agents = a.max_n;
  p.spec.min_agents = std::min(p.spec.min_agents, a.max_n);
  p.spec.max_locations = a.max_locations;
  p.strategy_proofness_all_orders = a.sp_all_orders;
  p.mechanism = opts;
  p.mechanism.observer = monitor.callback();
  const auto r = run_property_suite(p);
  const std::string size = fmt::format("{} instances, n <= {}, |L| <= {}", r.instances,
                                       a.max_n, a.max_locations);
  line(r.efficiency_failures == 0, "constrained efficiency property",
       r.efficiency_failures ? r.first_efficiency_failure : size);
  line(r.strategy_proofness_failures == 0, "strategy-proofness property",
       r.strategy_proofness_failures ? r.first_strategy_proofness_failure : size);
  line(monitor.infeasible() + monitor.below_threshold() == 0,
       "every run feasible and meets the threshold",
       fmt::format("{} runs", monitor.runs()));
  out << "INFO  re-optimization bound n(|L|-2)+1 exceeded in " << monitor.over_bound()
      << " of " << monitor.runs() << " runs (" << monitor.over_bound_two_locations()
      << " with |L| = 2)\n";
  out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kExitOk : kExitOracleFail;
}

struct ReorderArgs {
  std::string instance;
  GridArgs grid;
  int orders = 100;
  std::uint64_t seed = 0;
  std::string strategies = "random,variance";
  std::string pseudo_prefs;
  double pseudo_noise = -1.0;
  std::uint64_t pseudo_seed = 0;
  int k = 3;
  int threads = 1;
  std::string out;
};

int cmd_reorder(const ReorderArgs& a, std::ostream& out) {
  const Instance inst = load_instance(a.instance);
  require_assignable(inst);
  ReorderOptions opts;
  opts.include_variance = false;
  bool pseudo = false;
  std::stringstream ss(a.strategies);
  std::string s;
  while (std::getline(ss, s, ',')) {
    s = lower(trim(s));
    if (s == "random") continue;
    if (s == "variance" || s == "increasing_variance" || s == "decreasing_variance") {
      opts.include_variance = true;
    } else if (s == "pseudo" || s == "pseudo_inferred") {
      pseudo = true;
    } else {
      throw InvalidConfig("unknown strategy '" + s + "'");
    }
  }
  if (pseudo) {
    if (!a.pseudo_prefs.empty()) {
      opts.pseudo = std::make_shared<const PreferenceProfile>(
          read_preference_profile(a.pseudo_prefs, inst));
    } else if (a.pseudo_noise >= 0.0) {
      opts.pseudo = std::make_shared<const PreferenceProfile>(
          perturb_preferences(inst, a.pseudo_noise, a.pseudo_seed));
    } else {
      throw InvalidConfig("pseudo strategy needs --pseudo-prefs or --pseudo-noise");
    }
  }
  opts.k = a.k;
  opts.threads = a.threads;
  const auto rows =
      reorder_experiment(inst, resolve_grid(a.grid, inst), a.orders, a.seed, opts);
  emit(a.out, out, [&](std::ostream& os) { write_reorder_csv(os, rows); });
  return kExitOk;
}

void add_grid_options(CLI::App* sub, GridArgs& g) {
  sub->add_option("--grid", g.grid, "Thresholds: start:stop:step or a,b,c");
  sub->add_option("--divisions", g.divisions,
                  "Default grid: this many steps from the lowest mean score to g_max")
      ->check(CLI::PositiveNumber);
}

}  // namespace

std::map<std::string, std::string> parse_config(std::string_view text,
                                                const std::string& name) {
  std::map<std::string, std::string> out;
  std::stringstream ss{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(name, number, 1, "expected key = value");
    std::string key = lower(trim(t.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ParseError(name, number, 1, "empty key");
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (out.count(key)) {
      throw ParseError(name, number, 1, "key '" + key + "' given twice");
    }
    out[key] = value;
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = trim(text);
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number<double>(item, "grid bound"));
    if (parts.size() != 3) throw InvalidConfig("grid range must be start:stop:step");
    return grid_from_range(parts[0], parts[1], parts[2]);
  }
  std::vector<double> grid;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(parse_number<double>(item, "grid value"));
  if (grid.empty()) throw InvalidConfig("grid is empty");
  return grid;
}

OrderingStrategy parse_order_spec(const std::string& spec, const Instance& inst) {
  const std::string s = trim(spec);
  const std::string l = lower(s);
  const int n = inst.num_agents();
  if (l == "identity" || l == "given") return OrderingStrategy::Given({});
  if (l == "increasing_variance" || l == "increasing-variance") {
    return OrderingStrategy::IncreasingVariance();
  }
  if (l == "decreasing_variance" || l == "decreasing-variance") {
    return OrderingStrategy::DecreasingVariance();
  }
  if (l.rfind("random", 0) == 0) {
    std::uint64_t seed = 0;
    if (l.size() > 6) {
      if (l[6] != ':') throw InvalidConfig("invalid order spec '" + s + "'");
      const std::string rest = l.substr(7);
      if (rest.find('=') != std::string::npos) {
        auto kv = parse_key_values(rest, "random order");
        for (const auto& [k, v] : kv) {
          if (k != "seed") throw InvalidConfig("unknown random order key '" + k + "'");
          seed = parse_number<std::uint64_t>(v, "seed");
        }
      } else {
        seed = parse_number<std::uint64_t>(rest, "seed");
      }
    }
    return OrderingStrategy::Random(seed);
  }
  if (l.rfind("pseudo", 0) == 0) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw InvalidConfig("pseudo order needs prefs= or noise=");
    const auto kv = parse_key_values(s.substr(colon + 1), "pseudo order");
    int candidates = 100;
    std::uint64_t seed = 0;
    std::uint64_t noise_seed = 0;
    std::optional<PreferenceProfile> profile;
    std::optional<double> noise;
    for (const auto& [k, v] : kv) {
      if (k == "prefs") {
        profile = read_preference_profile(v, inst);
      } else if (k == "noise") {
        noise = parse_number<double>(v, "noise");
      } else if (k == "noise_seed" || k == "noise-seed") {
        noise_seed = parse_number<std::uint64_t>(v, "noise seed");
      } else if (k == "candidates") {
        candidates = parse_number<int>(v, "candidate count");
      } else if (k == "seed") {
        seed = parse_number<std::uint64_t>(v, "seed");
      } else {
        throw InvalidConfig("unknown pseudo order key '" + k + "'");
      }
    }
    if (!profile && !noise) throw InvalidConfig("pseudo order needs prefs= or noise=");
    if (!profile) profile = perturb_preferences(inst, *noise, noise_seed);
    return OrderingStrategy::PseudoInferred(std::move(*profile), candidates, seed);
  }

  std::vector<AgentIndex> order;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) order.push_back(parse_number<int>(item, "agent"));
  const bool zero_based = std::find(order.begin(), order.end(), 0) != order.end();
  if (!zero_based) {
    for (auto& a : order) --a;
  }
  if (!is_permutation_of_agents(order, n)) {
    throw InvalidConfig("order '" + s + "' is not a permutation of the " +
                        std::to_string(n) + " agents");
  }
  return OrderingStrategy::Given(std::move(order));
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"Threshold-constrained priority assignment"};
  app.name("gcpm");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;  // consumed by expand_config before parsing
  app.add_option("--config", config_path,
                 "Flat key = value file; flags given later override it");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic instance bundle");
  g->add_option("--n", gen.sim.n, "Agents and unit-capacity locations")->capture_default_str();
  g->add_option("--rho-p", gen.sim.rho_p, "Preference correlation across agents")
      ->capture_default_str();
  g->add_option("--rho-op", gen.sim.rho_op, "Preference/outcome correlation within agent")
      ->capture_default_str();
  g->add_option("--truncation-k", gen.truncation_k, "Ranks kept per agent; 0 keeps all")
      ->capture_default_str();
  g->add_option("--seed", gen.sim.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Bundle directory")->required();

  std::string gmax_path;
  auto* gm = app.add_subcommand("gmax", "Print the maximum achievable mean score");
  gm->add_option("instance,--instance", gmax_path, "Instance bundle")->required();

  AssignArgs assign;
  auto* as = app.add_subcommand("assign", "Run the mechanism once");
  as->add_option("instance,--instance", assign.instance, "Instance bundle")->required();
  as->add_option("--g-bar", assign.g_bar, "Threshold on the mean score")->required();
  as->add_option("--order", assign.order, "Priority order spec")->capture_default_str();
  as->add_flag("--clamp-to-gmax", assign.clamp, "Lower the threshold to g_max if above");
  as->add_option("--tolerance", assign.tolerance, "Absolute slack on the total score")
      ->capture_default_str();
  as->add_option("--k", assign.k, "Top-k metric in the summary")->capture_default_str();
  as->add_option("--matching-out", assign.matching_out, "Matching CSV (default stdout)");
  as->add_option("--trace-out", assign.trace_out, "Step trace CSV");

  SweepArgs sweep;
  sweep.threads = default_thread_count();
  auto* sw = app.add_subcommand("sweep", "Run the mechanism over a threshold grid");
  sw->add_option("instance,--instance", sweep.instance, "Instance bundle")->required();
  add_grid_options(sw, sweep.grid);
  sw->add_option("--order", sweep.order, "Priority order spec")->capture_default_str();
  sw->add_option("--k", sweep.k, "Top-k metric")->capture_default_str();
  sw->add_option("--threads", sweep.threads, "Worker threads (GCPM_THREADS)")
      ->check(CLI::PositiveNumber);
  sw->add_option("--tolerance", sweep.tolerance, "Absolute slack on the total score");
  sw->add_option("--out", sweep.out, "Result CSV (default stdout)");

  VerifyArgs verify;
  auto* vf = app.add_subcommand("verify", "Run the oracle suites");
  vf->add_option("--instances", verify.instances, "Random small instances")
      ->capture_default_str();
  vf->add_option("--max-n", verify.max_n, "Largest number of agents")->capture_default_str();
  vf->add_option("--max-locations", verify.max_locations, "Largest number of locations")
      ->capture_default_str();
  vf->add_option("--seed", verify.seed, "Random seed")->capture_default_str();
  vf->add_option("--mutate", verify.mutate,
                 "Self-test with a corrupted probe: none, omit-held, sign-flip")
      ->capture_default_str();
  vf->add_flag("--sp-all-orders", verify.sp_all_orders,
               "Check strategy-proofness under every priority order");

  ReorderArgs reorder;
  reorder.threads = default_thread_count();
  auto* ro = app.add_subcommand("reorder", "Compare priority orders over a threshold grid");
  ro->add_option("instance,--instance", reorder.instance, "Instance bundle")->required();
  add_grid_options(ro, reorder.grid);
  ro->add_option("--orders", reorder.orders, "Random orders per threshold")
      ->capture_default_str();
  ro->add_option("--seed", reorder.seed, "Seed of the random orders")->capture_default_str();
  ro->add_option("--strategies", reorder.strategies,
                 "Comma list of random, variance, pseudo")
      ->capture_default_str();
  ro->add_option("--pseudo-prefs", reorder.pseudo_prefs, "Pseudo preference CSV");
  ro->add_option("--pseudo-noise", reorder.pseudo_noise,
                 "Build the pseudo profile by perturbing the true one");
  ro->add_option("--pseudo-seed", reorder.pseudo_seed, "Seed of the perturbation");
  ro->add_option("--k", reorder.k, "Top-k metric")->capture_default_str();
  ro->add_option("--threads", reorder.threads, "Worker threads (GCPM_THREADS)")
      ->check(CLI::PositiveNumber);
  ro->add_option("--out", reorder.out, "Result CSV (default stdout)");

  try {
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, out);
    if (gm->parsed()) return cmd_gmax(gmax_path, out);
    if (as->parsed()) return cmd_assign(assign, out, err);
    if (sw->parsed()) return cmd_sweep(sweep, out);
    if (vf->parsed()) return cmd_verify(verify, out);
    if (ro->parsed()) return cmd_reorder(reorder, out);
  } catch (const ThresholdInfeasible& e) {
    err << "threshold infeasible: g_bar " << format_score(e.g_bar()) << " exceeds g_max "
        << format_score(e.g_max()) << "\n";
    return kExitThresholdInfeasible;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace gcpm::cli
