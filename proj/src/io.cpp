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

#include "gcpm/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace gcpm {
namespace {

constexpr const char* kMeta = "meta.json";
constexpr const char* kOutcomes = "outcomes.csv";
constexpr const char* kPreferences = "preferences.csv";

struct Line {
  int number = 0;  // 1-based
  std::string_view text;
};

// Lines of a text file; a trailing newline does not open an extra line.
std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  size_t pos = 0;
  int number = 1;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({number++, line});
    pos = end + 1;
  }
  return lines;
}

int column_of(std::string_view line, std::string_view field) {
  return static_cast<int>(field.data() - line.data()) + 1;
}

void check_identifier(const std::string& id) {
  if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
    throw InstanceInvalid("location identifier '" + id +
                          "' must be nonempty without commas, quotes or newlines");
  }
}

std::pair<int, int> line_column_at(std::string_view text, size_t byte) {
  int line = 1;
  int col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

struct Meta {
  int n = 0;
  std::vector<std::string> locations;
  std::vector<int> capacities;
};

Meta parse_meta(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, col] = line_column_at(text, byte);
    throw ParseError(kMeta, line, col, "invalid JSON");
  }
  auto fail = [](const std::string& what) { throw ParseError(kMeta, 0, 0, what); };
  if (!j.is_object()) fail("top level must be an object");
  Meta m;
  if (!j.contains("n") || !j["n"].is_number_integer()) fail("'n' must be an integer");
  m.n = j["n"].get<int>();
  if (m.n < 0) fail("'n' must be nonnegative");
  if (!j.contains("locations") || !j["locations"].is_array()) {
    fail("'locations' must be an array");
  }
  for (const auto& v : j["locations"]) {
    if (!v.is_string()) fail("location identifiers must be strings");
    m.locations.push_back(v.get<std::string>());
  }
  if (!j.contains("capacities") || !j["capacities"].is_array()) {
    fail("'capacities' must be an array");
  }
  for (const auto& v : j["capacities"]) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail("capacities must be nonnegative integers");
    }
    m.capacities.push_back(v.get<int>());
  }
  if (m.capacities.size() != m.locations.size()) {
    fail("'capacities' and 'locations' differ in length");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : m.locations) {
    try {
      check_identifier(id);
    } catch (const InstanceInvalid& e) {
      fail(e.what());
    }
    if (!seen.insert(id).second) fail("duplicate location identifier '" + id + "'");
  }
  return m;
}

ScoreMatrix<double> parse_outcomes(std::string_view text, const Meta& meta) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(kOutcomes, 1, 1, "missing header row");
  const auto header = split_csv_line(lines[0].text);
  if (header.size() != meta.locations.size()) {
    throw ParseError(kOutcomes, 1, 1,
                     fmt::format("header has {} columns, expected {}", header.size(),
                                 meta.locations.size()));
  }
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] != meta.locations[c]) {
      throw ParseError(kOutcomes, 1, column_of(lines[0].text, header[c]),
                       fmt::format("header column '{}' does not match location '{}'",
                                   header[c], meta.locations[c]));
    }
  }
  const int rows = static_cast<int>(lines.size()) - 1;
  if (rows != meta.n) {
    const int where = rows < meta.n ? static_cast<int>(lines.size()) + 1
                                    : lines[static_cast<size_t>(meta.n) + 1].number;
    throw ParseError(kOutcomes, where, 1,
                     fmt::format("expected {} score rows, found {}", meta.n, rows));
  }
  const auto cols = static_cast<Eigen::Index>(meta.locations.size());
  ScoreMatrix<double> g(meta.n, cols);
  for (int i = 0; i < meta.n; ++i) {
    const Line& line = lines[static_cast<size_t>(i) + 1];
    const auto fields = split_csv_line(line.text);
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw ParseError(kOutcomes, line.number, 1,
                       fmt::format("expected {} fields, found {}", cols, fields.size()));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto f = fields[static_cast<size_t>(c)];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(kOutcomes, line.number, column_of(line.text, f),
                         fmt::format("'{}' is not a number", f));
      }
      if (!std::isfinite(v) || v < 0.0) {
        throw ParseError(kOutcomes, line.number, column_of(line.text, f),
                         "scores must be finite and nonnegative");
      }
      g(i, c) = v;
    }
  }
  return g;
}

PreferenceProfile parse_preferences(std::string_view text, const Meta& meta,
                                    const std::string& file = kPreferences) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError(file, 1, 1, "missing header row");
  const auto header = split_csv_line(lines[0].text);
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] != "choice_" + std::to_string(c + 1)) {
      throw ParseError(file, 1, column_of(lines[0].text, header[c]),
                       fmt::format("expected header 'choice_{}'", c + 1));
    }
  }
  const int rows = static_cast<int>(lines.size()) - 1;
  if (rows != meta.n) {
    const int where = rows < meta.n ? static_cast<int>(lines.size()) + 1
                                    : lines[static_cast<size_t>(meta.n) + 1].number;
    throw ParseError(file, where, 1,
                     fmt::format("expected {} preference rows, found {}", meta.n, rows));
  }
  std::unordered_map<std::string_view, LocationIndex> index;
  for (size_t l = 0; l < meta.locations.size(); ++l) {
    index.emplace(meta.locations[l], static_cast<LocationIndex>(l));
  }
  const int num_loc = static_cast<int>(meta.locations.size());
  std::vector<AgentPreference> prefs;
  prefs.reserve(static_cast<size_t>(meta.n));
  for (int i = 0; i < meta.n; ++i) {
    const Line& line = lines[static_cast<size_t>(i) + 1];
    auto fields = split_csv_line(line.text);
    if (fields.size() == 1 && fields[0].empty()) fields.clear();
    if (fields.size() > header.size()) {
      throw ParseError(file, line.number,
                       column_of(line.text, fields[header.size()]),
                       "more choices than header columns");
    }
    std::vector<LocationIndex> prefix;
    std::vector<char> seen(static_cast<size_t>(num_loc), 0);
    bool ended = false;
    for (auto f : fields) {
      const int col = column_of(line.text, f);
      if (f.empty()) {
        ended = true;
        continue;
      }
      if (ended) {
        throw ParseError(file, line.number, col,
                         "choice after an empty field");
      }
      auto it = index.find(f);
      if (it == index.end()) {
        throw ParseError(file, line.number, col,
                         fmt::format("unknown location '{}'", f));
      }
      if (seen[it->second]) {
        throw ParseError(file, line.number, col,
                         fmt::format("location '{}' listed twice", f));
      }
      seen[it->second] = 1;
      prefix.push_back(it->second);
    }
    prefs.emplace_back(std::move(prefix), num_loc);
  }
  return PreferenceProfile(std::move(prefs), num_loc);
}

int rank_of_assigned(const Instance& inst, AgentIndex i, LocationIndex l) {
  const auto& prefs = inst.preferences();
  return prefs.is_listed(i, l) ? prefs.rank(i, l) + 1 : 0;
}

}  // namespace

std::string format_score(double value) { return fmt::format("{:.12g}", value); }

Instance quantize_scores(const Instance& inst) {
  ScoreMatrix<double> g = inst.outcomes();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index l = 0; l < g.cols(); ++l) {
      const std::string s = format_score(g(i, l));
      double v = 0.0;
      std::from_chars(s.data(), s.data() + s.size(), v);
      g(i, l) = v;
    }
  }
  return Instance(inst.locations(), inst.capacities(), std::move(g),
                  inst.preferences());
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

Instance parse_instance(std::string_view meta_json, std::string_view outcomes_csv,
                        std::string_view preferences_csv) {
  const Meta meta = parse_meta(meta_json);
  auto g = parse_outcomes(outcomes_csv, meta);
  auto prefs = parse_preferences(preferences_csv, meta);
  return Instance(meta.locations, meta.capacities, std::move(g), std::move(prefs));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

Instance read_instance(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("instance bundle " + dir.string() + " is not a directory");
  }
  return parse_instance(read_text_file(dir / kMeta), read_text_file(dir / kOutcomes),
                        read_text_file(dir / kPreferences));
}

void write_instance(const std::filesystem::path& dir, const Instance& inst) {
  for (const auto& id : inst.locations()) check_identifier(id);
  std::filesystem::create_directories(dir);

  nlohmann::json meta;
  meta["n"] = inst.num_agents();
  meta["locations"] = inst.locations();
  meta["capacities"] = inst.capacities();
  write_text_file(dir / kMeta, meta.dump(2) + "\n");

  std::string out;
  for (int l = 0; l < inst.num_locations(); ++l) {
    if (l) out += ',';
    out += inst.location_name(l);
  }
  out += '\n';
  for (int i = 0; i < inst.num_agents(); ++i) {
    for (int l = 0; l < inst.num_locations(); ++l) {
      if (l) out += ',';
      out += format_score(inst.score(i, l));
    }
    out += '\n';
  }
  write_text_file(dir / kOutcomes, out);

  std::ostringstream prefs;
  write_preference_profile(prefs, inst.preferences(), inst);
  write_text_file(dir / kPreferences, prefs.str());
}

PreferenceProfile parse_preference_profile(std::string_view text, const Instance& inst,
                                           const std::string& name) {
  Meta meta;
  meta.n = inst.num_agents();
  meta.locations = inst.locations();
  meta.capacities = inst.capacities();
  return parse_preferences(text, meta, name);
}

PreferenceProfile read_preference_profile(const std::filesystem::path& path,
                                          const Instance& inst) {
  return parse_preference_profile(read_text_file(path), inst, path.filename().string());
}

void write_preference_profile(std::ostream& os, const PreferenceProfile& prefs,
                              const Instance& inst) {
  int width = 1;
  for (const auto& p : prefs.agents()) width = std::max(width, p.size());
  for (int c = 0; c < width; ++c) {
    if (c) os << ',';
    os << "choice_" << c + 1;
  }
  os << '\n';
  for (const auto& p : prefs.agents()) {
    auto prefix = p.strict_prefix();
    for (int c = 0; c < width; ++c) {
      if (c) os << ',';
      if (c < static_cast<int>(prefix.size())) os << inst.location_name(prefix[c]);
    }
    os << '\n';
  }
}

void write_matching_csv(std::ostream& os, const Matching& m, const Instance& inst) {
  os << "agent,location,score,rank_of_assigned\n";
  for (AgentIndex i = 0; i < m.num_agents(); ++i) {
    const LocationIndex l = m[i];
    os << i << ',' << inst.location_name(l) << ',' << format_score(inst.score(i, l))
       << ',' << rank_of_assigned(inst, i, l) << '\n';
  }
}

Matching parse_matching_csv(std::string_view text, const Instance& inst,
                            const std::string& name) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0].text != "agent,location,score,rank_of_assigned") {
    throw ParseError(name, 1, 1, "expected header agent,location,score,rank_of_assigned");
  }
  const int n = inst.num_agents();
  std::vector<LocationIndex> assignment(static_cast<size_t>(n), kNoLocation);
  for (size_t r = 1; r < lines.size(); ++r) {
    const Line& line = lines[r];
    const auto fields = split_csv_line(line.text);
    if (fields.size() != 4) throw ParseError(name, line.number, 1, "expected 4 fields");
    int agent = -1;
    const auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), agent);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() || agent < 0 ||
        agent >= n) {
      throw ParseError(name, line.number, 1, "invalid agent index");
    }
    if (assignment[agent] != kNoLocation) {
      throw ParseError(name, line.number, 1, "agent listed twice");
    }
    const LocationIndex l = inst.location_index(std::string(fields[1]));
    if (l == kNoLocation) {
      throw ParseError(name, line.number, column_of(line.text, fields[1]),
                       "unknown location");
    }
    assignment[agent] = l;
  }
  for (AgentIndex i = 0; i < n; ++i) {
    if (assignment[i] == kNoLocation) {
      throw ParseError(name, static_cast<int>(lines.size()) + 1, 1,
                       "agent " + std::to_string(i) + " missing");
    }
  }
  return Matching(std::move(assignment));
}

void write_trace_csv(std::ostream& os, const MechanismOutcome<double>& outcome,
                     const Instance& inst) {
  const auto& trace = outcome.trace;
  os << "step,agent,location,value,verdict,detail\n";
  os << "0,,," << format_score(trace.g_max) << ",gmax,\n";
  for (const auto& step : trace.steps) {
    for (const auto& p : step.probes) {
      os << step.step << ',' << step.agent << ',' << inst.location_name(p.location)
         << ',' << format_score(p.value) << ',' << (p.passed ? "pass" : "fail") << ','
         << (p.near_tie ? "near_tie" : "") << '\n';
    }
    if (step.action == StepAction::kAssigned) {
      os << step.step << ',' << step.agent << ',' << inst.location_name(step.location)
         << ',' << format_score(inst.score(step.agent, step.location)) << ",assigned,\n";
    } else {
      os << step.step << ',' << step.agent << ",,,held,\n";
    }
  }
  const int final_step = static_cast<int>(trace.steps.size()) + 1;
  for (const auto& [a, l] : trace.final_assignment) {
    os << final_step << ',' << a << ',' << inst.location_name(l) << ','
       << format_score(inst.score(a, l)) << ",final,\n";
  }
  os << final_step << ",,," << format_score(outcome.realized_mean) << ",realized_mean,"
     << "probes=" << trace.probes << ";lsap_solves=" << trace.lsap_solves
     << ";near_ties=" << trace.near_ties << '\n';
}

void write_reorder_csv(std::ostream& os, const std::vector<ReorderRow>& rows) {
  os << "g_bar,strategy,order_id,top3,realized_mean\n";
  for (const auto& r : rows) {
    os << format_score(r.g_bar) << ',' << r.strategy << ',' << r.order_id << ',';
    if (r.feasible) {
      os << format_score(r.top3) << ',' << format_score(r.realized_mean);
    } else {
      os << "nan,nan";
    }
    os << '\n';
  }
}

}  // namespace gcpm
