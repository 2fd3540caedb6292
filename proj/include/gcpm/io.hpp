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

// Instance bundles and result tables on disk.
//
// A bundle is a directory holding
//   meta.json        {"n": <agents>, "locations": [ids], "capacities": [ints]}
//   outcomes.csv     header of location ids, then n rows of scores
//   preferences.csv  header choice_1..choice_K, then n rows of location ids,
//                    best first; trailing fields may be empty or missing
// Scores are written with 12 significant digits.

#ifndef GCPM_IO_HPP_
#define GCPM_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gcpm/core.hpp"
#include "gcpm/mechanism.hpp"
#include "gcpm/ordering.hpp"

namespace gcpm {

std::string format_score(double value);

// Rounds every score to what format_score prints, so the instance survives a
// write/read cycle unchanged.
Instance quantize_scores(const Instance& inst);

Instance read_instance(const std::filesystem::path& dir);
void write_instance(const std::filesystem::path& dir, const Instance& inst);

// Same, from in-memory file contents.
Instance parse_instance(std::string_view meta_json, std::string_view outcomes_csv,
                        std::string_view preferences_csv);

// Profile in the preferences.csv format, checked against the instance's
// agents and locations. Used for pseudo profiles.
PreferenceProfile parse_preference_profile(std::string_view text, const Instance& inst,
                                           const std::string& name = "preferences.csv");
PreferenceProfile read_preference_profile(const std::filesystem::path& path,
                                          const Instance& inst);
void write_preference_profile(std::ostream& os, const PreferenceProfile& prefs,
                              const Instance& inst);

// agent,location,score,rank_of_assigned (1-based rank, 0 when unlisted).
void write_matching_csv(std::ostream& os, const Matching& m, const Instance& inst);
Matching parse_matching_csv(std::string_view text, const Instance& inst,
                            const std::string& name = "matching.csv");

// step,agent,location,value,verdict,detail
void write_trace_csv(std::ostream& os, const MechanismOutcome<double>& outcome,
                     const Instance& inst);

void write_reorder_csv(std::ostream& os, const std::vector<ReorderRow>& rows);

// Splits one CSV line on commas. Quoting is not supported.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace gcpm

#endif  // GCPM_IO_HPP_
