/*
 * Copyright 2026 The labalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace labalign::harness {

using Cell = std::variant<std::int64_t, double, std::string>;

/// One result table; written as <name>.csv or as an array of row objects.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::invalid_argument when the row width differs from columns.
  void add_row(std::vector<Cell> row);
};

struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  std::deque<Table> tables;  // deque: table() references stay valid
  std::vector<std::string> violations;

  Table& table(const std::string& name, std::vector<std::string> columns);
};

enum class Format { kCsv, kJson };

/// Shortest-round-trip-safe text for a double ("%.17g"); non-finite values
/// print as nan, inf and -inf.
std::string format_double(double value);

std::string to_csv(const Table& table);

/// Summary document. Includes the tables themselves when with_tables is set.
nlohmann::ordered_json to_json(const RunReport& report, bool with_tables,
                               bool timestamp);

/// Creates `dir` if needed. kCsv writes one CSV per table plus summary.json;
/// kJson writes a single report.json. Returns the paths written.
std::vector<std::filesystem::path> write_report(
    const RunReport& report, const std::filesystem::path& dir, Format format,
    bool timestamp);

Format parse_format(const std::string& name);

}  // namespace labalign::harness
