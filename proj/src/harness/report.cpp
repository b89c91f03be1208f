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

#include "labalign/harness/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "labalign/error.hpp"
#include "labalign/rng.hpp"

namespace labalign::harness {
namespace {

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return csv_escape(std::get<std::string>(cell));
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isfinite(*d)) return *d;
    return format_double(*d);
  }
  return std::get<std::string>(cell);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match table '" + name + "'");
  }
  rows.push_back(std::move(row));
}

Table& RunReport::table(const std::string& name, std::vector<std::string> columns) {
  for (Table& t : tables) {
    if (t.name == name) return t;
  }
  tables.push_back(Table{name, std::move(columns), {}});
  return tables.back();
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_escape(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const RunReport& report, bool with_tables,
                               bool timestamp) {
  nlohmann::ordered_json doc;
  doc["command"] = report.command;
  doc["seed"] = report.seed;
  doc["version"] = LABALIGN_VERSION;
  doc["rng"] = std::string(Rng::kAlgorithm);
  if (timestamp) doc["timestamp"] = utc_timestamp();
  doc["summary"] = report.summary;
  doc["violations"] = report.violations;
  if (with_tables) {
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const Table& t : report.tables) {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(obj));
      }
      tables[t.name] = std::move(rows);
    }
    doc["tables"] = std::move(tables);
  } else {
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const Table& t : report.tables) files.push_back(t.name + ".csv");
    doc["tables"] = std::move(files);
  }
  return doc;
}

std::vector<std::filesystem::path> write_report(
    const RunReport& report, const std::filesystem::path& dir, Format format,
    bool timestamp) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == Format::kCsv) {
    for (const Table& t : report.tables) {
      written.push_back(dir / (t.name + ".csv"));
      write_text(written.back(), to_csv(t));
    }
    written.push_back(dir / "summary.json");
    write_text(written.back(), to_json(report, false, timestamp).dump(2) + "\n");
  } else {
    written.push_back(dir / "report.json");
    write_text(written.back(), to_json(report, true, timestamp).dump(2) + "\n");
  }
  return written;
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

}  // namespace labalign::harness
