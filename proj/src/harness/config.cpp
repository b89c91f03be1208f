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

#include "labalign/harness/config.hpp"

#include <fstream>
#include <sstream>

#include "labalign/error.hpp"

namespace labalign::harness {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

nlohmann::json parse_value(const std::string& text) {
  if (text.empty()) return "";
  if (text.front() == '\'' && text.back() == '\'' && text.size() >= 2) {
    return text.substr(1, text.size() - 2);
  }
  nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
  if (value.is_discarded()) return text;
  return value;
}

nlohmann::json parse_key_value(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::istringstream in(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw DataError("config line " + std::to_string(line_number) +
                        ": unterminated section header");
      }
      section = &root;
      std::string name = trim(line.substr(1, line.size() - 2));
      std::size_t start = 0;
      while (true) {
        const std::size_t dot = name.find('.', start);
        const std::string part = trim(name.substr(start, dot - start));
        if (part.empty()) {
          throw DataError("config line " + std::to_string(line_number) +
                          ": empty section name");
        }
        if (!section->contains(part)) (*section)[part] = nlohmann::json::object();
        section = &(*section)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_number) +
                      ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw DataError("config line " + std::to_string(line_number) + ": empty key");
    }
    (*section)[key] = parse_value(trim(line.substr(eq + 1)));
  }
  return root;
}

}  // namespace

nlohmann::json parse_config(const std::string& text) {
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    try {
      return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("invalid JSON config: ") + e.what());
    }
  }
  return parse_key_value(text);
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace labalign::harness
