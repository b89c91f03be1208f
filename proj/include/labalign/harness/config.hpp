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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "labalign/error.hpp"

namespace labalign::harness {

/// Run configuration. Either a JSON object or lines of `key = value`, with
/// `# comments` and `[section]` headers that nest the following keys. Values
/// are read as JSON when they parse (numbers, true/false, "strings",
/// [arrays]) and as bare strings otherwise. Throws DataError.
nlohmann::json load_config(const std::filesystem::path& path);
nlohmann::json parse_config(const std::string& text);

/// Looks up a dotted key such as "sweep.lambdas"; returns `fallback` when
/// absent. Throws DataError when present with the wrong type.
template <typename T>
T config_value(const nlohmann::json& config, const std::string& key, T fallback) {
  const nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) return fallback;
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace labalign::harness
