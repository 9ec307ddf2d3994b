// Copyright 2026 The Surprise Potential Authors
//
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

// Internal JSON helpers shared by the file-format code.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "surprise/error.hpp"
#include "surprise/scenario.hpp"

namespace surprise::detail {

using nlohmann::json;

nlohmann::json state_to_json(const std::optional<AgentState>& s);
std::optional<AgentState> state_from_json(const nlohmann::json& j);
nlohmann::json agent_to_json(const Agent& a);
nlohmann::json lanes_to_json(const std::vector<LaneSegment>& lanes);
nlohmann::json drivable_to_json(const std::vector<Polygon>& polys);

/// Member lookup that throws DataError naming the missing field.
const nlohmann::json& require(const nlohmann::json& j, std::string_view key);
double require_number(const nlohmann::json& j, std::string_view key);
std::string require_string(const nlohmann::json& j, std::string_view key);

/// Calls `fn(line, line_number)` for every non-blank line. Throws IoError when
/// the file cannot be opened.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

std::ofstream open_for_write(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double v);

}  // namespace surprise::detail
