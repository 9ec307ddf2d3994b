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

#include "json_io.hpp"

#include <charconv>
#include <cmath>

namespace surprise::detail {

json state_to_json(const std::optional<AgentState>& s) {
  if (!s) return nullptr;
  return json{{"t", s->t}, {"x", s->x}, {"y", s->y}, {"heading", s->heading}, {"vx", s->vx}, {"vy", s->vy}};
}

std::optional<AgentState> state_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_object()) throw DataError("state must be an object or null");
  AgentState s;
  s.t = require_number(j, "t");
  s.x = require_number(j, "x");
  s.y = require_number(j, "y");
  s.heading = require_number(j, "heading");
  s.vx = require_number(j, "vx");
  s.vy = require_number(j, "vy");
  return s;
}

json agent_to_json(const Agent& a) {
  json states = json::array();
  for (const auto& s : a.states) states.push_back(state_to_json(s));
  return json{{"id", a.id},
              {"kind", std::string(to_string(a.kind))},
              {"length", a.length},
              {"width", a.width},
              {"states", std::move(states)}};
}

json lanes_to_json(const std::vector<LaneSegment>& lanes) {
  json out = json::array();
  for (const auto& lane : lanes) {
    json pts = json::array();
    for (const Vec2 p : lane.centerline) pts.push_back(json::array({p.x, p.y}));
    out.push_back(json{{"id", lane.id}, {"width", lane.width}, {"centerline", std::move(pts)}});
  }
  return out;
}

json drivable_to_json(const std::vector<Polygon>& polys) {
  json out = json::array();
  for (const auto& poly : polys) {
    json pts = json::array();
    for (const Vec2 p : poly) pts.push_back(json::array({p.x, p.y}));
    out.push_back(std::move(pts));
  }
  return out;
}

const json& require(const json& j, std::string_view key) {
  if (!j.is_object()) throw DataError("expected an object while reading field '" + std::string(key) + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw DataError("missing field '" + std::string(key) + "'");
  return *it;
}

double require_number(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw DataError("field '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::string require_string(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw DataError("field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line, number);
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace surprise::detail
