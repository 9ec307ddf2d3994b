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

#include "surprise/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "surprise/error.hpp"

namespace surprise {

namespace {

constexpr double kGridTolerance = 1e-6;

bool is_integer_multiple(double value, double step) {
  if (!(step > 0.0)) return false;
  const double ratio = value / step;
  return ratio >= 1.0 - kGridTolerance && std::abs(ratio - std::round(ratio)) <= kGridTolerance;
}

bool finite_state(const AgentState& s) {
  return std::isfinite(s.t) && std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
         std::isfinite(s.vx) && std::isfinite(s.vy);
}

std::string quoted(std::string_view kind, std::string_view id) {
  return std::string(kind) + " '" + std::string(id) + "'";
}

}  // namespace

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kVehicle:
      return "vehicle";
    case AgentKind::kPedestrian:
      return "pedestrian";
    case AgentKind::kCyclist:
      return "cyclist";
  }
  return "vehicle";
}

AgentKind parse_agent_kind(std::string_view token) {
  if (token == "vehicle") return AgentKind::kVehicle;
  if (token == "pedestrian") return AgentKind::kPedestrian;
  if (token == "cyclist") return AgentKind::kCyclist;
  throw DataError("unknown agent kind '" + std::string(token) + "'");
}

const Agent* Scenario::find_agent(std::string_view id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

std::size_t Scenario::num_steps() const {
  std::size_t n = 0;
  for (const auto& a : agents) n = std::max(n, a.states.size());
  return n;
}

double Scenario::time_origin() const {
  for (const auto& a : agents)
    for (std::size_t i = 0; i < a.states.size(); ++i)
      if (a.states[i]) return a.states[i]->t - static_cast<double>(i) * dt;
  return 0.0;
}

int Scenario::history_steps() const { return static_cast<int>(std::lround(history_horizon / dt)); }
int Scenario::future_steps() const { return static_cast<int>(std::lround(future_horizon / dt)); }

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) os << "; ";
    os << v.subject;
    if (v.step >= 0) os << " step " << v.step;
    os << ": " << v.message;
  }
  return os.str();
}

ValidationReport validate_scenario(const Scenario& s) {
  ValidationReport report;
  auto add = [&](std::string subject, std::string message, int step = -1) {
    report.violations.push_back({std::move(subject), std::move(message), step});
  };
  const std::string scen = quoted("scenario", s.scenario_id);

  if (s.scenario_id.empty()) add(scen, "empty scenario_id");
  const bool dt_ok = std::isfinite(s.dt) && s.dt > 0.0;
  if (!dt_ok) add(scen, "dt must be positive and finite");
  if (dt_ok && !is_integer_multiple(s.history_horizon, s.dt))
    add(scen, "history_horizon must be a positive integer multiple of dt");
  if (dt_ok && !is_integer_multiple(s.future_horizon, s.dt))
    add(scen, "future_horizon must be a positive integer multiple of dt");
  if (!s.find_agent(s.ego_id)) add(scen, "ego_id '" + s.ego_id + "' names no agent");

  std::set<std::string> ids;
  const std::size_t steps = s.num_steps();
  const double origin = s.time_origin();
  for (const auto& a : s.agents) {
    const std::string subj = quoted("agent", a.id);
    if (!ids.insert(a.id).second) add(subj, "duplicate agent id");
    if (!(a.length > 0.0) || !std::isfinite(a.length)) add(subj, "length must be positive");
    if (!(a.width > 0.0) || !std::isfinite(a.width)) add(subj, "width must be positive");
    if (a.states.size() != steps) add(subj, "state sequence does not cover the common time grid");
    bool any_present = false;
    std::optional<double> prev_t;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      const auto& st = a.states[i];
      if (!st) continue;
      any_present = true;
      const int step = static_cast<int>(i);
      if (!finite_state(*st)) {
        add(subj, "non-finite state field", step);
        continue;
      }
      if (!(st->heading > -std::numbers::pi && st->heading <= std::numbers::pi))
        add(subj, "heading outside (-pi, pi]", step);
      if (prev_t && !(st->t > *prev_t)) {
        add(subj, "timestamps not strictly increasing", step);
      } else if (dt_ok) {
        const double expected = origin + static_cast<double>(i) * s.dt;
        if (std::abs(st->t - expected) > kGridTolerance * std::max(1.0, std::abs(expected)))
          add(subj, "timestamp off the uniform dt grid", step);
      }
      prev_t = st->t;
    }
    if (!any_present) add(subj, "no observed state");
  }

  std::set<std::string> lane_ids;
  for (const auto& lane : s.lanes) {
    const std::string subj = quoted("lane", lane.id);
    if (!lane_ids.insert(lane.id).second) add(subj, "duplicate lane id");
    if (!(lane.width > 0.0) || !std::isfinite(lane.width)) add(subj, "width must be positive");
    if (lane.centerline.size() < 2) add(subj, "centerline needs at least two points");
    for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i)
      if (lane.centerline[i] == lane.centerline[i + 1]) add(subj, "repeated consecutive centerline point");
  }

  for (std::size_t i = 0; i < s.drivable_area.size(); ++i)
    if (!polygon_is_simple(s.drivable_area[i]))
      add(scen, "drivable polygon " + std::to_string(i) + " is not simple");

  return report;
}

bool in_drivable_area(const Scenario& s, Vec2 p) {
  if (!s.drivable_area.empty()) {
    for (const auto& poly : s.drivable_area)
      if (point_in_polygon(poly, p)) return true;
    return false;
  }
  if (s.lanes.empty()) return true;
  for (const auto& lane : s.lanes)
    if (project_onto_polyline(lane.centerline, p).distance <= 0.5 * lane.width) return true;
  return false;
}

LaneMatch closest_lane(Vec2 p, const Scenario& s) {
  if (s.lanes.empty()) throw DataError("scenario '" + s.scenario_id + "' has no lanes");
  LaneMatch best;
  for (const auto& lane : s.lanes) {
    const auto proj = project_onto_polyline(lane.centerline, p);
    const bool first = best.lane == nullptr;
    const bool nearer = !first && proj.distance < best.distance - 1e-9;
    const bool tie = !first && std::abs(proj.distance - best.distance) <= 1e-9 && lane.id < best.lane->id;
    if (first || nearer || tie) best = {&lane, proj.arc_length, proj.distance};
  }
  return best;
}

double Segment::time_at(int window_index) const {
  return source->time_origin() + static_cast<double>(window_start() + window_index) * source->dt;
}

int Segment::window_index_of(double t) const {
  const double rel = (t - time_at(0)) / source->dt;
  const double r = std::round(rel);
  if (std::abs(rel - r) > kGridTolerance) return -1;
  const int k = static_cast<int>(r);
  return k >= 0 && k < window_size() ? k : -1;
}

const SegmentAgent* Segment::find(std::string_view id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

SegmentAgent* Segment::find(std::string_view id) {
  for (auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

Segment slice_segment_at(const ScenarioPtr& s, int split_index) {
  const int hist = s->history_steps();
  const int fut = s->future_steps();
  const int steps = static_cast<int>(s->num_steps());
  if (split_index - hist + 1 < 0)
    throw ArgumentError("insufficient history: split index " + std::to_string(split_index) + " has " +
                        std::to_string(split_index + 1) + " of " + std::to_string(hist) + " history steps");
  if (split_index + fut >= steps)
    throw ArgumentError("insufficient future: split index " + std::to_string(split_index) + " leaves " +
                        std::to_string(std::max(0, steps - split_index - 1)) + " of " + std::to_string(fut) +
                        " future steps");
  Segment seg;
  seg.source = s;
  seg.split_index = split_index;
  seg.history_steps = hist;
  seg.future_steps = fut;
  const int start = split_index - hist + 1;
  for (const auto& a : s->agents) {
    SegmentAgent sa{a.id, a.kind, a.length, a.width, {}};
    sa.states.assign(a.states.begin() + start, a.states.begin() + start + hist + fut);
    seg.agents.push_back(std::move(sa));
  }
  return seg;
}

Segment slice_segment(const ScenarioPtr& s, double split_time) {
  const double rel = (split_time - s->time_origin()) / s->dt;
  const double r = std::round(rel);
  if (!std::isfinite(rel) || std::abs(rel - r) > kGridTolerance)
    throw ArgumentError("split time " + detail::format_double(split_time) + " is off the scenario time grid");
  return slice_segment_at(s, static_cast<int>(r));
}

Segment default_segment(const ScenarioPtr& s) { return slice_segment_at(s, s->history_steps() - 1); }

// ---------------------------------------------------------------------------
// Serialisation

Scenario parse_scenario(std::string_view json_line) {
  using detail::json;
  json j;
  try {
    j = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.scenario_id = detail::require_string(j, "scenario_id");
    s.dt = detail::require_number(j, "dt");
    s.ego_id = detail::require_string(j, "ego_id");
    s.history_horizon = detail::require_number(j, "history_horizon");
    s.future_horizon = detail::require_number(j, "future_horizon");
    for (const auto& ja : detail::require(j, "agents")) {
      Agent a;
      a.id = detail::require_string(ja, "id");
      a.kind = parse_agent_kind(detail::require_string(ja, "kind"));
      a.length = detail::require_number(ja, "length");
      a.width = detail::require_number(ja, "width");
      for (const auto& js : detail::require(ja, "states")) a.states.push_back(detail::state_from_json(js));
      s.agents.push_back(std::move(a));
    }
    if (const auto it = j.find("lanes"); it != j.end()) {
      for (const auto& jl : *it) {
        LaneSegment lane;
        lane.id = detail::require_string(jl, "id");
        lane.width = detail::require_number(jl, "width");
        for (const auto& p : detail::require(jl, "centerline")) {
          if (!p.is_array() || p.size() != 2) throw DataError("centerline points must be [x, y]");
          lane.centerline.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        s.lanes.push_back(std::move(lane));
      }
    }
    if (const auto it = j.find("drivable_area"); it != j.end()) {
      for (const auto& jp : *it) {
        Polygon poly;
        for (const auto& p : jp) {
          if (!p.is_array() || p.size() != 2) throw DataError("polygon points must be [x, y]");
          poly.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        s.drivable_area.push_back(std::move(poly));
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

std::string serialize_scenario(const Scenario& s) {
  using detail::json;
  json agents = json::array();
  for (const auto& a : s.agents) agents.push_back(detail::agent_to_json(a));
  json j{{"scenario_id", s.scenario_id},
         {"dt", s.dt},
         {"ego_id", s.ego_id},
         {"history_horizon", s.history_horizon},
         {"future_horizon", s.future_horizon},
         {"agents", std::move(agents)},
         {"lanes", detail::lanes_to_json(s.lanes)},
         {"drivable_area", detail::drivable_to_json(s.drivable_area)}};
  return j.dump();
}

ScenarioSet load_dataset(const std::filesystem::path& path) {
  ScenarioSet out;
  std::set<std::string> seen;
  detail::for_each_line(path, [&](std::string_view line, std::size_t number) {
    const std::string where = path.string() + ":" + std::to_string(number);
    Scenario s;
    try {
      s = parse_scenario(line);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    const auto report = validate_scenario(s);
    if (!report.ok())
      throw DataError(where + ": scenario '" + s.scenario_id + "' is invalid: " + report.summary());
    if (!seen.insert(s.scenario_id).second)
      throw DataError(where + ": duplicate scenario_id '" + s.scenario_id + "'");
    out.push_back(std::make_shared<const Scenario>(std::move(s)));
  });
  return out;
}

void save_dataset(const std::filesystem::path& path, const ScenarioSet& data) {
  auto out = detail::open_for_write(path);
  for (const auto& s : data) out << serialize_scenario(*s) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace surprise
