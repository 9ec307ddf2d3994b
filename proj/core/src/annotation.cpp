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

#include "surprise/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace surprise {

std::string_view to_string(PairStrategy s) {
  return s == PairStrategy::kUniformRandom ? "uniform-random" : "coverage-balanced";
}

PairStrategy parse_pair_strategy(std::string_view token) {
  if (token == "uniform-random") return PairStrategy::kUniformRandom;
  if (token == "coverage-balanced") return PairStrategy::kCoverageBalanced;
  throw ArgumentError("unknown pair strategy '" + std::string(token) + "'");
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

// ---------------------------------------------------------------------------
// Journal

JournalFile::JournalFile(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (std::filesystem::exists(path_, ec)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path_.string() + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    const auto last_newline = content.find_last_of('\n');
    const std::size_t committed = last_newline == std::string::npos ? 0 : last_newline + 1;
    if (committed < content.size()) {
      diagnostics_.push_back("discarded " + std::to_string(content.size() - committed) +
                             " bytes of an unterminated trailing record in '" + path_.string() + "'");
      std::filesystem::resize_file(path_, committed, ec);
      if (ec) throw IoError("cannot truncate '" + path_.string() + "': " + ec.message());
    }
    std::size_t start = 0;
    while (start < committed) {
      const auto end = content.find('\n', start);
      std::string line = content.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") != std::string::npos) lines_.push_back(std::move(line));
      start = end + 1;
    }
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open '" + path_.string() + "' for appending: " + std::strerror(errno));
}

JournalFile::~JournalFile() {
  if (fd_ >= 0) ::close(fd_);
}

void JournalFile::append(const std::string& line) {
  const std::string data = line + '\n';
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("append to '" + path_.string() + "' failed: " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw IoError("fsync of '" + path_.string() + "' failed: " + std::strerror(errno));
}

// ---------------------------------------------------------------------------
// Label store and registry

LabelStore::LabelStore(const std::filesystem::path& path) : journal_(path) {
  std::size_t number = 0;
  for (const auto& line : journal_.replay()) {
    ++number;
    try {
      const auto j = detail::json::parse(line);
      const std::string event = detail::require_string(j, "event");
      const std::string pair_id = detail::require_string(j, "pair_id");
      if (event == "superseded") {
        ++superseded_;
        continue;
      }
      if (event != "label") throw DataError("unknown event '" + event + "'");
      PreferenceRecord r{detail::require_string(j, "annotator"), detail::require_string(j, "a"),
                         detail::require_string(j, "b"), parse_choice(detail::require_string(j, "choice")),
                         detail::require(j, "ts").get<std::int64_t>()};
      if (!effective_.emplace(pair_id, std::move(r)).second) ++superseded_;
    } catch (const detail::json::exception& e) {
      throw DataError(path.string() + ": record " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path.string() + ": record " + std::to_string(number) + ": " + e.what());
    }
  }
}

LabelStore::SubmitResult LabelStore::append(const std::string& pair_id, const PreferenceRecord& record) {
  const auto it = effective_.find(pair_id);
  if (it != effective_.end()) {
    const detail::json j{{"event", "superseded"},
                         {"pair_id", pair_id},
                         {"annotator", record.annotator},
                         {"choice", std::string(to_string(record.choice))},
                         {"ts", record.ts}};
    journal_.append(j.dump());
    ++superseded_;
    return {false, it->second};
  }
  const detail::json j{{"event", "label"},
                       {"pair_id", pair_id},
                       {"annotator", record.annotator},
                       {"a", record.a},
                       {"b", record.b},
                       {"choice", std::string(to_string(record.choice))},
                       {"ts", record.ts}};
  journal_.append(j.dump());
  effective_.emplace(pair_id, record);
  return {true, record};
}

std::vector<PreferenceRecord> LabelStore::effective() const {
  std::vector<std::pair<std::string, const PreferenceRecord*>> items;
  for (const auto& [id, r] : effective_) items.push_back({id, &r});
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) {
    return std::tie(x.second->ts, x.first) < std::tie(y.second->ts, y.first);
  });
  std::vector<PreferenceRecord> out;
  for (const auto& [id, r] : items) out.push_back(*r);
  return out;
}

PairRegistry::PairRegistry(const std::filesystem::path& path) : journal_(path) {
  std::size_t number = 0;
  for (const auto& line : journal_.replay()) {
    ++number;
    try {
      const auto j = detail::json::parse(line);
      PairAssignment a{detail::require_string(j, "pair_id"), detail::require_string(j, "a"),
                       detail::require_string(j, "b"), detail::require_string(j, "annotator"),
                       detail::require(j, "served_at").get<std::int64_t>()};
      const std::string id = a.pair_id;
      if (!by_id_.emplace(id, std::move(a)).second) throw DataError("duplicate pair id '" + id + "'");
      order_.push_back(id);
    } catch (const detail::json::exception& e) {
      throw DataError(path.string() + ": record " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path.string() + ": record " + std::to_string(number) + ": " + e.what());
    }
  }
}

void PairRegistry::append(const PairAssignment& a) {
  const detail::json j{
      {"pair_id", a.pair_id}, {"a", a.a}, {"b", a.b}, {"annotator", a.annotator}, {"served_at", a.served_at}};
  journal_.append(j.dump());
  by_id_.emplace(a.pair_id, a);
  order_.push_back(a.pair_id);
}

const PairAssignment* PairRegistry::find(const std::string& pair_id) const {
  const auto it = by_id_.find(pair_id);
  return it == by_id_.end() ? nullptr : &it->second;
}

std::vector<PairAssignment> PairRegistry::all() const {
  std::vector<PairAssignment> out;
  for (const auto& id : order_) out.push_back(by_id_.at(id));
  return out;
}

// ---------------------------------------------------------------------------
// Service

namespace {

std::filesystem::path registry_path(const AnnotationOptions& o) {
  if (!o.registry.empty()) return o.registry;
  auto p = o.labels;
  p += ".pairs";
  return p;
}

using UnorderedPair = std::pair<std::string, std::string>;

UnorderedPair unordered(const std::string& a, const std::string& b) { return a < b ? UnorderedPair{a, b} : UnorderedPair{b, a}; }

}  // namespace

AnnotationService::AnnotationService(ScenarioSet data, AnnotationOptions opts)
    : opts_(std::move(opts)), labels_(opts_.labels), registry_(registry_path(opts_)), rng_(opts_.seed) {
  if (!opts_.clock) opts_.clock = system_clock();
  for (auto& s : data) {
    ids_.push_back(s->scenario_id);
    data_.emplace(s->scenario_id, std::move(s));
  }
}

PairAssignment AnnotationService::next_pair(const std::string& annotator, std::optional<PairStrategy> strategy) {
  if (annotator.empty()) throw ArgumentError("annotator id is required");
  std::unique_lock lock(mutex_);
  const std::size_t n = ids_.size();
  if (n < 2) throw ArgumentError("the dataset needs at least two scenarios");

  std::set<UnorderedPair> labelled;
  std::map<UnorderedPair, PairAssignment> outstanding;
  for (const auto& a : registry_.all()) {
    if (a.annotator != annotator) continue;
    const auto key = unordered(a.a, a.b);
    if (labels_.contains(a.pair_id)) {
      labelled.insert(key);
      outstanding.erase(key);
    } else if (!labelled.contains(key)) {
      outstanding.emplace(key, a);
    }
  }
  const std::size_t total = n * (n - 1) / 2;
  if (labelled.size() >= total) throw ExhaustedError("annotator '" + annotator + "' has labelled every pair");

  std::optional<std::pair<std::string, std::string>> chosen;
  if (strategy.value_or(opts_.strategy) == PairStrategy::kUniformRandom) {
    for (int attempt = 0; attempt < 64 && !chosen; ++attempt) {
      const std::size_t i = static_cast<std::size_t>(rng_() % n);
      std::size_t j = static_cast<std::size_t>(rng_() % (n - 1));
      if (j >= i) ++j;
      if (!labelled.contains(unordered(ids_[i], ids_[j]))) chosen = {ids_[i], ids_[j]};
    }
    if (!chosen) {
      std::vector<std::pair<std::size_t, std::size_t>> eligible;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (!labelled.contains(unordered(ids_[i], ids_[j]))) eligible.push_back({i, j});
      const auto& [i, j] = eligible[static_cast<std::size_t>(rng_() % eligible.size())];
      chosen = {ids_[i], ids_[j]};
    }
  } else {
    std::map<std::string, std::size_t> counts;
    for (const auto& id : ids_) counts[id] = 0;
    for (const auto& r : labels_.effective()) {
      if (counts.contains(r.a)) ++counts[r.a];
      if (counts.contains(r.b)) ++counts[r.b];
    }
    std::vector<std::string> order = ids_;
    std::sort(order.begin(), order.end(), [&](const std::string& x, const std::string& y) {
      return std::tie(counts[x], x) < std::tie(counts[y], y);
    });
    for (std::size_t i = 0; i < n && !chosen; ++i)
      for (std::size_t j = i + 1; j < n && !chosen; ++j)
        if (!labelled.contains(unordered(order[i], order[j]))) chosen = {order[i], order[j]};
  }

  const auto key = unordered(chosen->first, chosen->second);
  if (const auto it = outstanding.find(key); it != outstanding.end()) return it->second;
  char id[32];
  std::snprintf(id, sizeof(id), "pair-%06zu", registry_.size());
  PairAssignment a{id, chosen->first, chosen->second, annotator, opts_.clock()};
  registry_.append(a);
  return a;
}

LabelStore::SubmitResult AnnotationService::submit_label(const std::string& pair_id, const std::string& choice) {
  const Choice c = parse_choice(choice);
  std::unique_lock lock(mutex_);
  const PairAssignment* a = registry_.find(pair_id);
  if (!a) throw UnknownPairError("unknown pair id '" + pair_id + "'");
  return labels_.append(pair_id, PreferenceRecord{a->annotator, a->a, a->b, c, opts_.clock()});
}

std::vector<PreferenceRecord> AnnotationService::labels() const {
  std::shared_lock lock(mutex_);
  return labels_.effective();
}

std::string AnnotationService::export_text() const {
  std::string out;
  for (const auto& r : labels()) out += preference_to_json(r) + '\n';
  return out;
}

void AnnotationService::export_labels(const std::filesystem::path& path) const {
  const std::string text = export_text();
  auto out = detail::open_for_write(path);
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

namespace {

detail::json payload_json(const Scenario& s) {
  detail::json agents = detail::json::array();
  for (const auto& a : s.agents) agents.push_back(detail::agent_to_json(a));
  return detail::json{{"scenario_id", s.scenario_id},
                      {"ego_id", s.ego_id},
                      {"dt", s.dt},
                      {"agents", std::move(agents)},
                      {"lanes", detail::lanes_to_json(s.lanes)},
                      {"drivable_area", detail::drivable_to_json(s.drivable_area)},
                      {"split_index", s.history_steps() - 1}};
}

}  // namespace

std::string AnnotationService::render_payload(const std::string& scenario_id) const {
  const auto it = data_.find(scenario_id);
  if (it == data_.end()) throw ArgumentError("unknown scenario '" + scenario_id + "'");
  return payload_json(*it->second).dump();
}

std::string AnnotationService::pair_response(const PairAssignment& p) const {
  const detail::json j{{"pair_id", p.pair_id},
                       {"annotator", p.annotator},
                       {"a", payload_json(*data_.at(p.a))},
                       {"b", payload_json(*data_.at(p.b))}};
  return j.dump();
}

std::size_t AnnotationService::num_labels() const {
  std::shared_lock lock(mutex_);
  return labels_.size();
}

std::vector<std::string> AnnotationService::diagnostics() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out = labels_.diagnostics();
  out.insert(out.end(), registry_.diagnostics().begin(), registry_.diagnostics().end());
  return out;
}

}  // namespace surprise
