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

// Pairwise annotation backend: pair assignment, a durable append-only label
// store and preference export.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "surprise/error.hpp"
#include "surprise/eval_rank.hpp"
#include "surprise/scenario.hpp"

namespace surprise {

class ExhaustedError : public Error {
 public:
  using Error::Error;
};

class UnknownPairError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

enum class PairStrategy { kUniformRandom, kCoverageBalanced };

std::string_view to_string(PairStrategy s);  // "uniform-random", "coverage-balanced"
PairStrategy parse_pair_strategy(std::string_view token);

struct PairAssignment {
  std::string pair_id;
  std::string a;
  std::string b;
  std::string annotator;
  std::int64_t served_at = 0;

  bool operator==(const PairAssignment&) const = default;
};

/// Milliseconds since the epoch.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

/// Line-oriented append-only file. Every append is flushed with fsync before
/// returning. On open an unterminated trailing line (torn write) is cut off
/// and reported in diagnostics(); a malformed complete line is a DataError.
class JournalFile {
 public:
  explicit JournalFile(std::filesystem::path path);
  ~JournalFile();
  JournalFile(const JournalFile&) = delete;
  JournalFile& operator=(const JournalFile&) = delete;

  /// Complete lines present at open time.
  const std::vector<std::string>& replay() const { return lines_; }
  void append(const std::string& line);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<std::string> lines_;
  std::vector<std::string> diagnostics_;
};

/// Label events keyed by pair id. The first label for a pair is effective;
/// later ones are logged as superseded events and otherwise ignored.
class LabelStore {
 public:
  explicit LabelStore(const std::filesystem::path& path);

  struct SubmitResult {
    bool accepted = false;  // false when the pair already had a label
    PreferenceRecord effective;
  };

  SubmitResult append(const std::string& pair_id, const PreferenceRecord& record);
  bool contains(const std::string& pair_id) const { return effective_.contains(pair_id); }
  /// Effective records ordered by (ts, pair id).
  std::vector<PreferenceRecord> effective() const;
  std::size_t size() const { return effective_.size(); }
  std::size_t superseded() const { return superseded_; }
  const std::vector<std::string>& diagnostics() const { return journal_.diagnostics(); }

 private:
  JournalFile journal_;
  std::map<std::string, PreferenceRecord> effective_;
  std::size_t superseded_ = 0;
};

class PairRegistry {
 public:
  explicit PairRegistry(const std::filesystem::path& path);

  void append(const PairAssignment& a);
  const PairAssignment* find(const std::string& pair_id) const;
  std::size_t size() const { return order_.size(); }
  const std::vector<std::string>& diagnostics() const { return journal_.diagnostics(); }
  std::vector<PairAssignment> all() const;

 private:
  JournalFile journal_;
  std::map<std::string, PairAssignment> by_id_;
  std::vector<std::string> order_;
};

struct AnnotationOptions {
  std::filesystem::path labels;
  std::filesystem::path registry;  // defaults to `<labels>.pairs`
  PairStrategy strategy = PairStrategy::kUniformRandom;
  std::uint64_t seed = 0;
  Clock clock;  // defaults to the system clock
};

/// Scenario pairs for comparison and label collection. Assignment and label
/// appends are serialised; payload rendering and export run concurrently.
class AnnotationService {
 public:
  AnnotationService(ScenarioSet data, AnnotationOptions opts);

  /// Unordered pair the annotator has not labelled. An already served but
  /// unlabelled pair is handed out again under its original id. Throws
  /// ExhaustedError when every pair is labelled and ArgumentError for fewer
  /// than two scenarios.
  PairAssignment next_pair(const std::string& annotator, std::optional<PairStrategy> strategy = std::nullopt);

  /// Throws UnknownPairError for a pair id never served and ArgumentError for
  /// an invalid choice token. The record is durable when this returns.
  LabelStore::SubmitResult submit_label(const std::string& pair_id, const std::string& choice);

  std::vector<PreferenceRecord> labels() const;
  /// Preference file text (one JSON record per line).
  std::string export_text() const;
  void export_labels(const std::filesystem::path& out) const;

  /// Playback payload {scenario_id, ego_id, dt, agents, lanes, drivable_area,
  /// split_index} as JSON text.
  std::string render_payload(const std::string& scenario_id) const;
  /// {pair_id, annotator, a: payload, b: payload} as JSON text.
  std::string pair_response(const PairAssignment& p) const;

  std::size_t num_scenarios() const { return data_.size(); }
  std::size_t num_labels() const;
  std::vector<std::string> diagnostics() const;

 private:
  std::vector<std::string> ids_;
  std::map<std::string, ScenarioPtr> data_;
  AnnotationOptions opts_;
  mutable std::shared_mutex mutex_;
  LabelStore labels_;
  PairRegistry registry_;
  std::mt19937_64 rng_;
};

/// HTTP front end: GET /api/pair, POST /api/label, GET /api/export,
/// GET /api/health.
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationService& service);
  ~AnnotationServer();

  /// Binds to `port` (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace surprise
