// Copyright 2026 The Verifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VERIFUZZ_CAMPAIGN_H_
#define VERIFUZZ_CAMPAIGN_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "verifuzz/grammar.h"
#include "verifuzz/mutator.h"
#include "verifuzz/runner.h"
#include "verifuzz/triage.h"
#include "verifuzz/typedgen.h"

namespace verifuzz::campaign {

enum class Strategy {
  kBlind,
  kBlindCoverage,
  kGrammar,
  kGrammarCoverage,
  kTyped
};

std::string_view StrategyName(Strategy strategy);
std::optional<Strategy> ParseStrategy(std::string_view name);
bool UsesCoverage(Strategy strategy);

// Blind inputs without a corpus are built by stacking this many rounds of
// byte mutation on the empty input (inclusive range).
inline constexpr int kBootstrapMinRounds = 1;
inline constexpr int kBootstrapMaxRounds = 8;
// Coverage samples are taken on change and at least this often.
inline constexpr double kHeartbeatSeconds = 5;
// stats.json and coverage.dat are rewritten at this interval.
inline constexpr double kFlushSeconds = 2;

struct CampaignConfig {
  Strategy strategy = Strategy::kGrammar;
  runner::TargetSpec target;
  // Required by the grammar strategies; blind strategies take their
  // mutation dictionary from it when present.
  std::string grammar_path;
  int max_depth = grammar::kDefaultMaxDepth;
  typedgen::TypedGenConfig typed;
  double time_budget_seconds = 300;
  uint64_t master_seed = 0;
  int workers = 1;
  std::string output_dir;
  // Optional extra stop conditions; 0 disables.
  uint64_t max_executions = 0;
  uint64_t max_buckets = 0;
  // Frames hashed per bucket; 0 hashes all.
  size_t top_k = 0;
  // Appends one line per generated input to inputs.log.
  bool log_inputs = false;

  absl::Status Validate() const;
};

nlohmann::json ConfigToJson(const CampaignConfig& config);
// Missing keys keep their defaults. Does not validate.
absl::StatusOr<CampaignConfig> ConfigFromJson(const nlohmann::json& j);

struct CoveragePoint {
  // Seconds since the campaign's time origin, millisecond resolution.
  double t = 0;
  uint64_t covered = 0;

  bool operator==(const CoveragePoint&) const = default;
};

enum class CampaignStatus { kRunning, kStopped, kFinished };

std::string_view StatusName(CampaignStatus status);
std::optional<CampaignStatus> ParseStatus(std::string_view name);

struct CampaignStats {
  std::string strategy;
  uint64_t executions = 0;
  std::map<std::string, uint64_t> by_classification;
  uint64_t buckets_found = 0;
  uint64_t corpus_size = 0;
  uint64_t covered = 0;
  std::vector<CoveragePoint> coverage;
  // Milliseconds since the Unix epoch.
  int64_t start_ms = 0;
  double elapsed_seconds = 0;
  CampaignStatus status = CampaignStatus::kRunning;
  // Set when a storage or configuration error ended the campaign.
  std::string error;
};

nlohmann::json StatsToJson(const CampaignStats& stats);
absl::StatusOr<CampaignStats> StatsFromJson(const nlohmann::json& j);

// Reads stats.json (and coverage.dat) from a campaign directory.
absl::StatusOr<CampaignStats> LoadStats(const std::string& campaign_dir);

// "t covered" lines; t uses the shortest exact decimal form.
std::string FormatSeries(const std::vector<CoveragePoint>& series);
absl::StatusOr<std::vector<CoveragePoint>> ParseSeries(std::string_view text);

// Writes `<strategy>_<k>.dat` per campaign (k counts campaigns of the same
// strategy in order) and summary.txt with one row per campaign. Returns the
// data file names in campaign order.
absl::StatusOr<std::vector<std::string>> EmitReport(
    const std::vector<CampaignStats>& campaigns, const std::string& out_dir);

struct Provenance {
  Strategy strategy = Strategy::kGrammar;
  uint64_t seed = 0;
  // Content hashes of corpus entries the input was derived from.
  std::vector<std::string> parents;
  // Derivation tree of grammar_coverage inputs, kept for the tree corpus.
  std::optional<grammar::DerivationTree> tree;
};

// Input source for one strategy. Not thread-safe; owned by the coordinator.
class InputSource {
 public:
  static absl::StatusOr<std::unique_ptr<InputSource>> Create(
      const CampaignConfig& config);

  // Produces the next input from `seed`. Deterministic given the seed and
  // the feedback received so far.
  std::string Next(uint64_t seed, Provenance* provenance);
  // Reports the coverage gain of an input previously returned by Next().
  // Returns true when the input joined the corpus.
  bool Feedback(const std::string& input, const Provenance& provenance,
                size_t new_counters, double t);

  const mutator::Corpus& corpus() const { return corpus_; }

 private:
  InputSource(const CampaignConfig& config, std::optional<grammar::Grammar> g,
              std::vector<std::string> dictionary);
  std::string Bootstrap(uint64_t seed);
  grammar::DerivationTree Fresh(uint64_t seed);

  CampaignConfig config_;
  std::optional<grammar::Grammar> grammar_;
  mutator::Corpus corpus_;
  // Trees of the coverage-novel corpus entries (grammar_coverage only).
  std::vector<grammar::DerivationTree> trees_;
};

// One campaign: owns the output directory, the corpus, the coverage set and
// the crash store. Run() blocks; the other methods may be called from any
// thread while it runs.
class Campaign {
 public:
  using Clock = std::chrono::steady_clock;

  // Validates the config, checks that the target is executable, creates the
  // output directory and writes config.json. `origin` is time zero of the
  // coverage series; by default the moment of creation.
  static absl::StatusOr<std::unique_ptr<Campaign>> Create(
      CampaignConfig config, std::optional<Clock::time_point> origin = {});

  absl::StatusOr<CampaignStats> Run();
  void RequestStop() { stop_.store(true); }

  CampaignStats Snapshot() const;
  const CampaignConfig& config() const { return config_; }
  triage::CrashStore& crashes() { return *crashes_; }

 private:
  Campaign(CampaignConfig config, Clock::time_point origin)
      : config_(std::move(config)), origin_(origin) {}
  double Now() const;
  void WorkerLoop(int worker);
  bool ShouldStop() const;
  // Requires mu_.
  absl::Status Flush();
  void AppendLog(const std::string& line);
  void NoteCoverage(double t, bool force);

  CampaignConfig config_;
  Clock::time_point origin_;
  std::atomic<bool> stop_{false};
  std::unique_ptr<triage::CrashStore> crashes_;
  std::string target_version_;

  mutable std::mutex mu_;
  std::unique_ptr<InputSource> source_;
  std::set<uint64_t> covered_;
  CampaignStats stats_;
  double run_start_ = 0;
  double last_flush_ = 0;
  uint64_t issued_ = 0;
  absl::Status error_;
};

// Convenience wrapper: Create() then Run().
absl::StatusOr<CampaignStats> RunCampaign(const CampaignConfig& config);

}  // namespace verifuzz::campaign

#endif  // VERIFUZZ_CAMPAIGN_H_
