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

#include "verifuzz/campaign.h"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "glog/logging.h"
#include "verifuzz/hashing.h"
#include "verifuzz/rng.h"
#include "verifuzz/version.h"

namespace verifuzz::campaign {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr Strategy kStrategies[] = {
    Strategy::kBlind, Strategy::kBlindCoverage, Strategy::kGrammar,
    Strategy::kGrammarCoverage, Strategy::kTyped};

absl::Status WriteFileAtomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot rename ", tmp.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot read ", path.string()));
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool IsExecutable(const std::string& program) {
  if (program.find('/') != std::string::npos) {
    return access(program.c_str(), X_OK) == 0 && !fs::is_directory(program);
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return false;
  for (absl::string_view dir : absl::StrSplit(path, ':')) {
    fs::path candidate =
        fs::path(std::string(dir.empty() ? "." : dir)) / program;
    if (access(candidate.c_str(), X_OK) == 0 && !fs::is_directory(candidate)) {
      return true;
    }
  }
  return false;
}

int64_t UnixMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string FormatDouble(double v) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, end);
}

template <typename T>
absl::Status ReadKey(const json& j, const char* key, T* out) {
  if (!j.contains(key)) return absl::OkStatus();
  try {
    *out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad value for ", key, ": ", e.what()));
  }
  return absl::OkStatus();
}

absl::StatusOr<runner::TargetSpec> TargetFromJson(const json& j) {
  runner::TargetSpec spec;
  if (!j.is_object())
    return absl::InvalidArgumentError("target must be an object");
  if (j.contains("command")) {
    if (j["command"].is_string()) {
      absl::StatusOr<std::vector<std::string>> words =
          runner::SplitCommandLine(j["command"].get<std::string>());
      if (!words.ok()) return words.status();
      spec.command = std::move(*words);
    } else if (absl::Status s = ReadKey(j, "command", &spec.command); !s.ok()) {
      return s;
    }
  }
  for (absl::Status s :
       {ReadKey(j, "timeout_seconds", &spec.timeout_seconds),
        ReadKey(j, "crash_exit_codes", &spec.crash_exit_codes),
        ReadKey(j, "coverage_env", &spec.coverage_env),
        ReadKey(j, "skip_backend_args", &spec.skip_backend_args),
        ReadKey(j, "version_args", &spec.version_args),
        ReadKey(j, "input_name", &spec.input_name),
        ReadKey(j, "memory_limit_mb", &spec.memory_limit_mb)}) {
    if (!s.ok()) return s;
  }
  return spec;
}

json TargetToJson(const runner::TargetSpec& spec) {
  return {{"command", spec.command},
          {"timeout_seconds", spec.timeout_seconds},
          {"crash_exit_codes", spec.crash_exit_codes},
          {"coverage_env", spec.coverage_env},
          {"skip_backend_args", spec.skip_backend_args},
          {"version_args", spec.version_args},
          {"input_name", spec.input_name},
          {"memory_limit_mb", spec.memory_limit_mb}};
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kBlind:
      return "blind";
    case Strategy::kBlindCoverage:
      return "blind_coverage";
    case Strategy::kGrammar:
      return "grammar";
    case Strategy::kGrammarCoverage:
      return "grammar_coverage";
    case Strategy::kTyped:
      return "typed";
  }
  return "grammar";
}

std::optional<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s : kStrategies) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

bool UsesCoverage(Strategy strategy) {
  return strategy == Strategy::kBlindCoverage ||
         strategy == Strategy::kGrammarCoverage;
}

std::string_view StatusName(CampaignStatus status) {
  switch (status) {
    case CampaignStatus::kRunning:
      return "running";
    case CampaignStatus::kStopped:
      return "stopped";
    case CampaignStatus::kFinished:
      return "finished";
  }
  return "running";
}

std::optional<CampaignStatus> ParseStatus(std::string_view name) {
  for (auto s : {CampaignStatus::kRunning, CampaignStatus::kStopped,
                 CampaignStatus::kFinished}) {
    if (StatusName(s) == name) return s;
  }
  return std::nullopt;
}

absl::Status CampaignConfig::Validate() const {
  if (absl::Status s = target.Validate(); !s.ok()) return s;
  if (!(time_budget_seconds > 0)) {
    return absl::InvalidArgumentError("time budget must be positive");
  }
  if (workers < 1)
    return absl::InvalidArgumentError("workers must be positive");
  if (output_dir.empty())
    return absl::InvalidArgumentError("missing output_dir");
  if ((strategy == Strategy::kGrammar ||
       strategy == Strategy::kGrammarCoverage) &&
      grammar_path.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(StrategyName(strategy)), " strategy needs a grammar"));
  }
  if (max_depth < 1)
    return absl::InvalidArgumentError("max_depth must be positive");
  if (strategy == Strategy::kTyped) {
    if (absl::Status s = typedgen::ValidateConfig(typed); !s.ok()) return s;
  }
  return absl::OkStatus();
}

json ConfigToJson(const CampaignConfig& config) {
  return {{"strategy", std::string(StrategyName(config.strategy))},
          {"target", TargetToJson(config.target)},
          {"grammar_path", config.grammar_path},
          {"max_depth", config.max_depth},
          {"typed",
           {{"max_classes", config.typed.max_classes},
            {"max_methods_per_class", config.typed.max_methods_per_class},
            {"max_stmt_depth", config.typed.max_stmt_depth},
            {"features", typedgen::FeaturesToString(config.typed.features)},
            {"illegal_old_placement", config.typed.illegal_old_placement}}},
          {"time_budget_seconds", config.time_budget_seconds},
          {"master_seed", config.master_seed},
          {"workers", config.workers},
          {"output_dir", config.output_dir},
          {"max_executions", config.max_executions},
          {"max_buckets", config.max_buckets},
          {"top_k", config.top_k},
          {"log_inputs", config.log_inputs}};
}

absl::StatusOr<CampaignConfig> ConfigFromJson(const json& j) {
  if (!j.is_object())
    return absl::InvalidArgumentError("config must be an object");
  CampaignConfig config;
  if (j.contains("strategy")) {
    if (!j["strategy"].is_string()) {
      return absl::InvalidArgumentError("strategy must be a string");
    }
    std::optional<Strategy> strategy =
        ParseStrategy(j["strategy"].get<std::string>());
    if (!strategy) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown strategy ", j["strategy"].get<std::string>()));
    }
    config.strategy = *strategy;
  }
  if (j.contains("target")) {
    absl::StatusOr<runner::TargetSpec> target = TargetFromJson(j["target"]);
    if (!target.ok()) return target.status();
    config.target = std::move(*target);
  }
  if (j.contains("master_seed") && j["master_seed"].is_string()) {
    if (!absl::SimpleAtoi(j["master_seed"].get<std::string>(),
                          &config.master_seed)) {
      return absl::InvalidArgumentError("bad master_seed");
    }
  } else if (absl::Status s = ReadKey(j, "master_seed", &config.master_seed);
             !s.ok()) {
    return s;
  }
  for (absl::Status s :
       {ReadKey(j, "grammar_path", &config.grammar_path),
        ReadKey(j, "max_depth", &config.max_depth),
        ReadKey(j, "time_budget_seconds", &config.time_budget_seconds),
        ReadKey(j, "workers", &config.workers),
        ReadKey(j, "output_dir", &config.output_dir),
        ReadKey(j, "max_executions", &config.max_executions),
        ReadKey(j, "max_buckets", &config.max_buckets),
        ReadKey(j, "top_k", &config.top_k),
        ReadKey(j, "log_inputs", &config.log_inputs)}) {
    if (!s.ok()) return s;
  }
  if (j.contains("typed")) {
    const json& t = j["typed"];
    if (!t.is_object())
      return absl::InvalidArgumentError("typed must be an object");
    std::string features = typedgen::FeaturesToString(config.typed.features);
    for (absl::Status s :
         {ReadKey(t, "max_classes", &config.typed.max_classes),
          ReadKey(t, "max_methods_per_class",
                  &config.typed.max_methods_per_class),
          ReadKey(t, "max_stmt_depth", &config.typed.max_stmt_depth),
          ReadKey(t, "features", &features),
          ReadKey(t, "illegal_old_placement",
                  &config.typed.illegal_old_placement)}) {
      if (!s.ok()) return s;
    }
    absl::StatusOr<typedgen::FeatureSet> parsed =
        typedgen::ParseFeatures(features);
    if (!parsed.ok()) return parsed.status();
    config.typed.features = *parsed;
  }
  return config;
}

json StatsToJson(const CampaignStats& stats) {
  json coverage = json::array();
  for (const CoveragePoint& p : stats.coverage) {
    coverage.push_back({{"t", p.t}, {"covered", p.covered}});
  }
  return {{"strategy", stats.strategy},
          {"executions", stats.executions},
          {"by_classification", stats.by_classification},
          {"buckets_found", stats.buckets_found},
          {"corpus_size", stats.corpus_size},
          {"covered", stats.covered},
          {"coverage", std::move(coverage)},
          {"start_ms", stats.start_ms},
          {"elapsed_seconds", stats.elapsed_seconds},
          {"status", std::string(StatusName(stats.status))},
          {"error", stats.error}};
}

absl::StatusOr<CampaignStats> StatsFromJson(const json& j) {
  if (!j.is_object())
    return absl::InvalidArgumentError("stats must be an object");
  CampaignStats stats;
  std::string status = "running";
  for (absl::Status s :
       {ReadKey(j, "strategy", &stats.strategy),
        ReadKey(j, "executions", &stats.executions),
        ReadKey(j, "by_classification", &stats.by_classification),
        ReadKey(j, "buckets_found", &stats.buckets_found),
        ReadKey(j, "corpus_size", &stats.corpus_size),
        ReadKey(j, "covered", &stats.covered),
        ReadKey(j, "start_ms", &stats.start_ms),
        ReadKey(j, "elapsed_seconds", &stats.elapsed_seconds),
        ReadKey(j, "status", &status), ReadKey(j, "error", &stats.error)}) {
    if (!s.ok()) return s;
  }
  std::optional<CampaignStatus> parsed = ParseStatus(status);
  if (!parsed) return absl::InvalidArgumentError("bad status " + status);
  stats.status = *parsed;
  if (j.contains("coverage")) {
    try {
      for (const json& p : j["coverage"]) {
        stats.coverage.push_back(
            {p.at("t").get<double>(), p.at("covered").get<uint64_t>()});
      }
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad coverage: ", e.what()));
    }
  }
  return stats;
}

absl::StatusOr<CampaignStats> LoadStats(const std::string& campaign_dir) {
  absl::StatusOr<std::string> text =
      ReadFile(fs::path(campaign_dir) / "stats.json");
  if (!text.ok()) return text.status();
  json j = json::parse(*text, nullptr, false);
  if (j.is_discarded()) {
    return absl::DataLossError(absl::StrCat("corrupt stats in ", campaign_dir));
  }
  return StatsFromJson(j);
}

std::string FormatSeries(const std::vector<CoveragePoint>& series) {
  std::string out;
  for (const CoveragePoint& p : series) {
    absl::StrAppend(&out, FormatDouble(p.t), " ", p.covered, "\n");
  }
  return out;
}

absl::StatusOr<std::vector<CoveragePoint>> ParseSeries(std::string_view text) {
  std::vector<CoveragePoint> series;
  int line_number = 0;
  for (absl::string_view line :
       absl::StrSplit(absl::string_view(text.data(), text.size()), '\n')) {
    ++line_number;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    std::vector<absl::string_view> cols =
        absl::StrSplit(line, ' ', absl::SkipEmpty());
    CoveragePoint p;
    if (cols.size() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected `t covered`"));
    }
    auto [end, ec] =
        std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), p.t);
    if (ec != std::errc() || end != cols[0].data() + cols[0].size() ||
        !absl::SimpleAtoi(cols[1], &p.covered)) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": malformed point"));
    }
    series.push_back(p);
  }
  return series;
}

absl::StatusOr<std::vector<std::string>> EmitReport(
    const std::vector<CampaignStats>& campaigns, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", out_dir, ": ", ec.message()));
  }
  std::map<std::string, int> seen;
  std::vector<std::string> names;
  std::string summary = "series strategy executions buckets covered\n";
  for (const CampaignStats& stats : campaigns) {
    std::string strategy = stats.strategy.empty() ? "campaign" : stats.strategy;
    std::string name = absl::StrCat(strategy, "_", seen[strategy]++);
    if (absl::Status s = WriteFileAtomic(fs::path(out_dir) / (name + ".dat"),
                                         FormatSeries(stats.coverage));
        !s.ok()) {
      return s;
    }
    uint64_t covered =
        stats.coverage.empty() ? 0 : stats.coverage.back().covered;
    absl::StrAppend(&summary, name, " ", strategy, " ", stats.executions, " ",
                    stats.buckets_found, " ", covered, "\n");
    names.push_back(name + ".dat");
  }
  if (absl::Status s =
          WriteFileAtomic(fs::path(out_dir) / "summary.txt", summary);
      !s.ok()) {
    return s;
  }
  return names;
}

// ---------------------------------------------------------------------------
// Input sources.

absl::StatusOr<std::unique_ptr<InputSource>> InputSource::Create(
    const CampaignConfig& config) {
  std::optional<grammar::Grammar> g;
  std::vector<std::string> dictionary;
  if (!config.grammar_path.empty()) {
    absl::StatusOr<grammar::Grammar> loaded =
        grammar::LoadGrammarFile(config.grammar_path);
    if (!loaded.ok()) return loaded.status();
    dictionary = grammar::ExtractDictionary(*loaded);
    g = std::move(*loaded);
  }
  return std::unique_ptr<InputSource>(
      new InputSource(config, std::move(g), std::move(dictionary)));
}

InputSource::InputSource(const CampaignConfig& config,
                         std::optional<grammar::Grammar> g,
                         std::vector<std::string> dictionary)
    : config_(config), grammar_(std::move(g)), corpus_(std::move(dictionary)) {}

std::string InputSource::Bootstrap(uint64_t seed) {
  Rng rng(seed);
  int rounds =
      static_cast<int>(rng.Range(kBootstrapMinRounds, kBootstrapMaxRounds));
  std::string input;
  for (int i = 0; i < rounds; ++i) {
    input = mutator::MutateBytes(input, corpus_.dictionary(), rng.Next());
  }
  return input;
}

grammar::DerivationTree InputSource::Fresh(uint64_t seed) {
  absl::StatusOr<grammar::DerivationTree> tree =
      grammar::Generate(*grammar_, seed, config_.max_depth);
  // Generate() fails only for grammars without finite derivations, which
  // LoadGrammarFile() rejects.
  CHECK(tree.ok()) << tree.status();
  return std::move(*tree);
}

std::string InputSource::Next(uint64_t seed, Provenance* provenance) {
  Provenance p;
  p.strategy = config_.strategy;
  p.seed = seed;
  std::string input;
  Rng rng(seed);
  switch (config_.strategy) {
    case Strategy::kBlind:
      input = Bootstrap(rng.Next());
      break;
    case Strategy::kBlindCoverage:
      if (corpus_.empty() || rng.Chance(1, 10)) {
        input = Bootstrap(rng.Next());
      } else {
        const mutator::CorpusEntry& parent =
            corpus_.entries()[rng.Below(corpus_.size())];
        p.parents.push_back(parent.hash);
        input =
            mutator::MutateBytes(parent.data, corpus_.dictionary(), rng.Next());
      }
      break;
    case Strategy::kGrammar:
      input = grammar::Serialize(Fresh(seed));
      break;
    case Strategy::kGrammarCoverage:
      if (trees_.empty() || rng.Coin()) {
        p.tree = Fresh(rng.Next());
      } else {
        size_t i = rng.Below(trees_.size());
        p.parents.push_back(corpus_.entries()[i].hash);
        p.tree = grammar::MutateTree(*grammar_, trees_[i], trees_, rng.Next(),
                                     config_.max_depth);
      }
      input = grammar::Serialize(*p.tree);
      break;
    case Strategy::kTyped: {
      typedgen::TypedGenConfig typed = config_.typed;
      typed.seed = seed;
      absl::StatusOr<std::string> program = typedgen::GenerateTyped(typed);
      CHECK(program.ok()) << program.status();  // Config validated up front.
      input = std::move(*program);
      break;
    }
  }
  if (provenance != nullptr) *provenance = std::move(p);
  return input;
}

bool InputSource::Feedback(const std::string& input,
                           const Provenance& provenance, size_t new_counters,
                           double t) {
  if (!UsesCoverage(config_.strategy)) return false;
  if (!corpus_.AddIfNovel(input, new_counters, t)) return false;
  if (config_.strategy == Strategy::kGrammarCoverage) {
    CHECK(provenance.tree.has_value());
    trees_.push_back(*provenance.tree);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Campaign.

absl::StatusOr<std::unique_ptr<Campaign>> Campaign::Create(
    CampaignConfig config, std::optional<Clock::time_point> origin) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  // Runs use a fresh working directory, so relative paths must be resolved
  // now. Bare names are still looked up on PATH.
  std::string& program = config.target.command[0];
  if (program.find('/') != std::string::npos && program[0] != '/') {
    program = fs::absolute(program).lexically_normal().string();
  }
  if (!IsExecutable(program)) {
    return absl::FailedPreconditionError(
        absl::StrCat("target is not executable: ", config.target.command[0]));
  }
  std::unique_ptr<Campaign> campaign(
      new Campaign(std::move(config), origin.value_or(Clock::now())));
  const CampaignConfig& c = campaign->config_;
  absl::StatusOr<std::unique_ptr<InputSource>> source = InputSource::Create(c);
  if (!source.ok()) return source.status();
  campaign->source_ = std::move(*source);

  const fs::path dir = c.output_dir;
  std::error_code ec;
  fs::create_directories(dir / "corpus", ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir.string(), ": ", ec.message()));
  }
  absl::StatusOr<std::unique_ptr<triage::CrashStore>> crashes =
      triage::CrashStore::Open((dir / "crashes").string());
  if (!crashes.ok()) return crashes.status();
  campaign->crashes_ = std::move(*crashes);
  if (absl::Status s =
          WriteFileAtomic(dir / "config.json", ConfigToJson(c).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  campaign->target_version_ = runner::ProbeVersion(c.target);
  campaign->stats_.strategy = std::string(StrategyName(c.strategy));
  campaign->stats_.buckets_found = campaign->crashes_->size();
  return campaign;
}

double Campaign::Now() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               origin_)
             .count() /
         1000.0;
}

bool Campaign::ShouldStop() const {
  if (stop_.load() || !error_.ok()) return true;
  if (Now() - run_start_ >= config_.time_budget_seconds) return true;
  if (config_.max_executions > 0 && issued_ >= config_.max_executions)
    return true;
  if (config_.max_buckets > 0 && stats_.buckets_found >= config_.max_buckets) {
    return true;
  }
  return false;
}

void Campaign::AppendLog(const std::string& line) {
  std::ofstream out(fs::path(config_.output_dir) / "log.txt", std::ios::app);
  out << FormatDouble(Now()) << " " << line << '\n';
}

void Campaign::NoteCoverage(double t, bool force) {
  std::vector<CoveragePoint>& series = stats_.coverage;
  uint64_t covered = covered_.size();
  stats_.covered = covered;
  double last_t = series.empty() ? 0 : series.back().t;
  uint64_t last_covered = series.empty() ? 0 : series.back().covered;
  if (!series.empty() && t < last_t) t = last_t;
  bool changed = covered != last_covered;
  bool heartbeat = t - last_t >= kHeartbeatSeconds;
  if (changed || heartbeat || (force && (series.empty() || t > last_t))) {
    series.push_back({t, covered});
  }
}

absl::Status Campaign::Flush() {
  const fs::path dir = config_.output_dir;
  stats_.elapsed_seconds = Now() - run_start_;
  stats_.corpus_size = source_->corpus().size();
  last_flush_ = Now();
  if (absl::Status s = WriteFileAtomic(dir / "stats.json",
                                       StatsToJson(stats_).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  return WriteFileAtomic(dir / "coverage.dat", FormatSeries(stats_.coverage));
}

CampaignStats Campaign::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  CampaignStats copy = stats_;
  if (copy.status == CampaignStatus::kRunning) {
    copy.elapsed_seconds = Now() - run_start_;
  }
  copy.corpus_size = source_->corpus().size();
  return copy;
}

void Campaign::WorkerLoop(int worker) {
  const runner::TargetSpec& target = config_.target;
  triage::TargetVersion version{absl::StrJoin(target.command, " "),
                                target_version_,
                                std::string(kFrameworkVersion)};
  for (uint64_t k = 0;; ++k) {
    std::string input;
    Provenance provenance;
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (ShouldStop()) return;
      ++issued_;
      input =
          source_->Next(SplitSeed(config_.master_seed, worker, k), &provenance);
      if (config_.log_inputs) {
        std::ofstream out(fs::path(config_.output_dir) / "inputs.log",
                          std::ios::app);
        out << worker << " " << k << " " << HexU64(provenance.seed) << " "
            << ContentHash(input) << " "
            << absl::StrJoin(provenance.parents, ",") << '\n';
      }
    }

    absl::StatusOr<runner::RunOutcome> outcome = runner::RunOnce(target, input);

    std::lock_guard<std::mutex> lock(mu_);
    if (!outcome.ok()) {
      if (error_.ok()) error_ = outcome.status();
      AppendLog(absl::StrCat("error: ", outcome.status().ToString()));
      return;
    }
    const double t = Now();
    size_t fresh = 0;
    for (uint64_t id : outcome->coverage) fresh += covered_.insert(id).second;
    outcome->new_counters = fresh;
    ++stats_.executions;
    ++stats_.by_classification[std::string(
        runner::ClassificationName(outcome->classification))];
    if (source_->Feedback(input, provenance, fresh, t)) {
      absl::Status s = WriteFileAtomic(
          fs::path(config_.output_dir) / "corpus" / ContentHash(input), input);
      if (!s.ok()) {
        if (error_.ok()) error_ = s;
        return;
      }
    }
    if (outcome->classification == runner::Classification::kCrash) {
      triage::CrashMeta meta{stats_.strategy, provenance.seed, UnixMillis(),
                             version};
      auto recorded = crashes_->Record(*outcome, input, meta, config_.top_k);
      if (!recorded.ok()) {
        // Crashes must not be dropped silently: stop and surface the error.
        if (error_.ok()) error_ = recorded.status();
        AppendLog(absl::StrCat("error: ", recorded.status().ToString()));
        return;
      }
      if (recorded->second) {
        stats_.buckets_found = crashes_->size();
        AppendLog(absl::StrCat("new bucket ", recorded->first.hash, " ",
                               recorded->first.exception_name, " seed ",
                               HexU64(provenance.seed)));
      }
    }
    NoteCoverage(t, false);
    if (t - last_flush_ >= kFlushSeconds) {
      if (absl::Status s = Flush(); !s.ok() && error_.ok()) error_ = s;
    }
  }
}

absl::StatusOr<CampaignStats> Campaign::Run() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    run_start_ = Now();
    last_flush_ = run_start_;
    stats_.start_ms = UnixMillis();
    stats_.status = CampaignStatus::kRunning;
    AppendLog(absl::StrCat(
        "start strategy=", stats_.strategy, " seed=", config_.master_seed,
        " workers=", config_.workers, " target_version=", target_version_));
    if (absl::Status s = Flush(); !s.ok()) return s;
  }
  std::vector<std::thread> threads;
  for (int w = 1; w < config_.workers; ++w) {
    threads.emplace_back([this, w] { WorkerLoop(w); });
  }
  WorkerLoop(0);
  for (std::thread& t : threads) t.join();

  std::lock_guard<std::mutex> lock(mu_);
  NoteCoverage(Now(), true);
  stats_.status = (stop_.load() || !error_.ok()) ? CampaignStatus::kStopped
                                                 : CampaignStatus::kFinished;
  if (!error_.ok()) stats_.error = error_.ToString();
  AppendLog(absl::StrCat("end status=", std::string(StatusName(stats_.status)),
                         " executions=", stats_.executions, " buckets=",
                         stats_.buckets_found, " covered=", stats_.covered));
  absl::Status flushed = Flush();
  if (!error_.ok()) return error_;
  if (!flushed.ok()) return flushed;
  return stats_;
}

absl::StatusOr<CampaignStats> RunCampaign(const CampaignConfig& config) {
  absl::StatusOr<std::unique_ptr<Campaign>> campaign = Campaign::Create(config);
  if (!campaign.ok()) return campaign.status();
  return (*campaign)->Run();
}

}  // namespace verifuzz::campaign
