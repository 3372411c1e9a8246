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

#include "verifuzz/service.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "absl/strings/escaping.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "glog/logging.h"
#include "httplib.h"
#include "json.hpp"
#include "verifuzz/campaign.h"
#include "verifuzz/grammar.h"
#include "verifuzz/minimizer.h"
#include "verifuzz/triage.h"

namespace verifuzz::service {
namespace {

namespace fs = std::filesystem;
using campaign::Campaign;
using campaign::CampaignConfig;
using campaign::CampaignStats;
using campaign::CampaignStatus;
using nlohmann::json;

constexpr char kPlaceholderPage[] =
    "<!doctype html>\n<html><head><meta "
    "charset=\"utf-8\"><title>verifuzz</title>"
    "</head>\n<body><h1>verifuzz</h1><p>No dashboard assets are installed. "
    "Start the service with <code>--assets</code> to serve them, or use the "
    "JSON API under <a href=\"/api/campaigns\">/api/campaigns</a>.</p>"
    "</body></html>\n";

// Campaign ids double as directory names.
bool ValidId(const std::string& id) {
  static const std::regex kId("[A-Za-z0-9][A-Za-z0-9_.-]{0,63}");
  return std::regex_match(id, kId);
}

bool ValidHash(const std::string& hash) {
  static const std::regex kHash("[0-9a-f]{16}");
  return std::regex_match(hash, kHash);
}

int HttpStatus(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kNotFound:
      return 404;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      return 400;
    case absl::StatusCode::kAlreadyExists:
      return 409;
    default:
      return 500;
  }
}

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, const absl::Status& status) {
  Reply(res, HttpStatus(status), {{"error", std::string(status.message())}});
}

absl::StatusOr<json> ParseBody(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty() && allow_empty) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    return absl::InvalidArgumentError("body must be a JSON object");
  }
  return body;
}

std::optional<std::string> ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int64_t NowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

json SummaryJson(const std::string& id, const CampaignStats& stats) {
  return {{"id", id},
          {"strategy", stats.strategy},
          {"status", std::string(campaign::StatusName(stats.status))},
          {"executions", stats.executions},
          {"buckets_found", stats.buckets_found},
          {"covered", stats.covered},
          {"start_ms", stats.start_ms},
          {"elapsed_seconds", stats.elapsed_seconds}};
}

json CoverageJson(const std::vector<campaign::CoveragePoint>& series) {
  json out = json::array();
  for (const campaign::CoveragePoint& p : series) {
    out.push_back({{"t", p.t}, {"covered", p.covered}});
  }
  return out;
}

}  // namespace

absl::StatusOr<std::pair<std::string, int>> ParseBindAddress(
    const std::string& address) {
  const size_t colon = address.rfind(':');
  int port = 0;
  if (colon == std::string::npos || colon == 0 ||
      !absl::SimpleAtoi(address.substr(colon + 1), &port) || port < 0 ||
      port > 65535) {
    return absl::InvalidArgumentError("bind address must be host:port");
  }
  return std::make_pair(address.substr(0, colon), port);
}

class Service::Impl {
 public:
  explicit Impl(ServiceOptions options) : options_(std::move(options)) {}

  void Register();
  absl::StatusOr<int> Bind(const std::string& host, int port) {
    int bound = port == 0 ? server_.bind_to_any_port(host)
                          : (server_.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      return absl::UnavailableError(
          absl::StrCat("cannot bind ", host, ":", port));
    }
    return bound;
  }
  void Serve() { server_.listen_after_bind(); }
  void Shutdown();

 private:
  struct Live {
    std::unique_ptr<Campaign> campaign;
    std::thread thread;
    std::shared_future<void> done;
  };

  fs::path Dir(const std::string& id) const {
    return fs::path(options_.root_dir) / id;
  }
  bool Exists(const std::string& id) const {
    return ValidId(id) && fs::exists(Dir(id) / "config.json");
  }
  std::shared_ptr<Live> FindLive(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = live_.find(id);
    return it == live_.end() ? nullptr : it->second;
  }

  absl::StatusOr<CampaignStats> Stats(const std::string& id);
  absl::StatusOr<CampaignConfig> Config(const std::string& id);
  absl::StatusOr<triage::CrashStore*> Store(const std::string& id);
  std::string NewId(const std::string& strategy);

  void ListCampaigns(httplib::Response& res);
  void StartCampaign(const httplib::Request& req, httplib::Response& res);
  void StopCampaign(const std::string& id, httplib::Response& res);
  void GetBucket(const std::string& id, const std::string& hash,
                 httplib::Response& res);
  void Triage(const httplib::Request& req, httplib::Response& res);
  void Minimize(const httplib::Request& req, httplib::Response& res);

  ServiceOptions options_;
  httplib::Server server_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Live>> live_;
  std::map<std::string, std::unique_ptr<triage::CrashStore>> stores_;
  bool shut_down_ = false;
  // Minimizations rewrite files of a bucket; one at a time.
  std::mutex minimize_mu_;
};

absl::StatusOr<CampaignStats> Service::Impl::Stats(const std::string& id) {
  if (std::shared_ptr<Live> live = FindLive(id))
    return live->campaign->Snapshot();
  if (!Exists(id)) return absl::NotFoundError("unknown campaign " + id);
  absl::StatusOr<CampaignStats> stats = campaign::LoadStats(Dir(id).string());
  if (!stats.ok()) {
    // Created but never flushed.
    absl::StatusOr<CampaignConfig> config = Config(id);
    if (!config.ok()) return config.status();
    CampaignStats empty;
    empty.strategy = std::string(campaign::StrategyName(config->strategy));
    empty.status = CampaignStatus::kStopped;
    return empty;
  }
  // No live campaign owns it, so a "running" status is left over from a
  // process that died.
  if (stats->status == CampaignStatus::kRunning) {
    stats->status = CampaignStatus::kStopped;
  }
  return stats;
}

absl::StatusOr<CampaignConfig> Service::Impl::Config(const std::string& id) {
  if (std::shared_ptr<Live> live = FindLive(id))
    return live->campaign->config();
  if (!Exists(id)) return absl::NotFoundError("unknown campaign " + id);
  std::optional<std::string> text = ReadFile(Dir(id) / "config.json");
  json j = json::parse(text.value_or(""), nullptr, false);
  if (j.is_discarded()) return absl::DataLossError("corrupt config.json");
  return campaign::ConfigFromJson(j);
}

absl::StatusOr<triage::CrashStore*> Service::Impl::Store(
    const std::string& id) {
  if (std::shared_ptr<Live> live = FindLive(id))
    return &live->campaign->crashes();
  if (!Exists(id)) return absl::NotFoundError("unknown campaign " + id);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = stores_.find(id);
  if (it != stores_.end()) return it->second.get();
  absl::StatusOr<std::unique_ptr<triage::CrashStore>> store =
      triage::CrashStore::Open((Dir(id) / "crashes").string());
  if (!store.ok()) return store.status();
  triage::CrashStore* raw = store->get();
  stores_.emplace(id, std::move(*store));
  return raw;
}

// Requires mu_.
std::string Service::Impl::NewId(const std::string& strategy) {
  for (int n = 1;; ++n) {
    std::string id = absl::StrCat(strategy, "-", n);
    if (!live_.count(id) && !fs::exists(Dir(id))) return id;
  }
}

void Service::Impl::ListCampaigns(httplib::Response& res) {
  std::vector<std::string> ids;
  std::error_code ec;
  for (const fs::directory_entry& entry :
       fs::directory_iterator(options_.root_dir, ec)) {
    std::string id = entry.path().filename().string();
    if (entry.is_directory() && Exists(id)) ids.push_back(std::move(id));
  }
  std::sort(ids.begin(), ids.end());
  json campaigns = json::array();
  for (const std::string& id : ids) {
    absl::StatusOr<CampaignStats> stats = Stats(id);
    if (stats.ok()) campaigns.push_back(SummaryJson(id, *stats));
  }
  Reply(res, 200, {{"campaigns", std::move(campaigns)}});
}

void Service::Impl::StartCampaign(const httplib::Request& req,
                                  httplib::Response& res) {
  absl::StatusOr<json> body = ParseBody(req, false);
  if (!body.ok()) return ReplyError(res, body.status());
  std::string id;
  if (body->contains("id")) {
    if (!(*body)["id"].is_string() ||
        !ValidId((*body)["id"].get<std::string>())) {
      return ReplyError(res, absl::InvalidArgumentError("invalid id"));
    }
    id = (*body)["id"].get<std::string>();
    body->erase("id");
  }
  absl::StatusOr<CampaignConfig> config = campaign::ConfigFromJson(*body);
  if (!config.ok()) return ReplyError(res, config.status());

  std::lock_guard<std::mutex> lock(mu_);
  if (shut_down_) {
    return ReplyError(res, absl::UnavailableError("service is shutting down"));
  }
  if (id.empty()) {
    id = NewId(std::string(campaign::StrategyName(config->strategy)));
  } else if (live_.count(id) || fs::exists(Dir(id))) {
    return ReplyError(res, absl::AlreadyExistsError("campaign exists: " + id));
  }
  config->output_dir = Dir(id).string();
  absl::StatusOr<std::unique_ptr<Campaign>> created =
      Campaign::Create(std::move(*config));
  if (!created.ok()) return ReplyError(res, created.status());

  auto live = std::make_shared<Live>();
  live->campaign = std::move(*created);
  auto finished = std::make_shared<std::promise<void>>();
  live->done = finished->get_future().share();
  Campaign* campaign = live->campaign.get();
  live->thread = std::thread([campaign, finished, id] {
    absl::StatusOr<CampaignStats> stats = campaign->Run();
    if (!stats.ok())
      LOG(WARNING) << "campaign " << id << ": " << stats.status();
    finished->set_value();
  });
  stores_.erase(id);
  live_.emplace(id, live);
  Reply(res, 201, {{"id", id}});
}

void Service::Impl::StopCampaign(const std::string& id,
                                 httplib::Response& res) {
  std::shared_ptr<Live> live = FindLive(id);
  if (!live) {
    if (!Exists(id))
      return ReplyError(res, absl::NotFoundError("unknown campaign " + id));
    return ReplyError(res, absl::AlreadyExistsError("campaign is not running"));
  }
  if (live->campaign->Snapshot().status != CampaignStatus::kRunning) {
    return ReplyError(res, absl::AlreadyExistsError("campaign is not running"));
  }
  live->campaign->RequestStop();
  // Returns once the in-flight runs have drained and the state is on disk.
  live->done.wait();
  Reply(res, 200, SummaryJson(id, live->campaign->Snapshot()));
}

void Service::Impl::GetBucket(const std::string& id, const std::string& hash,
                              httplib::Response& res) {
  absl::StatusOr<triage::CrashStore*> store = Store(id);
  if (!store.ok()) return ReplyError(res, store.status());
  std::optional<triage::CrashBucket> bucket;
  if (ValidHash(hash)) bucket = (*store)->Get(hash);
  if (!bucket)
    return ReplyError(res, absl::NotFoundError("unknown bucket " + hash));
  absl::StatusOr<triage::CrashReport> report = (*store)->LoadReport(hash);
  if (!report.ok()) return ReplyError(res, report.status());
  const fs::path dir = (*store)->BucketDir(hash);
  json body = triage::ReportToJson(*report);
  body["bucket"] = triage::BucketToJson(*bucket);
  body["input_base64"] = absl::Base64Escape(report->input);
  body["trace_text"] =
      ReadFile(dir / "trace.txt").value_or(report->stderr_text);
  body["minimized_base64"] = nullptr;
  body["minimize"] = nullptr;
  if (std::optional<std::string> minimized = ReadFile(dir / "minimized.bin")) {
    body["minimized_base64"] = absl::Base64Escape(*minimized);
    json meta = json::parse(ReadFile(dir / "minimize.json").value_or(""),
                            nullptr, false);
    if (!meta.is_discarded()) body["minimize"] = std::move(meta);
  }
  Reply(res, 200, body);
}

void Service::Impl::Triage(const httplib::Request& req,
                           httplib::Response& res) {
  const std::string& id = req.path_params.at("id");
  const std::string& hash = req.path_params.at("hash");
  absl::StatusOr<triage::CrashStore*> store = Store(id);
  if (!store.ok()) return ReplyError(res, store.status());
  if (!ValidHash(hash) || !(*store)->Get(hash)) {
    return ReplyError(res, absl::NotFoundError("unknown bucket " + hash));
  }
  absl::StatusOr<json> body = ParseBody(req, false);
  if (!body.ok()) return ReplyError(res, body.status());
  std::optional<triage::TriageState> state;
  if (body->contains("state") && (*body)["state"].is_string()) {
    state = triage::ParseTriageState((*body)["state"].get<std::string>());
  }
  if (!state)
    return ReplyError(res, absl::InvalidArgumentError("invalid triage state"));
  absl::StatusOr<triage::CrashBucket> bucket =
      (*store)->SetTriageState(hash, *state, NowMs());
  if (!bucket.ok()) return ReplyError(res, bucket.status());
  Reply(res, 200, triage::BucketToJson(*bucket));
}

void Service::Impl::Minimize(const httplib::Request& req,
                             httplib::Response& res) {
  const std::string& id = req.path_params.at("id");
  const std::string& hash = req.path_params.at("hash");
  absl::StatusOr<triage::CrashStore*> store = Store(id);
  if (!store.ok()) return ReplyError(res, store.status());
  if (!ValidHash(hash) || !(*store)->Get(hash)) {
    return ReplyError(res, absl::NotFoundError("unknown bucket " + hash));
  }
  absl::StatusOr<json> body = ParseBody(req, true);
  if (!body.ok()) return ReplyError(res, body.status());
  minimizer::MinimizeOptions options;
  if (body->contains("granularity")) {
    std::optional<minimizer::Granularity> g;
    if ((*body)["granularity"].is_string()) {
      g = minimizer::ParseGranularity(
          (*body)["granularity"].get<std::string>());
    }
    if (!g)
      return ReplyError(res, absl::InvalidArgumentError("invalid granularity"));
    options.granularity = *g;
  }
  if (body->contains("max_evaluations")) {
    if (!(*body)["max_evaluations"].is_number_unsigned()) {
      return ReplyError(res,
                        absl::InvalidArgumentError("invalid max_evaluations"));
    }
    options.max_evaluations = (*body)["max_evaluations"].get<size_t>();
  }
  absl::StatusOr<CampaignConfig> config = Config(id);
  if (!config.ok()) return ReplyError(res, config.status());
  std::optional<grammar::Grammar> grammar;
  if (!config->grammar_path.empty()) {
    absl::StatusOr<grammar::Grammar> loaded =
        grammar::LoadGrammarFile(config->grammar_path);
    if (loaded.ok()) grammar = std::move(*loaded);
  }
  options.grammar = grammar ? &*grammar : nullptr;

  std::lock_guard<std::mutex> lock(minimize_mu_);
  absl::StatusOr<minimizer::MinimizeResult> result = minimizer::MinimizeBucket(
      **store, hash, config->target, options, config->top_k);
  if (!result.ok()) return ReplyError(res, result.status());
  json out = minimizer::ResultToJson(*result, options.granularity);
  out["hash"] = hash;
  out["output_base64"] = absl::Base64Escape(result->output);
  Reply(res, 200, out);
}

void Service::Impl::Register() {
  server_.Get("/api/campaigns",
              [this](const httplib::Request&, httplib::Response& res) {
                ListCampaigns(res);
              });
  server_.Post("/api/campaigns",
               [this](const httplib::Request& req, httplib::Response& res) {
                 StartCampaign(req, res);
               });
  server_.Post("/api/campaigns/:id/stop",
               [this](const httplib::Request& req, httplib::Response& res) {
                 StopCampaign(req.path_params.at("id"), res);
               });
  server_.Get("/api/campaigns/:id", [this](const httplib::Request& req,
                                           httplib::Response& res) {
    absl::StatusOr<CampaignStats> stats = Stats(req.path_params.at("id"));
    if (!stats.ok()) return ReplyError(res, stats.status());
    json body = campaign::StatsToJson(*stats);
    body["id"] = req.path_params.at("id");
    Reply(res, 200, body);
  });
  server_.Get("/api/campaigns/:id/coverage", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    absl::StatusOr<CampaignStats> stats = Stats(req.path_params.at("id"));
    if (!stats.ok()) return ReplyError(res, stats.status());
    Reply(res, 200, CoverageJson(stats->coverage));
  });
  server_.Get("/api/campaigns/:id/buckets", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
    absl::StatusOr<triage::CrashStore*> store = Store(req.path_params.at("id"));
    if (!store.ok()) return ReplyError(res, store.status());
    json buckets = json::array();
    for (const triage::CrashBucket& b : (*store)->List()) {
      buckets.push_back(triage::BucketToJson(b));
    }
    Reply(res, 200, buckets);
  });
  server_.Get("/api/buckets/:id/:hash", [this](const httplib::Request& req,
                                               httplib::Response& res) {
    GetBucket(req.path_params.at("id"), req.path_params.at("hash"), res);
  });
  server_.Post("/api/buckets/:id/:hash/triage",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Triage(req, res);
               });
  server_.Post("/api/buckets/:id/:hash/minimize",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Minimize(req, res);
               });

  if (options_.assets_dir.empty()) {
    server_.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
  } else {
    server_.set_mount_point("/", options_.assets_dir);
  }
  server_.set_error_handler([](const httplib::Request&,
                               httplib::Response& res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    Reply(res, res.status,
          {{"error", res.status == 404 ? "not found"
                                       : httplib::status_message(res.status)}});
    return httplib::Server::HandlerResponse::Handled;
  });
  server_.set_exception_handler([](const httplib::Request&,
                                   httplib::Response& res,
                                   std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    Reply(res, 500, {{"error", what}});
  });
}

void Service::Impl::Shutdown() {
  std::map<std::string, std::shared_ptr<Live>> live;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (shut_down_) return;
    shut_down_ = true;
    live = live_;
  }
  // Campaigns stop with their state on disk.
  for (auto& [id, l] : live) l->campaign->RequestStop();
  for (auto& [id, l] : live) {
    if (l->thread.joinable()) l->thread.join();
  }
  server_.stop();
}

absl::StatusOr<std::unique_ptr<Service>> Service::Create(
    ServiceOptions options) {
  std::error_code ec;
  fs::create_directories(options.root_dir, ec);
  if (ec || !fs::is_directory(options.root_dir)) {
    return absl::InvalidArgumentError("cannot use root directory " +
                                      options.root_dir);
  }
  if (!options.assets_dir.empty() && !fs::is_directory(options.assets_dir)) {
    return absl::InvalidArgumentError("no assets directory " +
                                      options.assets_dir);
  }
  auto impl = std::make_unique<Impl>(std::move(options));
  impl->Register();
  return std::unique_ptr<Service>(new Service(std::move(impl)));
}

Service::Service(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Service::~Service() { impl_->Shutdown(); }

absl::StatusOr<int> Service::Bind(const std::string& host, int port) {
  return impl_->Bind(host, port);
}
void Service::Serve() { impl_->Serve(); }
void Service::Shutdown() { impl_->Shutdown(); }

}  // namespace verifuzz::service
