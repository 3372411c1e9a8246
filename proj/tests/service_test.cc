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
#include <string>
#include <thread>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"

namespace verifuzz::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ::testing::HasSubstr;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("verifuzz-service-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

// Runs a service on a free port for the lifetime of the fixture object.
class Running {
 public:
  explicit Running(ServiceOptions options) {
    absl::StatusOr<std::unique_ptr<Service>> service = Service::Create(options);
    EXPECT_TRUE(service.ok()) << service.status();
    service_ = std::move(*service);
    absl::StatusOr<int> port = service_->Bind("127.0.0.1", 0);
    EXPECT_TRUE(port.ok()) << port.status();
    port_ = *port;
    thread_ = std::thread([this] { service_->Serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60);
  }
  ~Running() { Stop(); }

  void Stop() {
    if (!service_) return;
    service_->Shutdown();
    thread_.join();
    service_.reset();
  }

  httplib::Client& client() { return *client_; }

  std::pair<int, json> Get(const std::string& path) {
    httplib::Result r = client_->Get(path);
    EXPECT_TRUE(r) << path;
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> Post(const std::string& path, const json& body) {
    httplib::Result r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r) << path;
    return {r->status, json::parse(r->body, nullptr, false)};
  }

 private:
  std::unique_ptr<Service> service_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json Config(double seconds) {
  return {{"strategy", "grammar"},
          {"grammar_path", VERIFUZZ_DATA_DIR "/mini_pvl.grammar"},
          {"target",
           {{"command", {TOY_VERIFIER_PATH, "--bugs", "all", "{input}"}}}},
          {"time_budget_seconds", seconds}};
}

TEST(ParseBindAddressTest, SplitsHostAndPort) {
  auto parsed = ParseBindAddress("127.0.0.1:8080");
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(parsed->first, "127.0.0.1");
  EXPECT_EQ(parsed->second, 8080);
  EXPECT_FALSE(ParseBindAddress("localhost").ok());
  EXPECT_FALSE(ParseBindAddress(":80").ok());
  EXPECT_FALSE(ParseBindAddress("h:99999").ok());
  EXPECT_FALSE(ParseBindAddress("h:x").ok());
}

TEST(ServiceTest, RejectsMissingAssetsDirectory) {
  TempDir root;
  EXPECT_FALSE(Service::Create({root.path().string(), "/no/such/dir"}).ok());
}

TEST(ServiceTest, EmptyRootListsNoCampaigns) {
  TempDir root;
  Running s({root.path().string(), ""});
  auto [status, body] = s.Get("/api/campaigns");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body, json({{"campaigns", json::array()}}));
}

TEST(ServiceTest, PlaceholderPageWithoutAssets) {
  TempDir root;
  Running s({root.path().string(), ""});
  httplib::Result r = s.client().Get("/");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_THAT(r->get_header_value("Content-Type"), HasSubstr("text/html"));
  EXPECT_THAT(r->body, HasSubstr("/api/campaigns"));
}

TEST(ServiceTest, ServesStaticAssets) {
  TempDir root;
  TempDir assets;
  std::ofstream(assets.path() / "index.html") << "<p>dash</p>";
  std::ofstream(assets.path() / "app.js") << "console.log(1);";
  Running s({root.path().string(), assets.path().string()});
  httplib::Result index = s.client().Get("/");
  ASSERT_TRUE(index);
  EXPECT_EQ(index->status, 200);
  EXPECT_EQ(index->body, "<p>dash</p>");
  httplib::Result js = s.client().Get("/app.js");
  ASSERT_TRUE(js);
  EXPECT_EQ(js->body, "console.log(1);");
  EXPECT_EQ(s.client().Get("/../etc/passwd")->status, 404);
  EXPECT_EQ(s.Get("/api/campaigns").first, 200);
}

TEST(ServiceTest, UnknownRoutesAnswerJson404) {
  TempDir root;
  Running s({root.path().string(), ""});
  auto [status, body] = s.Get("/api/nothing");
  EXPECT_EQ(status, 404);
  EXPECT_TRUE(body.contains("error"));
  EXPECT_EQ(s.Get("/api/campaigns/..").first, 404);
}

TEST(ServiceTest, CoverageIsNonDecreasingWhileRunning) {
  TempDir root;
  Running s({root.path().string(), ""});
  auto [status, started] = s.Post("/api/campaigns", Config(3));
  ASSERT_EQ(status, 201);
  const std::string id = started["id"];
  EXPECT_EQ(id, "grammar-1");
  uint64_t last = 0;
  for (int poll = 0; poll < 4; ++poll) {
    auto [code, series] = s.Get("/api/campaigns/" + id + "/coverage");
    ASSERT_EQ(code, 200);
    uint64_t previous = 0;
    for (const json& point : series) {
      EXPECT_GE(point["covered"].get<uint64_t>(), previous);
      previous = point["covered"];
    }
    EXPECT_GE(previous, last);
    last = previous;
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
  }
  EXPECT_GT(last, 0u);
  auto [code, stats] = s.Get("/api/campaigns/" + id);
  EXPECT_EQ(code, 200);
  EXPECT_EQ(stats["id"], id);
  EXPECT_GE(stats["covered"].get<uint64_t>(), last);
}

TEST(ServiceTest, StopThenConflict) {
  TempDir root;
  Running s({root.path().string(), ""});
  json config = Config(120);
  config["id"] = "long";
  ASSERT_EQ(s.Post("/api/campaigns", config).first, 201);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  auto [status, stopped] = s.Post("/api/campaigns/long/stop", json::object());
  EXPECT_EQ(status, 200);
  EXPECT_EQ(stopped["status"], "stopped");
  EXPECT_EQ(s.Post("/api/campaigns/long/stop", json::object()).first, 409);
  EXPECT_EQ(s.Post("/api/campaigns/none/stop", json::object()).first, 404);
}

TEST(ServiceTest, RejectsBadConfigsAndIds) {
  TempDir root;
  Running s({root.path().string(), ""});
  json bad_strategy = Config(1);
  bad_strategy["strategy"] = "random";
  EXPECT_EQ(s.Post("/api/campaigns", bad_strategy).first, 400);
  json bad_id = Config(1);
  bad_id["id"] = "../escape";
  EXPECT_EQ(s.Post("/api/campaigns", bad_id).first, 400);
  json no_input = Config(1);
  no_input["target"]["command"] = {TOY_VERIFIER_PATH};
  EXPECT_EQ(s.Post("/api/campaigns", no_input).first, 400);
  httplib::Result r =
      s.client().Post("/api/campaigns", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_FALSE(fs::exists(root.path() / ".." / "escape"));
}

TEST(ServiceTest, ShutdownStopsCampaignsWithStateOnDisk) {
  TempDir root;
  {
    Running s({root.path().string(), ""});
    json config = Config(120);
    config["id"] = "kept";
    ASSERT_EQ(s.Post("/api/campaigns", config).first, 201);
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    s.Stop();
  }
  std::ifstream in(root.path() / "kept" / "stats.json");
  json stats = json::parse(in);
  EXPECT_EQ(stats["status"], "stopped");
  EXPECT_GT(stats["executions"].get<uint64_t>(), 0u);

  Running s({root.path().string(), ""});
  auto [status, list] = s.Get("/api/campaigns");
  ASSERT_EQ(list["campaigns"].size(), 1u);
  EXPECT_EQ(list["campaigns"][0]["id"], "kept");
  EXPECT_EQ(list["campaigns"][0]["status"], "stopped");
  EXPECT_EQ(s.Post("/api/campaigns/kept/stop", json::object()).first, 409);
  // The next generated id skips the existing directory.
  json config = Config(0.2);
  config["strategy"] = "blind";
  auto [code, started] = s.Post("/api/campaigns", config);
  EXPECT_EQ(code, 201);
  EXPECT_EQ(started["id"], "blind-1");
}

TEST(ServiceTest, StaleRunningStatusReportsStopped) {
  TempDir root;
  fs::create_directories(root.path() / "dead");
  std::ofstream(root.path() / "dead" / "config.json") << Config(5).dump();
  json stats = {
      {"strategy", "grammar"}, {"executions", 10}, {"status", "running"}};
  std::ofstream(root.path() / "dead" / "stats.json") << stats.dump();
  fs::create_directories(root.path() / "not-a-campaign");
  Running s({root.path().string(), ""});
  auto [status, list] = s.Get("/api/campaigns");
  ASSERT_EQ(list["campaigns"].size(), 1u);
  EXPECT_EQ(list["campaigns"][0]["status"], "stopped");
  EXPECT_EQ(list["campaigns"][0]["executions"], 10);
}

TEST(ServiceTest, TriageIsIdempotentAndValidated) {
  TempDir root;
  Running s({root.path().string(), ""});
  json config = Config(30);
  config["id"] = "t";
  config["max_buckets"] = 1;
  ASSERT_EQ(s.Post("/api/campaigns", config).first, 201);
  json buckets;
  for (int i = 0; i < 200 && buckets.empty(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    buckets = s.Get("/api/campaigns/t/buckets").second;
  }
  ASSERT_FALSE(buckets.empty());
  const std::string hash = buckets[0]["hash"];
  for (int i = 0; i < 2; ++i) {
    auto [status, bucket] =
        s.Post("/api/buckets/t/" + hash + "/triage", {{"state", "confirmed"}});
    EXPECT_EQ(status, 200);
    EXPECT_EQ(bucket["triage_state"], "confirmed");
  }
  EXPECT_EQ(s.Post("/api/buckets/t/" + hash + "/triage", {{"state", 3}}).first,
            400);
  EXPECT_EQ(s.Get("/api/campaigns/t/buckets").second[0]["triage_state"],
            "confirmed");
  auto [status, detail] = s.Get("/api/buckets/t/" + hash);
  EXPECT_EQ(status, 200);
  EXPECT_FALSE(detail["input_base64"].get<std::string>().empty());
  EXPECT_THAT(detail["trace_text"].get<std::string>(), HasSubstr("Exception"));
  EXPECT_EQ(s.Get("/api/buckets/t/NOTAHASH").first, 404);
}

}  // namespace
}  // namespace verifuzz::service
