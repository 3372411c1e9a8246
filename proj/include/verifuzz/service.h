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

#ifndef VERIFUZZ_SERVICE_H_
#define VERIFUZZ_SERVICE_H_

#include <memory>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace verifuzz::service {

struct ServiceOptions {
  // Holds one directory per campaign; the directory name is the id.
  std::string root_dir;
  // Static files served at `/`. When empty a placeholder page is served.
  std::string assets_dir;
};

// Splits "host:port". The port may be 0 to pick a free one.
absl::StatusOr<std::pair<std::string, int>> ParseBindAddress(
    const std::string& address);

// HTTP JSON API over the campaigns under a root directory. Campaigns
// started through the API run on threads owned by the service.
class Service {
 public:
  static absl::StatusOr<std::unique_ptr<Service>> Create(
      ServiceOptions options);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket and returns the bound port.
  absl::StatusOr<int> Bind(const std::string& host, int port);
  // Serves until Shutdown(). Requires a successful Bind().
  void Serve();
  // Stops running campaigns, waits for them to flush their state, and stops
  // the server. Idempotent.
  void Shutdown();

 private:
  class Impl;
  explicit Service(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace verifuzz::service

#endif  // VERIFUZZ_SERVICE_H_
