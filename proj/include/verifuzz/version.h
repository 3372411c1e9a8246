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

#ifndef VERIFUZZ_VERSION_H_
#define VERIFUZZ_VERSION_H_

#include <string_view>

namespace verifuzz {

// Recorded in crash reports next to the target's own version.
inline constexpr std::string_view kFrameworkVersion = "verifuzz 1.0.0";

}  // namespace verifuzz

#endif  // VERIFUZZ_VERSION_H_
