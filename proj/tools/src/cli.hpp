// Copyright 2026 The elicit Authors
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

#pragma once

// The `elicit` command-line surface, callable in-process for tests.

#include <iosfwd>
#include <string>
#include <vector>

namespace elicit::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitViolated = 1;
inline constexpr int kExitInputError = 2;

/// args excludes the program name. Human output goes to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elicit::cli
