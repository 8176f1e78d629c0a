// Copyright 2026 The LEAD Toolkit Authors.
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

// The `lead` command line: gen, pretrain, adapt, label, eval, bench.

#ifndef LEAD_CLI_HPP
#define LEAD_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "lead/errors.hpp"

namespace lead {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitNumerical = 4;

int exit_code_for(Errc code);

/// Runs one command line. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace lead

#endif  // LEAD_CLI_HPP
