// Copyright 2026 The capgen Authors.
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


#ifndef CAPGEN_TOOLS_COMMANDS_H_
#define CAPGEN_TOOLS_COMMANDS_H_

#include <string>
#include <vector>

namespace capgen::cli {

// Runs one subcommand. `args` excludes the program name. Errors are
// reported as a single "error: ..." line on stderr with a nonzero status.
int run(const std::vector<std::string>& args);

}  // namespace capgen::cli

#endif  // CAPGEN_TOOLS_COMMANDS_H_
