// Copyright 2026 The qnd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qnd/config.hpp"

namespace qnd {

/// What a subcommand produced and whether every declared tolerance held.
struct CommandOutcome {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;  // one line per violated tolerance
    std::vector<std::string> warnings;

    bool ok() const { return failures.empty(); }
};

/// [instrument] kind = gaussian | counting. Writes instrument_table.csv and the
/// exported instrument under instrument/.
CommandOutcome cmd_instrument_table(const RunConfig &cfg);

/// One trajectory file per path under paths/ plus manifest.csv.
CommandOutcome cmd_simulate(const RunConfig &cfg);

/// [shift] dilation report: shift_check.csv.
CommandOutcome cmd_shift_check(const RunConfig &cfg);

/// rho_compare.csv, output_hist.csv and output_law.csv.
CommandOutcome cmd_ensemble_stats(const RunConfig &cfg);

/// oracle_compare.csv (per-dt error) and convergence.csv.
CommandOutcome cmd_oracle_compare(const RunConfig &cfg);

/// Dispatch by subcommand name; throws ParseError for unknown names.
CommandOutcome run_command(const std::string &name, const RunConfig &cfg);

}  // namespace qnd
