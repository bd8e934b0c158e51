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

// Command-line driver: qnd_cli <subcommand> --config <path> [--out <dir>] [--paths <n>] [--seed <u64>]
//
// Exit status: 0 when every declared tolerance held, 1 when one was violated or a
// path failed, 2 on invalid input.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qnd/commands.hpp"
#include "qnd/config.hpp"
#include "qnd/errors.hpp"
#include "qnd/kernels.hpp"

namespace {

struct Args {
    std::string config;
    std::string out;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Nondemolition measurement and quantum filtering simulator"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"instrument-table", "Tabulate an instrument's outcome law and export its reductions"},
        {"simulate", "Integrate seeded filtering trajectories and write one file per path"},
        {"shift-check", "Check the shift dilation: unitarity, nondemolition, characteristic function"},
        {"ensemble-stats", "Compare the weighted ensemble with the master equation and the output law"},
        {"oracle-compare", "Measure integrator error against the closed-form solutions"},
    };

    Args args;
    std::vector<CLI::App *> subs;
    std::vector<CLI::Option *> paths_opts, seed_opts, out_opts;
    for (const auto &[name, help] : commands) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
        out_opts.push_back(sub->add_option("--out", args.out, "Output directory (overrides [output] dir)"));
        paths_opts.push_back(
            sub->add_option("--paths", args.paths, "Number of paths (overrides [ensemble] n_paths)")->check(CLI::PositiveNumber));
        seed_opts.push_back(sub->add_option("--seed", args.seed, "Base seed (overrides [sde] seed)"));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::size_t chosen = 0;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (subs[i]->parsed()) {
            chosen = i;
        }
    }

    qnd::CliOverrides overrides;
    if (out_opts[chosen]->count() > 0) {
        overrides.out = args.out;
    }
    if (paths_opts[chosen]->count() > 0) {
        overrides.paths = args.paths;
    }
    if (seed_opts[chosen]->count() > 0) {
        overrides.seed = args.seed;
    }

    try {
        const qnd::RunConfig cfg = qnd::load_run_config(args.config, overrides);
        const qnd::CommandOutcome outcome = qnd::run_command(commands[chosen].first, cfg);
        for (const auto &w : outcome.warnings) {
            std::cerr << "warning: " << w << "\n";
        }
        for (const auto &f : outcome.failures) {
            std::cerr << "tolerance violated: " << f << "\n";
        }
        std::cout << commands[chosen].first << ": wrote " << outcome.files.size() << " output(s) to "
                  << cfg.out_dir.string() << " [config " << cfg.hash << ", kernels "
                  << qnd::kernels::isa_name(qnd::kernels::active_kernels().isa) << "]\n";
        return outcome.ok() ? 0 : 1;
    } catch (const qnd::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
