// SPDX-License-Identifier: Apache-2.0
//
// fasaris: FAS-ARIS assisted 3D localization simulator
// Copyright (C) 2026 The fasaris authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


// Command-line front end: fasaris simulate --config <file> --sweep <axis> ...

#include "fasaris/errors.hpp"
#include "fasaris/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>

int main(int argc, char **argv)
{
    CLI::App app{"FAS-ARIS localization Monte Carlo simulator"};
    app.set_version_flag("--version", fasaris::version());
    app.require_subcommand(1);

    std::string config_path, sweep, out_dir;
    int trials = 0;
    std::uint64_t seed = 0;
    int threads = -1;
    bool log_trials = false;

    auto *sim = app.add_subcommand("simulate", "run a seeded Monte Carlo sweep");
    sim->add_option("--config", config_path, "scenario config file (key = value)")->check(CLI::ExistingFile);
    sim->add_option("--sweep", sweep, "sweep axis")
        ->required()
        ->check(CLI::IsMember({"power", "epsilon", "fas-steps", "scatterers", "passive-compare"}));
    auto *trials_opt = sim->add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
    auto *seed_opt = sim->add_option("--seed", seed, "64-bit RNG seed");
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_flag("--log-trials", log_trials, "also write per-trial error logs");
    sim->add_option("--threads", threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try
    {
        fasaris::ScenarioConfig cfg = config_path.empty() ? fasaris::ScenarioConfig{} : fasaris::load_config(config_path);
        if (*trials_opt)
            cfg.trials = trials;
        if (*seed_opt)
            cfg.seed = seed;
        if (threads >= 0)
            cfg.threads = threads;

        const auto kind = fasaris::parse_sweep_kind(sweep);
        const auto start = std::chrono::steady_clock::now();
        const auto results = fasaris::run_sweep(cfg, kind);
        fasaris::emit_outputs(results, cfg, out_dir, log_trials);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        for (const auto &r : results)
        {
            int failures = 0;
            for (const auto &p : r.points)
                failures += p.failures;
            std::cerr << r.name << ": " << r.points.size() << " points x " << cfg.trials << " trials, " << failures
                      << " failed trials\n";
        }
        std::cerr << "wrote " << out_dir << " in " << secs << " s\n";
    }
    catch (const fasaris::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
