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


#ifndef FASARIS_HARNESS_HPP
#define FASARIS_HARNESS_HPP

#include "fasaris/bounds.hpp"
#include "fasaris/estimation.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace fasaris
{
    enum class SweepKind
    {
        power,
        epsilon,
        fas_steps,
        scatterers,
        passive_compare
    };

    SweepKind parse_sweep_kind(const std::string &name);
    std::string sweep_name(SweepKind kind);

    // Scenario plus experiment settings. Defaults reproduce the reference deployment.
    struct ScenarioConfig
    {
        double carrier_hz = 2.8e9;
        Position bs{0.0, 0.0, 10.0};
        Position ris{-10.0, 23.3, 0.5};
        Position ue{3.5, 26.7, 0.7};
        int m_x = 6;
        int m_z = 6;
        int n_fas = 100;
        int pilot_length = 100;
        double epsilon = 0.8;
        double noise_figure_db = 18.0;
        double bandwidth_hz = 1e6;
        double power_dbm = 15.0; // transmit power for sweeps that do not vary it
        bool passive = false;

        // Scatterer placements; only used by the scatterers sweep unless scatterers_everywhere is set
        std::vector<Position> ls1{{-5.5, 28.6, 2.0}, {-2.0, 30.0, 3.0}};
        std::vector<Position> ls2{{-7.0, 8.0, 9.3}, {-6.0, 18.6, 2.7}};
        std::vector<Position> ls3{{6.7, 28.0, 11.0}, {8.0, 5.0, 2.0}};
        bool scatterers_everywhere = false;
        double reflection_loss = 1.0;
        bool redraw_scatterer_phases = true;

        std::vector<double> power_values_dbm{-20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30};
        std::vector<double> epsilon_values{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.8, 1, 2, 5, 10, 20, 30};
        std::vector<double> fas_values{36, 49, 64, 81, 100, 121, 144};
        std::vector<double> scatterer_configs{0, 1, 2, 3, 4}; // none, L_S1, L_S2, L_S3, all
        double scatterer_power_dbm = 30.0;
        std::vector<double> passive_power_values_dbm{15, 20, 25, 30, 35, 40};

        // Estimator
        double grid_step_deg = 1.0;
        double psi_step = 0.01;
        int los_sources = 1;
        int scatterer_los_sources = 3; // LoS-block paths fitted in the scatterers sweep (direct + two L_S3)
        int nlos_sources = 1;
        bool null_aris_direction = true; // project the known ARIS->BS direction out of the LoS block
        double ris_front_sign = 1.0;

        // Run
        int trials = 200;
        std::uint64_t seed = 1;
        int threads = 0; // 0: hardware concurrency

        double wavelength() const { return speed_of_light / carrier_hz; }
    };

    // Flat key = value text, '#' starts a comment, arrays are comma separated
    // (positions as consecutive triples). Unknown keys and malformed values throw
    // ConfigError with "line N:" prefixed.
    ScenarioConfig parse_config(std::istream &in, ScenarioConfig base = {});
    ScenarioConfig load_config(const std::filesystem::path &path);

    // Settings of a single sweep point
    struct PointSetup
    {
        double sweep_value = 0.0;
        double power_dbm = 0.0;
        double epsilon = 0.0;
        int n_fas = 0;
        int los_sources = 1;
        bool passive = false;
        ScattererSet scatterers;
    };

    std::vector<PointSetup> sweep_points(const ScenarioConfig &cfg, SweepKind kind, bool passive);

    struct TrialRecord
    {
        double sweep_value = 0.0;
        int trial = 0;
        bool failed = false;
        std::string failure;

        AnglePair err_ub;
        AnglePair err_ur;
        double err_pos = 0.0;

        // Per-trial bound variances (rad^2) and PEB (m)
        double crb_ub_el = 0.0, crb_ub_az = 0.0, crb_ur_el = 0.0, crb_ur_az = 0.0;
        double peb = 0.0;
        double amplification = 1.0;
    };

    // One seeded trial. RNG streams depend on (seed, trial, stream) only, so every sweep point
    // sees the same random numbers.
    TrialRecord run_trial(const ScenarioConfig &cfg, const PointSetup &point, int trial);

    // Per-component angle RMSE and Euclidean position RMSE over successful trials.
    // CRB columns are root mean CRB variance over all trials, PEB is root mean PEB^2.
    struct SweepPoint
    {
        double sweep_value = 0.0;
        double rmse_ub_el = 0.0, rmse_ub_az = 0.0, crb_ub_el = 0.0, crb_ub_az = 0.0;
        double rmse_ur_el = 0.0, rmse_ur_az = 0.0, crb_ur_el = 0.0, crb_ur_az = 0.0;
        double rmse_pos = 0.0, peb = 0.0;
        int trials = 0;   // successful
        int failures = 0; // infeasible cascade, collinear bearings, numerical failures

        bool operator==(const SweepPoint &) const = default;
    };

    struct SweepResult
    {
        std::string name; // CSV file stem
        SweepKind kind = SweepKind::power;
        std::vector<SweepPoint> points;
        std::vector<double> mean_amplification; // per point, written to metadata
        std::vector<std::vector<TrialRecord>> trials; // per point, in trial order
    };

    SweepPoint aggregate(double sweep_value, const std::vector<TrialRecord> &records);

    // Runs every (point, trial) pair on a thread pool; output does not depend on the thread count.
    std::vector<SweepResult> run_sweep(const ScenarioConfig &cfg, SweepKind kind);

    // CSV with the fixed header, one row per point, %.17g
    void write_csv(const SweepResult &result, const std::filesystem::path &file);
    std::vector<SweepPoint> read_csv(const std::filesystem::path &file);
    extern const char *const csv_header;

    void write_trial_log(const SweepResult &result, const std::filesystem::path &file);
    std::vector<TrialRecord> read_trial_log(const std::filesystem::path &file);

    // <name>.csv for every result, metadata.json, plot.gp, and <name>_trials.csv when log_trials is set
    void emit_outputs(const std::vector<SweepResult> &results, const ScenarioConfig &cfg, const std::filesystem::path &out_dir,
                      bool log_trials);

    std::string version();
}

#endif
