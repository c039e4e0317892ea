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


#include "fasaris/harness.hpp"
#include "fasaris/errors.hpp"
#include "fasaris/localization.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#ifndef FASARIS_VERSION
#define FASARIS_VERSION "unknown"
#endif

namespace fasaris
{
    const char *const csv_header = "sweep_value,rmse_θUB_el,rmse_θUB_az,crb_θUB_el,crb_θUB_az,"
                                   "rmse_θUR_el,rmse_θUR_az,crb_θUR_el,crb_θUR_az,rmse_pU,peb,trials,failures";

    namespace
    {
        constexpr const char *trial_header = "sweep_value,trial,failed,err_ub_el,err_ub_az,err_ur_el,err_ur_az,err_pos,"
                                             "crb_ub_el,crb_ub_az,crb_ur_el,crb_ur_az,peb,amplification,failure";

        // ------------------------------------------------------------------ config parsing

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        double to_double(const std::string &s)
        {
            const std::string t = trim(s);
            if (t.empty())
                throw ConfigError("expected a number, got an empty value");
            char *end = nullptr;
            const double v = std::strtod(t.c_str(), &end);
            if (end != t.c_str() + t.size() || !std::isfinite(v))
                throw ConfigError("'" + t + "' is not a finite number");
            return v;
        }

        long long to_integer(const std::string &s)
        {
            const std::string t = trim(s);
            char *end = nullptr;
            const long long v = std::strtoll(t.c_str(), &end, 10);
            if (t.empty() || end != t.c_str() + t.size())
                throw ConfigError("'" + t + "' is not an integer");
            return v;
        }

        bool to_bool(const std::string &s)
        {
            std::string t = trim(s);
            std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c)
                           { return static_cast<char>(std::tolower(c)); });
            if (t == "true" || t == "1" || t == "yes" || t == "on")
                return true;
            if (t == "false" || t == "0" || t == "no" || t == "off")
                return false;
            throw ConfigError("'" + t + "' is not a boolean");
        }

        std::vector<double> to_list(const std::string &s)
        {
            std::vector<double> out;
            if (trim(s).empty())
                return out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ','))
                out.push_back(to_double(item));
            return out;
        }

        std::vector<Position> to_positions(const std::string &s)
        {
            const std::vector<double> v = to_list(s);
            if (v.size() % 3 != 0)
                throw ConfigError("position lists need a multiple of 3 values, got " + std::to_string(v.size()));
            std::vector<Position> out;
            for (size_t i = 0; i < v.size(); i += 3)
                out.emplace_back(v[i], v[i + 1], v[i + 2]);
            return out;
        }

        Position to_position(const std::string &s)
        {
            const auto v = to_positions(s);
            if (v.size() != 1)
                throw ConfigError("expected exactly one x, y, z triple");
            return v.front();
        }

        void require(bool ok, const std::string &what)
        {
            if (!ok)
                throw ConfigError(what);
        }

        using Setter = std::function<void(ScenarioConfig &, const std::string &)>;

        const std::map<std::string, Setter> &setters()
        {
            static const std::map<std::string, Setter> table = {
                {"carrier_hz", [](ScenarioConfig &c, const std::string &v)
                 { c.carrier_hz = to_double(v); require(c.carrier_hz > 0.0, "carrier_hz must be positive"); }},
                {"p_b", [](ScenarioConfig &c, const std::string &v)
                 { c.bs = to_position(v); }},
                {"p_r", [](ScenarioConfig &c, const std::string &v)
                 { c.ris = to_position(v); }},
                {"p_u", [](ScenarioConfig &c, const std::string &v)
                 { c.ue = to_position(v); }},
                {"m_x", [](ScenarioConfig &c, const std::string &v)
                 { c.m_x = static_cast<int>(to_integer(v)); require(c.m_x >= 1, "m_x must be >= 1"); }},
                {"m_z", [](ScenarioConfig &c, const std::string &v)
                 { c.m_z = static_cast<int>(to_integer(v)); require(c.m_z >= 1, "m_z must be >= 1"); }},
                {"n_fas", [](ScenarioConfig &c, const std::string &v)
                 { c.n_fas = static_cast<int>(to_integer(v)); }},
                {"pilot_length", [](ScenarioConfig &c, const std::string &v)
                 {
                     c.pilot_length = static_cast<int>(to_integer(v));
                     require(c.pilot_length >= 2 && c.pilot_length % 2 == 0, "pilot_length must be even and >= 2");
                 }},
                {"epsilon", [](ScenarioConfig &c, const std::string &v)
                 { c.epsilon = to_double(v); require(c.epsilon > 0.0, "epsilon must be positive"); }},
                {"noise_figure_db", [](ScenarioConfig &c, const std::string &v)
                 { c.noise_figure_db = to_double(v); }},
                {"bandwidth_hz", [](ScenarioConfig &c, const std::string &v)
                 { c.bandwidth_hz = to_double(v); require(c.bandwidth_hz >= 0.0, "bandwidth_hz must be >= 0"); }},
                {"power_dbm", [](ScenarioConfig &c, const std::string &v)
                 { c.power_dbm = to_double(v); }},
                {"passive", [](ScenarioConfig &c, const std::string &v)
                 { c.passive = to_bool(v); }},
                {"ls1", [](ScenarioConfig &c, const std::string &v)
                 { c.ls1 = to_positions(v); }},
                {"ls2", [](ScenarioConfig &c, const std::string &v)
                 { c.ls2 = to_positions(v); }},
                {"ls3", [](ScenarioConfig &c, const std::string &v)
                 { c.ls3 = to_positions(v); }},
                {"scatterers_everywhere", [](ScenarioConfig &c, const std::string &v)
                 { c.scatterers_everywhere = to_bool(v); }},
                {"reflection_loss", [](ScenarioConfig &c, const std::string &v)
                 { c.reflection_loss = to_double(v); require(c.reflection_loss >= 0.0, "reflection_loss must be >= 0"); }},
                {"redraw_scatterer_phases", [](ScenarioConfig &c, const std::string &v)
                 { c.redraw_scatterer_phases = to_bool(v); }},
                {"power_values_dbm", [](ScenarioConfig &c, const std::string &v)
                 { c.power_values_dbm = to_list(v); }},
                {"epsilon_values", [](ScenarioConfig &c, const std::string &v)
                 {
                     c.epsilon_values = to_list(v);
                     for (double e : c.epsilon_values)
                         require(e > 0.0, "epsilon_values must be positive");
                 }},
                {"fas_values", [](ScenarioConfig &c, const std::string &v)
                 { c.fas_values = to_list(v); }},
                {"scatterer_configs", [](ScenarioConfig &c, const std::string &v)
                 {
                     c.scatterer_configs = to_list(v);
                     for (double s : c.scatterer_configs)
                         require(s == 0 || s == 1 || s == 2 || s == 3 || s == 4, "scatterer_configs entries must be 0..4");
                 }},
                {"scatterer_power_dbm", [](ScenarioConfig &c, const std::string &v)
                 { c.scatterer_power_dbm = to_double(v); }},
                {"passive_power_values_dbm", [](ScenarioConfig &c, const std::string &v)
                 { c.passive_power_values_dbm = to_list(v); }},
                {"grid_step_deg", [](ScenarioConfig &c, const std::string &v)
                 { c.grid_step_deg = to_double(v); require(c.grid_step_deg > 0.0, "grid_step_deg must be positive"); }},
                {"psi_step", [](ScenarioConfig &c, const std::string &v)
                 { c.psi_step = to_double(v); require(c.psi_step > 0.0, "psi_step must be positive"); }},
                {"los_sources", [](ScenarioConfig &c, const std::string &v)
                 { c.los_sources = static_cast<int>(to_integer(v)); require(c.los_sources >= 1, "los_sources must be >= 1"); }},
                {"scatterer_los_sources", [](ScenarioConfig &c, const std::string &v)
                 {
                     c.scatterer_los_sources = static_cast<int>(to_integer(v));
                     require(c.scatterer_los_sources >= 1, "scatterer_los_sources must be >= 1");
                 }},
                {"null_aris_direction", [](ScenarioConfig &c, const std::string &v)
                 { c.null_aris_direction = to_bool(v); }},
                {"nlos_sources", [](ScenarioConfig &c, const std::string &v)
                 { c.nlos_sources = static_cast<int>(to_integer(v)); require(c.nlos_sources >= 1, "nlos_sources must be >= 1"); }},
                {"ris_front_sign", [](ScenarioConfig &c, const std::string &v)
                 { c.ris_front_sign = to_double(v); require(c.ris_front_sign != 0.0, "ris_front_sign must be nonzero"); }},
                {"trials", [](ScenarioConfig &c, const std::string &v)
                 { c.trials = static_cast<int>(to_integer(v)); require(c.trials >= 1, "trials must be >= 1"); }},
                {"seed", [](ScenarioConfig &c, const std::string &v)
                 {
                     const std::string t = trim(v);
                     char *end = nullptr;
                     c.seed = std::strtoull(t.c_str(), &end, 10);
                     require(!t.empty() && t[0] != '-' && end == t.c_str() + t.size(), "seed must be an unsigned integer");
                 }},
                {"threads", [](ScenarioConfig &c, const std::string &v)
                 { c.threads = static_cast<int>(to_integer(v)); require(c.threads >= 0, "threads must be >= 0"); }},
            };
            return table;
        }

        bool perfect_square(int n)
        {
            const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
            return n >= 1 && s * s == n;
        }

        void validate(const ScenarioConfig &c)
        {
            require(perfect_square(c.n_fas), "n_fas must be a perfect square");
            const int most = std::max({c.los_sources, c.scatterer_los_sources, c.nlos_sources});
            require(c.n_fas > most, "source counts must be below n_fas");
            for (double n : c.fas_values)
                require(n == std::floor(n) && perfect_square(static_cast<int>(n)) && n > most,
                        "fas_values must be perfect squares above the source count");
            require((c.ue - c.bs).norm() > 0.0 && (c.ue - c.ris).norm() > 0.0 && (c.ris - c.bs).norm() > 0.0,
                    "p_u, p_b and p_r must be pairwise distinct");
            for (const auto *list : {&c.ls1, &c.ls2, &c.ls3})
                for (const Position &s : *list)
                    require((s - c.bs).norm() > 0.0 && (s - c.ris).norm() > 0.0 && (s - c.ue).norm() > 0.0,
                            "scatterers must not coincide with UE, BS or ARIS");
        }

        // ------------------------------------------------------------------ RNG streams

        enum class Stream : unsigned
        {
            paths = 1,
            scatter,
            pilots,
            aris_phases,
            aris_noise,
            bs_noise
        };

        std::mt19937_64 stream(std::uint64_t seed, std::uint32_t trial, Stream s)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), trial,
                              static_cast<std::uint32_t>(s)};
            return std::mt19937_64(seq);
        }

        // ------------------------------------------------------------------ formatting

        std::string fmt(double v)
        {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        std::vector<std::string> split(const std::string &line, char sep = ',')
        {
            std::vector<std::string> out;
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, sep))
                out.push_back(item);
            if (!line.empty() && line.back() == sep)
                out.emplace_back();
            return out;
        }

        double parse_field(const std::string &s)
        {
            const std::string t = trim(s);
            char *end = nullptr;
            const double v = std::strtod(t.c_str(), &end);
            if (t.empty() || end != t.c_str() + t.size())
                throw std::runtime_error("malformed CSV number '" + t + "'");
            return v;
        }

        std::ofstream open_out(const std::filesystem::path &file)
        {
            std::ofstream out(file, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot open " + file.string() + " for writing");
            return out;
        }

        std::ifstream open_in(const std::filesystem::path &file)
        {
            std::ifstream in(file, std::ios::binary);
            if (!in)
                throw std::runtime_error("cannot open " + file.string() + " for reading");
            return in;
        }

        nlohmann::ordered_json positions_json(const std::vector<Position> &ps)
        {
            auto arr = nlohmann::ordered_json::array();
            for (const auto &p : ps)
                arr.push_back({p.x(), p.y(), p.z()});
            return arr;
        }

        bool log_x(SweepKind k) { return k == SweepKind::epsilon; }

        std::string axis_label(SweepKind k)
        {
            switch (k)
            {
            case SweepKind::power:
            case SweepKind::passive_compare:
                return "P (dBm)";
            case SweepKind::epsilon:
                return "epsilon";
            case SweepKind::fas_steps:
                return "N";
            case SweepKind::scatterers:
                return "scatterer configuration (0 none, 1 LS1, 2 LS2, 3 LS3, 4 all)";
            }
            return "";
        }
    }

    // ---------------------------------------------------------------------- config

    SweepKind parse_sweep_kind(const std::string &name)
    {
        if (name == "power")
            return SweepKind::power;
        if (name == "epsilon")
            return SweepKind::epsilon;
        if (name == "fas-steps")
            return SweepKind::fas_steps;
        if (name == "scatterers")
            return SweepKind::scatterers;
        if (name == "passive-compare")
            return SweepKind::passive_compare;
        throw ConfigError("unknown sweep '" + name + "'");
    }

    std::string sweep_name(SweepKind kind)
    {
        switch (kind)
        {
        case SweepKind::power:
            return "power";
        case SweepKind::epsilon:
            return "epsilon";
        case SweepKind::fas_steps:
            return "fas-steps";
        case SweepKind::scatterers:
            return "scatterers";
        case SweepKind::passive_compare:
            return "passive-compare";
        }
        return "";
    }

    ScenarioConfig parse_config(std::istream &in, ScenarioConfig cfg)
    {
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw))
        {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            const std::string prefix = "line " + std::to_string(line_no) + ": ";
            if (eq == std::string::npos)
                throw ConfigError(prefix + "expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const auto it = setters().find(key);
            if (it == setters().end())
                throw ConfigError(prefix + "unknown key '" + key + "'");
            try
            {
                it->second(cfg, line.substr(eq + 1));
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(prefix + key + ": " + e.what());
            }
        }
        validate(cfg);
        return cfg;
    }

    ScenarioConfig load_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file " + path.string());
        try
        {
            return parse_config(in);
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    // ---------------------------------------------------------------------- trials

    std::vector<PointSetup> sweep_points(const ScenarioConfig &cfg, SweepKind kind, bool passive)
    {
        ScattererSet base;
        if (cfg.scatterers_everywhere)
            base = {cfg.ls1, cfg.ls2, cfg.ls3};

        auto make = [&](double value)
        {
            PointSetup p;
            p.sweep_value = value;
            p.power_dbm = cfg.power_dbm;
            p.epsilon = cfg.epsilon;
            p.n_fas = cfg.n_fas;
            p.los_sources = cfg.los_sources;
            p.passive = passive;
            p.scatterers = base;
            return p;
        };

        std::vector<PointSetup> out;
        switch (kind)
        {
        case SweepKind::power:
            for (double v : cfg.power_values_dbm)
            {
                out.push_back(make(v));
                out.back().power_dbm = v;
            }
            break;
        case SweepKind::passive_compare:
            for (double v : cfg.passive_power_values_dbm)
            {
                out.push_back(make(v));
                out.back().power_dbm = v;
            }
            break;
        case SweepKind::epsilon:
            for (double v : cfg.epsilon_values)
            {
                out.push_back(make(v));
                out.back().epsilon = v;
            }
            break;
        case SweepKind::fas_steps:
            for (double v : cfg.fas_values)
            {
                out.push_back(make(v));
                out.back().n_fas = static_cast<int>(v);
            }
            break;
        case SweepKind::scatterers:
            for (double v : cfg.scatterer_configs)
            {
                PointSetup p = make(v);
                p.power_dbm = cfg.scatterer_power_dbm;
                p.los_sources = cfg.scatterer_los_sources;
                const int c = static_cast<int>(v);
                p.scatterers = {};
                if (c == 1 || c == 4)
                    p.scatterers.ue_ris = cfg.ls1;
                if (c == 2 || c == 4)
                    p.scatterers.ris_bs = cfg.ls2;
                if (c == 3 || c == 4)
                    p.scatterers.ue_bs = cfg.ls3;
                out.push_back(p);
            }
            break;
        }
        return out;
    }

    TrialRecord run_trial(const ScenarioConfig &cfg, const PointSetup &point, int trial)
    {
        const auto t32 = static_cast<std::uint32_t>(trial);
        auto rng_paths = stream(cfg.seed, t32, Stream::paths);
        auto rng_scatter = stream(cfg.seed, cfg.redraw_scatterer_phases ? t32 : 0xffffffffu, Stream::scatter);
        auto rng_pilots = stream(cfg.seed, t32, Stream::pilots);
        auto rng_phases = stream(cfg.seed, t32, Stream::aris_phases);
        auto rng_aris_noise = stream(cfg.seed, t32, Stream::aris_noise);
        auto rng_bs_noise = stream(cfg.seed, t32, Stream::bs_noise);

        const double lambda = cfg.wavelength();
        ChannelScenario sc;
        sc.ue = cfg.ue;
        sc.bs = cfg.bs;
        sc.ris = cfg.ris;
        sc.aris = make_aris_geometry(cfg.ris, cfg.m_x, cfg.m_z, lambda);
        sc.fas = make_fas_geometry(cfg.bs, point.n_fas, lambda);
        sc.scatterers = point.scatterers;
        sc.wavelength = lambda;
        sc.reflection_loss = cfg.reflection_loss;

        const ChannelRealization ch = build_channels(sc, rng_paths, rng_scatter);

        const double p_u = dbm_to_watt(point.power_dbm);
        const double sigma2 = thermal_noise_power(cfg.noise_figure_db, cfg.bandwidth_hz);
        NoiseModel noise{sigma2, point.passive ? 0.0 : sigma2};
        const double amp = point.passive ? 1.0 : amplification_from_epsilon(point.epsilon, p_u, ch.h_ur, sigma2);

        const PilotSchedule pilots = make_pilots(cfg.pilot_length, p_u, rng_pilots);
        const PhaseSchedule phases = make_phase_schedule(sc.aris.size(), cfg.pilot_length, amp, rng_phases);
        const RxFrame frame = synthesize_rx(ch, pilots, phases, noise, rng_aris_noise, rng_bs_noise);

        TrialRecord rec;
        rec.sweep_value = point.sweep_value;
        rec.trial = trial;
        rec.amplification = amp;

        const BoundModel model = make_bound_model(sc, pilots, phases, per_position_noise(ch.h_rb, noise, amp));
        const FimBundle fb = evaluate_bounds(channel_params(ch), model, cfg.ue, cfg.bs, cfg.ris);
        rec.crb_ub_el = fb.crb(4);
        rec.crb_ub_az = fb.crb(5);
        rec.crb_ur_el = fb.crb(6);
        rec.crb_ur_az = fb.crb(7);
        rec.peb = fb.peb;

        EstimatorConfig ec;
        const double step = cfg.grid_step_deg * pi / 180.0;
        ec.bs_grid.step = step;
        ec.bs_grid.el_max = step * std::floor(pi / step + 1e-9);
        ec.bs_grid.az_max = ec.bs_grid.el_max;
        ec.los_sources = point.los_sources;
        if (cfg.null_aris_direction)
            ec.los_null = angles_between(cfg.ris, cfg.bs);
        ec.nlos_sources = cfg.nlos_sources;
        ec.psi_step = cfg.psi_step;
        ec.ris_front_sign = cfg.ris_front_sign;

        try
        {
            const EstimationReport r =
                estimate_channel(frame.y, pilots, phases, sc.fas, sc.aris, ch.rb_at_ris.front(), lambda, ec);
            const Position est = locate(r.theta_ub, r.theta_ur, cfg.bs, cfg.ris);
            rec.err_ub = angle_error(r.theta_ub, ch.ub_at_bs.front());
            rec.err_ur = angle_error(r.theta_ur, ch.ur_at_ris.front());
            rec.err_pos = (est - cfg.ue).norm();
        }
        catch (const EstimationError &e)
        {
            rec.failed = true;
            rec.failure = e.what();
        }
        return rec;
    }

    SweepPoint aggregate(double sweep_value, const std::vector<TrialRecord> &records)
    {
        SweepPoint p;
        p.sweep_value = sweep_value;
        double s_ub_el = 0, s_ub_az = 0, s_ur_el = 0, s_ur_az = 0, s_pos = 0;
        double c_ub_el = 0, c_ub_az = 0, c_ur_el = 0, c_ur_az = 0, c_peb = 0;
        for (const auto &r : records)
        {
            c_ub_el += r.crb_ub_el;
            c_ub_az += r.crb_ub_az;
            c_ur_el += r.crb_ur_el;
            c_ur_az += r.crb_ur_az;
            c_peb += r.peb * r.peb;
            if (r.failed)
            {
                ++p.failures;
                continue;
            }
            ++p.trials;
            s_ub_el += r.err_ub.el * r.err_ub.el;
            s_ub_az += r.err_ub.az * r.err_ub.az;
            s_ur_el += r.err_ur.el * r.err_ur.el;
            s_ur_az += r.err_ur.az * r.err_ur.az;
            s_pos += r.err_pos * r.err_pos;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const double k = p.trials, m = static_cast<double>(records.size());
        auto root = [&](double s, double cnt)
        { return cnt > 0 ? std::sqrt(s / cnt) : nan; };
        p.rmse_ub_el = root(s_ub_el, k);
        p.rmse_ub_az = root(s_ub_az, k);
        p.rmse_ur_el = root(s_ur_el, k);
        p.rmse_ur_az = root(s_ur_az, k);
        p.rmse_pos = root(s_pos, k);
        p.crb_ub_el = root(c_ub_el, m);
        p.crb_ub_az = root(c_ub_az, m);
        p.crb_ur_el = root(c_ur_el, m);
        p.crb_ur_az = root(c_ur_az, m);
        p.peb = root(c_peb, m);
        return p;
    }

    std::vector<SweepResult> run_sweep(const ScenarioConfig &cfg, SweepKind kind)
    {
        std::vector<std::pair<std::string, bool>> variants;
        if (kind == SweepKind::passive_compare)
            variants = {{"passive-compare_aris", false}, {"passive-compare_passive", true}};
        else
            variants = {{sweep_name(kind), cfg.passive}};

        struct Task
        {
            size_t variant, point;
            int trial;
        };
        std::vector<std::vector<PointSetup>> setups;
        std::vector<SweepResult> results;
        std::vector<Task> tasks;
        for (size_t v = 0; v < variants.size(); ++v)
        {
            setups.push_back(sweep_points(cfg, kind, variants[v].second));
            SweepResult r;
            r.name = variants[v].first;
            r.kind = kind;
            r.trials.assign(setups[v].size(), std::vector<TrialRecord>(cfg.trials));
            results.push_back(std::move(r));
            for (size_t p = 0; p < setups[v].size(); ++p)
                for (int t = 0; t < cfg.trials; ++t)
                    tasks.push_back({v, p, t});
        }

        std::atomic<size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]
        {
            for (size_t i = next++; i < tasks.size(); i = next++)
            {
                const Task &t = tasks[i];
                try
                {
                    results[t.variant].trials[t.point][t.trial] = run_trial(cfg, setups[t.variant][t.point], t.trial);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next = tasks.size();
                }
            }
        };

        int n_threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
        n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(std::max<size_t>(tasks.size(), 1))));
        if (n_threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int i = 0; i < n_threads; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (error)
            std::rethrow_exception(error);

        for (size_t v = 0; v < results.size(); ++v)
            for (size_t p = 0; p < setups[v].size(); ++p)
            {
                const auto &recs = results[v].trials[p];
                results[v].points.push_back(aggregate(setups[v][p].sweep_value, recs));
                double amp = 0.0;
                for (const auto &r : recs)
                    amp += r.amplification;
                results[v].mean_amplification.push_back(recs.empty() ? 1.0 : amp / recs.size());
            }
        return results;
    }

    // ---------------------------------------------------------------------- outputs

    void write_csv(const SweepResult &result, const std::filesystem::path &file)
    {
        auto out = open_out(file);
        out << csv_header << '\n';
        for (const auto &p : result.points)
        {
            out << fmt(p.sweep_value) << ',' << fmt(p.rmse_ub_el) << ',' << fmt(p.rmse_ub_az) << ',' << fmt(p.crb_ub_el)
                << ',' << fmt(p.crb_ub_az) << ',' << fmt(p.rmse_ur_el) << ',' << fmt(p.rmse_ur_az) << ','
                << fmt(p.crb_ur_el) << ',' << fmt(p.crb_ur_az) << ',' << fmt(p.rmse_pos) << ',' << fmt(p.peb) << ','
                << p.trials << ',' << p.failures << '\n';
        }
        if (!out)
            throw std::runtime_error("write failed for " + file.string());
    }

    std::vector<SweepPoint> read_csv(const std::filesystem::path &file)
    {
        auto in = open_in(file);
        std::string line;
        if (!std::getline(in, line) || line != csv_header)
            throw std::runtime_error(file.string() + ": missing or unexpected header");
        std::vector<SweepPoint> points;
        int line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            const auto f = split(line);
            if (f.size() != 13)
                throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": expected 13 fields");
            SweepPoint p;
            double *cols[] = {&p.sweep_value, &p.rmse_ub_el, &p.rmse_ub_az, &p.crb_ub_el, &p.crb_ub_az, &p.rmse_ur_el,
                              &p.rmse_ur_az, &p.crb_ur_el, &p.crb_ur_az, &p.rmse_pos, &p.peb};
            for (int i = 0; i < 11; ++i)
                *cols[i] = parse_field(f[i]);
            p.trials = static_cast<int>(parse_field(f[11]));
            p.failures = static_cast<int>(parse_field(f[12]));
            points.push_back(p);
        }
        return points;
    }

    void write_trial_log(const SweepResult &result, const std::filesystem::path &file)
    {
        auto out = open_out(file);
        out << trial_header << '\n';
        for (const auto &recs : result.trials)
            for (const auto &r : recs)
            {
                std::string reason = r.failure;
                std::replace(reason.begin(), reason.end(), ',', ';');
                std::replace(reason.begin(), reason.end(), '\n', ' ');
                out << fmt(r.sweep_value) << ',' << r.trial << ',' << (r.failed ? 1 : 0) << ',' << fmt(r.err_ub.el) << ','
                    << fmt(r.err_ub.az) << ',' << fmt(r.err_ur.el) << ',' << fmt(r.err_ur.az) << ',' << fmt(r.err_pos)
                    << ',' << fmt(r.crb_ub_el) << ',' << fmt(r.crb_ub_az) << ',' << fmt(r.crb_ur_el) << ','
                    << fmt(r.crb_ur_az) << ',' << fmt(r.peb) << ',' << fmt(r.amplification) << ',' << reason << '\n';
            }
        if (!out)
            throw std::runtime_error("write failed for " + file.string());
    }

    std::vector<TrialRecord> read_trial_log(const std::filesystem::path &file)
    {
        auto in = open_in(file);
        std::string line;
        if (!std::getline(in, line) || line != trial_header)
            throw std::runtime_error(file.string() + ": missing or unexpected header");
        std::vector<TrialRecord> out;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            const auto f = split(line);
            if (f.size() != 15)
                throw std::runtime_error(file.string() + ": expected 15 fields per trial row");
            TrialRecord r;
            r.sweep_value = parse_field(f[0]);
            r.trial = static_cast<int>(parse_field(f[1]));
            r.failed = parse_field(f[2]) != 0.0;
            r.err_ub = {parse_field(f[3]), parse_field(f[4])};
            r.err_ur = {parse_field(f[5]), parse_field(f[6])};
            r.err_pos = parse_field(f[7]);
            r.crb_ub_el = parse_field(f[8]);
            r.crb_ub_az = parse_field(f[9]);
            r.crb_ur_el = parse_field(f[10]);
            r.crb_ur_az = parse_field(f[11]);
            r.peb = parse_field(f[12]);
            r.amplification = parse_field(f[13]);
            r.failure = f[14];
            out.push_back(r);
        }
        return out;
    }

    std::string version() { return FASARIS_VERSION; }

    void emit_outputs(const std::vector<SweepResult> &results, const ScenarioConfig &cfg,
                      const std::filesystem::path &out_dir, bool log_trials)
    {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

        for (const auto &r : results)
        {
            write_csv(r, out_dir / (r.name + ".csv"));
            if (log_trials)
                write_trial_log(r, out_dir / (r.name + "_trials.csv"));
        }

        using nlohmann::ordered_json;
        ordered_json meta;
        meta["version"] = version();
        meta["seed"] = cfg.seed;
        meta["trials"] = cfg.trials;
        meta["sweep"] = results.empty() ? "" : sweep_name(results.front().kind);
        meta["config"] = {
            {"carrier_hz", cfg.carrier_hz},
            {"wavelength_m", cfg.wavelength()},
            {"p_b", {cfg.bs.x(), cfg.bs.y(), cfg.bs.z()}},
            {"p_r", {cfg.ris.x(), cfg.ris.y(), cfg.ris.z()}},
            {"p_u", {cfg.ue.x(), cfg.ue.y(), cfg.ue.z()}},
            {"m_x", cfg.m_x},
            {"m_z", cfg.m_z},
            {"n_fas", cfg.n_fas},
            {"pilot_length", cfg.pilot_length},
            {"epsilon", cfg.epsilon},
            {"noise_figure_db", cfg.noise_figure_db},
            {"bandwidth_hz", cfg.bandwidth_hz},
            {"noise_power_w", thermal_noise_power(cfg.noise_figure_db, cfg.bandwidth_hz)},
            {"power_dbm", cfg.power_dbm},
            {"passive", cfg.passive},
            {"ls1", positions_json(cfg.ls1)},
            {"ls2", positions_json(cfg.ls2)},
            {"ls3", positions_json(cfg.ls3)},
            {"scatterers_everywhere", cfg.scatterers_everywhere},
            {"reflection_loss", cfg.reflection_loss},
            {"redraw_scatterer_phases", cfg.redraw_scatterer_phases},
            {"power_values_dbm", cfg.power_values_dbm},
            {"epsilon_values", cfg.epsilon_values},
            {"fas_values", cfg.fas_values},
            {"scatterer_configs", cfg.scatterer_configs},
            {"scatterer_power_dbm", cfg.scatterer_power_dbm},
            {"passive_power_values_dbm", cfg.passive_power_values_dbm},
            {"grid_step_deg", cfg.grid_step_deg},
            {"psi_step", cfg.psi_step},
            {"los_sources", cfg.los_sources},
            {"scatterer_los_sources", cfg.scatterer_los_sources},
            {"null_aris_direction", cfg.null_aris_direction},
            {"nlos_sources", cfg.nlos_sources},
            {"ris_front_sign", cfg.ris_front_sign},
        };
        meta["amplification_model_id"] = amplification_model_id;
        meta["amplification_model"] = "p = max(1, sqrt(eps * P_U * M_R / sum_m (P_U |h_ur(m)|^2 + sigma_R^2)))";
        meta["rmse_definition"] = "per-component angle RMSE (rad, azimuth error wrapped to (-pi, pi]) and Euclidean "
                                  "position RMSE (m) over successful trials; failed trials are counted, not averaged";
        meta["crb_definition"] = "crb columns: sqrt of the trial-averaged CRB variance (rad); peb: sqrt of the "
                                 "trial-averaged PEB^2 (m)";
        meta["fim"] = "F = sum_n sum_t (2 / v_n) Re{dmu^H dmu}, v_n = sigma_B^2 + [C_R]_nn; F_p = J^T F J";
        meta["aris_noise_covariance"] = "C_R = sigma_R^2 p^2 H_RB H_RB^H held fixed (not differentiated)";
        meta["rng"] = "mt19937_64 per (seed, trial, stream); sweep points share random numbers";

        auto res = ordered_json::array();
        for (const auto &r : results)
        {
            ordered_json j;
            j["name"] = r.name;
            j["csv"] = r.name + ".csv";
            j["sweep_values"] = ordered_json::array();
            for (const auto &p : r.points)
                j["sweep_values"].push_back(p.sweep_value);
            j["mean_amplification"] = r.mean_amplification;
            res.push_back(j);
        }
        meta["results"] = res;

        {
            auto out = open_out(out_dir / "metadata.json");
            out << meta.dump(2) << '\n';
        }

        auto gp = open_out(out_dir / "plot.gp");
        gp << "# gnuplot script: RMSE versus the sweep axis with CRB/PEB overlays\n"
           << "set datafile separator ','\n"
           << "set terminal pngcairo size 1000,700\n"
           << "set logscale y\n"
           << "set grid\n"
           << "set key outside right\n";
        for (const auto &r : results)
        {
            const std::string csv = r.name + ".csv";
            gp << "\n# " << r.name << '\n';
            gp << (log_x(r.kind) ? "set logscale x\n" : "unset logscale x\n");
            gp << "set xlabel '" << axis_label(r.kind) << "'\n";
            gp << "set output '" << r.name << "_angles.png'\n"
               << "set ylabel 'RMSE (rad)'\n"
               << "plot '" << csv << "' skip 1 using 1:2 with linespoints title 'theta_UB el', \\\n"
               << "     '' skip 1 using 1:3 with linespoints title 'theta_UB az', \\\n"
               << "     '' skip 1 using 1:4 with lines dashtype 2 title 'CRB theta_UB el', \\\n"
               << "     '' skip 1 using 1:5 with lines dashtype 2 title 'CRB theta_UB az', \\\n"
               << "     '' skip 1 using 1:6 with linespoints title 'theta_UR el', \\\n"
               << "     '' skip 1 using 1:7 with linespoints title 'theta_UR az', \\\n"
               << "     '' skip 1 using 1:8 with lines dashtype 2 title 'CRB theta_UR el', \\\n"
               << "     '' skip 1 using 1:9 with lines dashtype 2 title 'CRB theta_UR az'\n";
            gp << "set output '" << r.name << "_position.png'\n"
               << "set ylabel 'RMSE (m)'\n"
               << "plot '" << csv << "' skip 1 using 1:10 with linespoints title 'p_U', \\\n"
               << "     '' skip 1 using 1:11 with lines dashtype 2 title 'PEB'\n";
        }
        if (!gp)
            throw std::runtime_error("write failed for " + (out_dir / "plot.gp").string());
    }
}
