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


// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (default: all)

#include "fasaris/errors.hpp"
#include "fasaris/harness.hpp"
#include "fasaris/localization.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace fasaris;
using namespace fasaris::testing;

namespace
{
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0)
    {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }

    double joint(double el, double az) { return std::hypot(el, az); }
    double ub_rmse(const SweepPoint &p) { return joint(p.rmse_ub_el, p.rmse_ub_az); }
    double ur_rmse(const SweepPoint &p) { return joint(p.rmse_ur_el, p.rmse_ur_az); }

    // Acceptance runs use the reference deployment with 200 trials per point
    ScenarioConfig acceptance_config()
    {
        ScenarioConfig c;
        c.trials = 200;
        c.seed = 20260101;
        c.passive_power_values_dbm = {15.0};
        return c;
    }

    // ---------------------------------------------------------------- 1

    Outcome noise_free_round_trip()
    {
        const auto t0 = Clock::now();
        const ScenarioConfig cfg = acceptance_config();
        EstimatorConfig ec;
        ec.bs_grid.step = pi / 180.0;
        ec.bs_grid.el_max = ec.bs_grid.az_max = ec.bs_grid.step * 180.0;
        ec.los_null = angles_between(cfg.ris, cfg.bs);

        double worst_angle = 0.0, worst_pos = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
        {
            const Frame f = make_frame(ref_scenario(), dbm_to_watt(cfg.power_dbm), 3.0, {}, seed);
            const EstimationReport r = estimate_channel(f.rx.y, f.pilots, f.phases, f.sc.fas, f.sc.aris,
                                                        f.ch.rb_at_ris.front(), f.sc.wavelength, ec);
            const AnglePair eub = angle_error(r.theta_ub, f.ch.ub_at_bs.front());
            const AnglePair eur = angle_error(r.theta_ur, f.ch.ur_at_ris.front());
            for (double e : {eub.el, eub.az, eur.el, eur.az})
                worst_angle = std::max(worst_angle, std::abs(e));
            const Position p = locate(r.theta_ub, r.theta_ur, cfg.bs, cfg.ris);
            worst_pos = std::max(worst_pos, (p - cfg.ue).norm());
        }
        const double t = seconds_since(t0) / 5.0;
        return {worst_angle <= 1e-6 && worst_pos <= 1e-4 && t <= 60.0,
                "max angle error " + num(worst_angle) + " rad, position error " + num(worst_pos) + " m, " + num(t) +
                    " s per run"};
    }

    // ---------------------------------------------------------------- 2

    Outcome decoupling_exactness()
    {
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed)
        {
            ChannelScenario sc = ref_scenario();
            if (seed % 2 == 0)
                sc.scatterers = {{{-5.5, 28.6, 2.0}}, {{-7.0, 8.0, 9.3}}, {{6.7, 28.0, 11.0}}};
            const Frame f = make_frame(sc, 1e-2, 4.0, {}, seed);
            const DecoupledSignals d = decouple(f.rx.y);
            worst = std::max(worst, (d.y_los - f.rx.h_los.leftCols(50)).norm() / f.rx.h_los.leftCols(50).norm());
            worst = std::max(worst, (d.y_nlos - f.rx.h_nlos.leftCols(50)).norm() / f.rx.h_nlos.leftCols(50).norm());
        }
        return {worst <= 1e-12, "max relative deviation " + num(worst)};
    }

    // ---------------------------------------------------------------- 3

    Outcome gradient_validation()
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ang(0.3, pi - 0.3), gain(-1e-3, 1e-3), pos(-40.0, 40.0);
        const Frame f = make_frame(ref_scenario(16, 3, 3), 1.0, 2.0, {}, 3, 8);
        const BoundModel m = make_bound_model(f.sc, f.pilots, f.phases, Eigen::VectorXd::Constant(16, 1.0));

        double worst_grad = 0.0, worst_jac = 0.0;
        for (int trial = 0; trial < 100; ++trial)
        {
            ChannelParams g;
            g << gain(rng), gain(rng), gain(rng), gain(rng), ang(rng), 2.0 * ang(rng) - pi, ang(rng), 2.0 * ang(rng) - pi;
            const int n = trial % 16, t = trial % 8;
            const auto grad = mean_signal_gradient(n, t, g, m);
            for (int i = 0; i < 8; ++i)
            {
                const double h = i < 4 ? 1e-6 * std::abs(gain(rng)) + 1e-10 : 1e-6;
                ChannelParams hi = g, lo = g;
                hi(i) += h;
                lo(i) -= h;
                const cdouble fd = (mean_signal(n, t, hi, m) - mean_signal(n, t, lo, m)) / (2.0 * h);
                worst_grad = std::max(worst_grad, std::abs(fd - grad(i)) / grad.norm());
            }

            const Position ue{pos(rng), pos(rng), pos(rng)};
            PositionParams gp;
            gp << 1.0, 1.0, 1.0, 1.0, ue;
            const Matrix87d j = jacobian(ue, ref_bs, ref_ris);
            for (int c = 0; c < 7; ++c)
            {
                PositionParams hi = gp, lo = gp;
                hi(c) += 1e-6;
                lo(c) -= 1e-6;
                ChannelParams d = to_channel_params(hi, ref_bs, ref_ris) - to_channel_params(lo, ref_bs, ref_ris);
                for (int r = 0; r < 8; ++r)
                    d(r) = (r == 5 || r == 7 ? wrap_angle(d(r)) : d(r)) / 2e-6;
                worst_jac = std::max(worst_jac, (d - j.col(c)).norm() / std::max(1e-12, j.col(c).norm()));
            }
        }
        return {worst_grad <= 1e-4 && worst_jac <= 1e-4,
                "max relative error: gradient " + num(worst_grad) + ", Jacobian " + num(worst_jac)};
    }

    // ---------------------------------------------------------------- 4

    Outcome localization_oracle()
    {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-30.0, 30.0);
        std::normal_distribution<double> jitter(0.0, 0.02);
        double worst = 0.0;
        int done = 0;
        while (done < 100)
        {
            const Position b{u(rng), u(rng), u(rng)}, r{u(rng), u(rng), u(rng)}, ue{u(rng), u(rng), u(rng)};
            AnglePair tb = angles_between(ue, b), tr = angles_between(ue, r);
            tb.el += jitter(rng);
            tb.az += jitter(rng);
            tr.el += jitter(rng);
            tr.az += jitter(rng);
            const Direction db = direction_vector(tb), dr = direction_vector(tr);
            if (std::abs(db.dot(dr)) > 0.85)
                continue; // near-parallel bearings are degenerate
            const auto f = [&](const Eigen::Vector3d &p) { return line_dist2(p, b, db) + line_dist2(p, r, dr); };
            Eigen::Vector3d oracle = pattern_search(f, 0.5 * (b + r));
            for (int k = 0; k < 10; ++k)
                oracle = pattern_search(f, oracle);
            worst = std::max(worst, (locate(tb, tr, b, r) - oracle).norm());
            ++done;
        }
        return {worst <= 1e-6, "max distance to brute-force minimizer " + num(worst) + " m"};
    }

    // ---------------------------------------------------------------- 5, 6

    // The power sweep feeds two criteria; it runs once, single-threaded, and is timed
    const SweepResult &power_sweep(double *elapsed = nullptr)
    {
        static double t = 0.0;
        static const SweepResult res = []
        {
            const auto t0 = Clock::now();
            ScenarioConfig cfg = acceptance_config();
            cfg.threads = 1;
            SweepResult r = run_sweep(cfg, SweepKind::power).front();
            t = seconds_since(t0);
            return r;
        }();
        if (elapsed)
            *elapsed = t;
        return res;
    }

    Outcome crb_tracking()
    {
        double t = 0.0;
        const SweepResult &res = power_sweep(&t);

        bool ok = t <= 900.0;
        double worst = 0.0;
        for (const auto &p : res.points)
            if (p.sweep_value >= -10.0)
            {
                const double r = std::max(p.rmse_ub_el / p.crb_ub_el, p.rmse_ub_az / p.crb_ub_az);
                worst = std::max(worst, r);
                ok = ok && p.trials > 0 && r <= 2.0;
            }
        return {ok, "max RMSE/CRB for theta_UB over P >= -10 dBm " + num(worst) + ", sweep " + num(t) + " s"};
    }

    Outcome estimation_gap()
    {
        const SweepResult &res = power_sweep();
        bool above = true;
        double min_ratio = 1e300, ur = 0.0, ub = 0.0;
        int count = 0;
        for (const auto &p : res.points)
        {
            const double r = std::min(p.rmse_ur_el / p.crb_ur_el, p.rmse_ur_az / p.crb_ur_az);
            min_ratio = std::min(min_ratio, r);
            above = above && p.trials > 0 && r > 1.0;
            if (p.sweep_value >= 0.0)
            {
                ur += ur_rmse(p) / joint(p.crb_ur_el, p.crb_ur_az);
                ub += ub_rmse(p) / joint(p.crb_ub_el, p.crb_ub_az);
                ++count;
            }
        }
        ur /= count;
        ub /= count;
        return {above && ur > ub, "min theta_UR RMSE/CRB " + num(min_ratio) + "; mean ratio over P >= 0 dBm: theta_UR " +
                                      num(ur) + " vs theta_UB " + num(ub)};
    }

    // ---------------------------------------------------------------- 7

    Outcome epsilon_shape()
    {
        const auto res = run_sweep(acceptance_config(), SweepKind::epsilon).front();
        size_t best = 0;
        std::ostringstream curve;
        for (size_t i = 0; i < res.points.size(); ++i)
        {
            curve << (i ? " " : "") << num(ur_rmse(res.points[i]));
            if (ur_rmse(res.points[i]) < ur_rmse(res.points[best]))
                best = i;
        }
        const double eps_best = res.points[best].sweep_value;
        const double degrade = ur_rmse(res.points.back()) / ur_rmse(res.points[best]);
        const bool interior = eps_best > 0.05 && eps_best < 1.0;
        return {interior && degrade >= 10.0 && res.points.back().sweep_value == 30.0,
                "argmin eps " + num(eps_best) + ", RMSE(30)/min " + num(degrade) + "; theta_UR RMSE [" + curve.str() +
                    "]"};
    }

    // ---------------------------------------------------------------- 8

    Outcome aperture_sweep()
    {
        const auto res = run_sweep(acceptance_config(), SweepKind::fas_steps).front();
        const std::pair<const char *, std::function<double(const SweepPoint &)>> metrics[] = {
            {"theta_UB", ub_rmse}, {"theta_UR", ur_rmse}, {"p_U", [](const SweepPoint &p) { return p.rmse_pos; }}};

        bool ok = res.points.front().sweep_value == 36.0 && res.points.back().sweep_value == 144.0;
        std::ostringstream detail;
        for (const auto &[name, metric] : metrics)
        {
            int inversions = 0;
            double worst = 0.0;
            detail << name << " [";
            for (size_t i = 0; i < res.points.size(); ++i)
            {
                detail << (i ? " " : "") << num(metric(res.points[i]));
                if (i == 0)
                    continue;
                const double rise = metric(res.points[i]) / metric(res.points[i - 1]) - 1.0;
                if (rise > 0.0)
                {
                    ++inversions;
                    worst = std::max(worst, rise);
                }
            }
            detail << "] inversions " << inversions << "; ";
            ok = ok && (inversions == 0 || (inversions == 1 && worst <= 0.10));
        }
        return {ok, detail.str()};
    }

    // ---------------------------------------------------------------- 9

    Outcome multipath_asymmetry()
    {
        const auto res = run_sweep(acceptance_config(), SweepKind::scatterers).front();
        const SweepPoint &clean = res.points.at(0);
        bool ok = true;
        double ub_worst = 1.0;
        for (size_t i = 1; i < res.points.size(); ++i)
        {
            const double r = ub_rmse(res.points[i]) / ub_rmse(clean);
            ub_worst = std::max(ub_worst, std::max(r, 1.0 / r));
            ok = ok && r <= 1.5 && r >= 1.0 / 1.5;
        }
        const double ur1 = ur_rmse(res.points.at(1)) / ur_rmse(clean);
        const double ur2 = ur_rmse(res.points.at(2)) / ur_rmse(clean);
        ok = ok && ur1 >= 5.0 && ur2 >= 5.0;
        return {ok, "theta_UB worst change " + num(ub_worst) + "x; theta_UR growth L_S1 " + num(ur1) + "x, L_S2 " +
                        num(ur2) + "x"};
    }

    // ---------------------------------------------------------------- 10

    Outcome active_vs_passive()
    {
        const auto res = run_sweep(acceptance_config(), SweepKind::passive_compare);
        const SweepPoint &aris = res.at(0).points.at(0), &passive = res.at(1).points.at(0);
        const double gain = passive.rmse_pos / aris.rmse_pos;
        return {aris.sweep_value == 15.0 && gain >= 10.0,
                "position RMSE passive " + num(passive.rmse_pos) + " m vs ARIS " + num(aris.rmse_pos) + " m (" +
                    num(gain) + "x)"};
    }

    // ---------------------------------------------------------------- 11

    Outcome property_suites()
    {
        std::ostringstream failures;
        auto expect = [&](bool cond, const char *what)
        {
            if (!cond)
                failures << what << "; ";
        };

        const ChannelScenario sc = ref_scenario();
        const CVec a = steering_fas(sc.fas, {1.2, 0.7}, sc.wavelength);
        expect((a.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14, "steering magnitude");
        const CVec r = steering_aris(sc.aris, {1.9, 2.5}, sc.wavelength);
        expect((r.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14, "ARIS steering magnitude");

        const Eigen::Matrix3d k = BearingProjection::from({0.9, -2.0}).k;
        expect((k * k - k).norm() < 1e-14, "projection idempotence");
        const CVec u = a.normalized();
        const CMat y = CMat::Random(100, 5);
        expect((project_out(project_out(y, u), u) - project_out(y, u)).norm() < 1e-12, "nulling idempotence");

        const Frame f = make_frame(sc, 1e-2, 3.0, {}, 11);
        const BoundModel m = make_bound_model(sc, f.pilots, f.phases, Eigen::VectorXd::Constant(100, 2.5e-13));
        const Matrix8d fim = fim_channel(channel_params(f.ch), m);
        Eigen::SelfAdjointEigenSolver<Matrix8d> es(fim);
        expect((fim - fim.transpose()).norm() == 0.0, "FIM symmetry");
        expect(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff(), "FIM PSD");

        BoundModel m10 = m;
        m10.x *= std::sqrt(10.0);
        const FimBundle b1 = evaluate_bounds(channel_params(f.ch), m, sc.ue, sc.bs, sc.ris);
        const FimBundle b10 = evaluate_bounds(channel_params(f.ch), m10, sc.ue, sc.bs, sc.ris);
        expect(((b1.crb / 10.0 - b10.crb).array().abs() <= 1e-9 * b1.crb.array()).all(), "CRB scales as 1/P");
        expect(std::abs(b10.peb * std::sqrt(10.0) / b1.peb - 1.0) < 1e-9, "PEB scales as 1/sqrt(P)");

        ScenarioConfig cfg = acceptance_config();
        cfg.trials = 2;
        cfg.power_values_dbm = {10.0};
        cfg.threads = 1;
        const auto s1 = run_sweep(cfg, SweepKind::power).front().points.front();
        cfg.threads = 2;
        const auto s2 = run_sweep(cfg, SweepKind::power).front().points.front();
        expect(s1 == s2, "determinism across thread counts");

        const std::string msg = failures.str();
        return {msg.empty(), msg.empty() ? "steering, projection, FIM, scaling and determinism checks hold"
                                         : "failed: " + msg};
    }
}

int main(int argc, char **argv)
{
    const std::pair<const char *, Outcome (*)()> criteria[] = {
        {"noise-free round trip", noise_free_round_trip},
        {"decoupling exactness", decoupling_exactness},
        {"gradient and Jacobian validation", gradient_validation},
        {"localization oracle", localization_oracle},
        {"CRB tracking of theta_UB", crb_tracking},
        {"theta_UR estimation gap", estimation_gap},
        {"epsilon sweep shape", epsilon_shape},
        {"aperture sweep monotonicity", aperture_sweep},
        {"multipath asymmetry", multipath_asymmetry},
        {"active vs passive", active_vs_passive},
        {"property suites", property_suites},
    };

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i)
        wanted.insert(std::atoi(argv[i]));

    int failed = 0;
    for (int i = 0; i < 11; ++i)
    {
        if (!wanted.empty() && !wanted.count(i + 1))
            continue;
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
