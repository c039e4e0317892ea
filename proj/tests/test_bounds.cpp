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


#include "catch_amalgamated.hpp"
#include "fasaris/errors.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace fasaris;
using namespace fasaris::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    struct Setup
    {
        Frame f;
        BoundModel m;
        ChannelParams g;
    };

    Setup setup(int n_fas, int m_side, int t_len, double power_w, std::uint64_t seed, double noise = 1e-13)
    {
        Setup s;
        s.f = make_frame(ref_scenario(n_fas, m_side, m_side), power_w, 2.5, {}, seed, t_len);
        s.m = make_bound_model(s.f.sc, s.f.pilots, s.f.phases, Eigen::VectorXd::Constant(n_fas, noise));
        s.g = channel_params(s.f.ch);
        return s;
    }

    // FIM assembled from central differences of the mean, an oracle for the analytic gradient
    template <class Mean>
    Eigen::MatrixXd fd_fim(const Mean &mu, const Eigen::VectorXd &theta, const Eigen::VectorXd &steps, int n_pos,
                           int t_len, const Eigen::VectorXd &var)
    {
        const Eigen::Index p = theta.size();
        std::vector<CMat> d(p, CMat(n_pos, t_len));
        for (Eigen::Index i = 0; i < p; ++i)
        {
            Eigen::VectorXd hi = theta, lo = theta;
            hi(i) += steps(i);
            lo(i) -= steps(i);
            for (int n = 0; n < n_pos; ++n)
                for (int t = 0; t < t_len; ++t)
                    d[i](n, t) = (mu(hi, n, t) - mu(lo, n, t)) / (2.0 * steps(i));
        }
        Eigen::MatrixXd f(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
            {
                double acc = 0.0;
                for (int n = 0; n < n_pos; ++n)
                    acc += 2.0 / var(n) * (d[i].row(n).conjugate().cwiseProduct(d[j].row(n))).sum().real();
                f(i, j) = acc;
            }
        return f;
    }

    Eigen::VectorXd channel_steps(const ChannelParams &g)
    {
        Eigen::VectorXd h(8);
        const double a = 1e-6 * std::hypot(g(0), g(1)), b = 1e-6 * std::hypot(g(2), g(3));
        h << a, a, b, b, 1e-6, 1e-6, 1e-6, 1e-6;
        return h;
    }
}

TEST_CASE("per_position_noise - diagonal of the noise covariance")
{
    CMat h(2, 2);
    h << cdouble(1, 1), cdouble(0, 2), cdouble(3, 0), cdouble(0, 0);
    const Eigen::VectorXd v = per_position_noise(h, {0.5, 0.25}, 2.0);
    CHECK_THAT(v(0), WithinRel(0.5 + 0.25 * 4.0 * 6.0, 1e-15));
    CHECK_THAT(v(1), WithinRel(0.5 + 0.25 * 4.0 * 9.0, 1e-15));
}

TEST_CASE("mean_signal - matches the synthesized noiseless frame")
{
    const Setup s = setup(36, 4, 20, 1e-2, 3);
    double worst = 0.0;
    for (int n = 0; n < 36; ++n)
        for (int t = 0; t < 20; ++t)
        {
            const cdouble want = s.f.rx.y(n, t);
            worst = std::max(worst, std::abs(mean_signal(n, t, s.g, s.m) - want) / std::abs(want));
        }
    CHECK(worst < 1e-10);
    CHECK_THROWS_AS(mean_signal(36, 0, s.g, s.m), DimensionError);
}

TEST_CASE("mean_signal - direct path only")
{
    Setup s = setup(16, 2, 4, 1.0, 4);
    s.g(2) = s.g(3) = 0.0;
    const CVec a = steering_fas(s.f.sc.fas, {s.g(4), s.g(5)}, s.f.sc.wavelength);
    for (int n = 0; n < 16; ++n)
        for (int t = 0; t < 4; ++t)
        {
            const cdouble want = cdouble(s.g(0), s.g(1)) * a(n) * s.f.pilots.x(t);
            CHECK(std::abs(mean_signal(n, t, s.g, s.m) - want) <= 1e-14 * std::abs(want));
        }
}

TEST_CASE("mean_signal - conjugation symmetry")
{
    // Negating every offset and conjugating gains, phases and pilots conjugates the mean
    const Setup s = setup(16, 3, 6, 1.0, 5);
    BoundModel c = s.m;
    c.fas_offsets = -s.m.fas_offsets;
    c.aris_offsets = -s.m.aris_offsets;
    c.w = s.m.w.conjugate();
    c.x = s.m.x.conjugate();
    ChannelParams gc = s.g;
    gc(1) = -gc(1);
    gc(3) = -gc(3);
    for (int n = 0; n < 16; ++n)
        for (int t = 0; t < 6; ++t)
        {
            const cdouble mu = mean_signal(n, t, s.g, s.m);
            CHECK(std::abs(mean_signal(n, t, gc, c) - std::conj(mu)) <= 1e-13 * std::abs(mu));
        }
}

TEST_CASE("mean_signal_gradient - finite differences at random points")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.3, pi - 0.3), gain(-1e-3, 1e-3);
    const Setup s = setup(16, 3, 6, 1.0, 6);
    for (int trial = 0; trial < 100; ++trial)
    {
        ChannelParams g;
        g << gain(rng), gain(rng), gain(rng), gain(rng), u(rng), u(rng) * 2.0 - pi, u(rng), u(rng) * 2.0 - pi;
        const Eigen::VectorXd h = channel_steps(g);
        const int n = trial % 16, t = trial % 6;
        const auto grad = mean_signal_gradient(n, t, g, s.m);
        for (int i = 0; i < 8; ++i)
        {
            ChannelParams hi = g, lo = g;
            hi(i) += h(i);
            lo(i) -= h(i);
            const cdouble fd = (mean_signal(n, t, hi, s.m) - mean_signal(n, t, lo, s.m)) / (2.0 * h(i));
            CHECK(std::abs(fd - grad(i)) <= 1e-4 * grad.norm());
        }
    }
}

TEST_CASE("jacobian - finite differences at random UE positions")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        const Position ue{u(rng), u(rng), u(rng)};
        PositionParams gp;
        gp << 1.0, 2.0, 3.0, 4.0, ue;
        const Matrix87d j = jacobian(ue, ref_bs, ref_ris);
        for (int c = 0; c < 7; ++c)
        {
            PositionParams hi = gp, lo = gp;
            hi(c) += 1e-6;
            lo(c) -= 1e-6;
            ChannelParams fd = (to_channel_params(hi, ref_bs, ref_ris) - to_channel_params(lo, ref_bs, ref_ris)) / 2e-6;
            // azimuth rows are only continuous away from the branch cut
            for (int r : {5, 7})
                fd(r) = wrap_angle(fd(r) * 2e-6) / 2e-6;
            CHECK((fd - j.col(c)).norm() <= 1e-4 * std::max(1.0, j.col(c).norm()));
        }
    }
    CHECK_THROWS_AS(jacobian(ref_bs, ref_bs, ref_ris), DegenerateGeometryError);
}

TEST_CASE("fim_channel - agrees with a finite-difference oracle")
{
    const Setup s = setup(16, 3, 8, 1e-2, 7);
    const auto mu = [&](const Eigen::VectorXd &th, int n, int t) { return mean_signal(n, t, ChannelParams(th), s.m); };
    const Eigen::MatrixXd oracle = fd_fim(mu, s.g, channel_steps(s.g), 16, 8, s.m.noise_var);
    const Matrix8d f = fim_channel(s.g, s.m);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(std::abs(f(i, j) - oracle(i, j)) <= 1e-4 * std::sqrt(f(i, i) * f(j, j)));
}

TEST_CASE("fim_channel - structure")
{
    const double p = 1e-2, s2 = 2.5e-13;
    const Setup s = setup(36, 4, 20, p, 8, s2);
    const Matrix8d f = fim_channel(s.g, s.m);

    CHECK((f - f.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix8d> es(f);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());

    // Direct-gain block: 2 N T P / sigma^2
    CHECK_THAT(f(0, 0), WithinRel(2.0 * 36 * 20 * p / s2, 1e-12));
    CHECK_THAT(f(1, 1), WithinRel(2.0 * 36 * 20 * p / s2, 1e-12));

    // Linear in transmit power
    BoundModel m4 = s.m;
    m4.x *= 2.0;
    CHECK((fim_channel(s.g, m4) - 4.0 * f).norm() <= 1e-12 * f.norm());

    BoundModel bad = s.m;
    bad.noise_var(3) = 0.0;
    CHECK_THROWS_AS(fim_channel(s.g, bad), DomainError);
}

TEST_CASE("fim_channel - independent of the FAS position ordering")
{
    const Setup s = setup(36, 4, 20, 1e-2, 9);
    BoundModel m = s.m;
    for (int n = 0; n < 36; ++n)
        m.noise_var(n) = 1e-13 * (1.0 + 0.1 * n);
    std::vector<int> perm(36);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
    BoundModel q = m;
    for (int n = 0; n < 36; ++n)
    {
        q.fas_offsets.col(n) = m.fas_offsets.col(perm[n]);
        q.noise_var(n) = m.noise_var(perm[n]);
    }
    const Matrix8d a = fim_channel(s.g, m), b = fim_channel(s.g, q);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-12 * std::sqrt(a(i, i) * a(j, j)));
}

TEST_CASE("evaluate_bounds - chain rule against a position-domain oracle")
{
    const Setup s = setup(16, 3, 8, 1e-2, 10);
    const PositionParams gp = position_params(s.f.ch, ref_ue);
    const auto mu = [&](const Eigen::VectorXd &th, int n, int t)
    { return mean_signal(n, t, to_channel_params(PositionParams(th), ref_bs, ref_ris), s.m); };
    Eigen::VectorXd h(7);
    h << channel_steps(s.g).head<4>(), 1e-5, 1e-5, 1e-5;
    const Eigen::MatrixXd oracle = fd_fim(mu, gp, h, 16, 8, s.m.noise_var);

    const FimBundle b = evaluate_bounds(s.g, s.m, ref_ue, ref_bs, ref_ris);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            CHECK(std::abs(b.f_p(i, j) - oracle(i, j)) <= 1e-3 * std::sqrt(oracle(i, i) * oracle(j, j)));
}

TEST_CASE("evaluate_bounds - PEB scaling and singular cases")
{
    const Setup s = setup(100, 6, 100, dbm_to_watt(15.0), 11, 2.527e-13);
    const FimBundle b = evaluate_bounds(s.g, s.m, ref_ue, ref_bs, ref_ris);
    REQUIRE(std::isfinite(b.peb));
    CHECK(b.peb > 0.0);
    for (int i = 0; i < 8; ++i)
        CHECK(std::isfinite(b.crb(i)));

    BoundModel m4 = s.m;
    m4.x *= 2.0; // four times the power
    const FimBundle b4 = evaluate_bounds(s.g, m4, ref_ue, ref_bs, ref_ris);
    CHECK_THAT(b4.peb, WithinRel(0.5 * b.peb, 1e-9));
    for (int i = 0; i < 8; ++i)
        CHECK(b4.crb(i) < b.crb(i));

    ChannelParams no_ris = s.g;
    no_ris(2) = no_ris(3) = 0.0;
    const FimBundle z = evaluate_bounds(no_ris, s.m, ref_ue, ref_bs, ref_ris);
    CHECK(std::isinf(z.peb));
    CHECK(std::isinf(z.crb(6)));
}

TEST_CASE("invert_fim - rejects singular input")
{
    Eigen::MatrixXd inv;
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(3, 3);
    REQUIRE(invert_fim(f, inv));
    CHECK((inv - f).norm() < 1e-15);
    f(2, 2) = 0.0;
    CHECK_FALSE(invert_fim(f, inv));
    Eigen::MatrixXd r(2, 2);
    r << 1.0, 1.0, 1.0, 1.0;
    CHECK_FALSE(invert_fim(r, inv));
    CHECK(std::isinf(peb(Matrix7d::Zero())));
}
