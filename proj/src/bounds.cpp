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


#include "fasaris/bounds.hpp"
#include "fasaris/errors.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace fasaris
{
    namespace
    {
        constexpr cdouble j1{0.0, 1.0};

        AnglePair ub_angles(const ChannelParams &g) { return {g(4), g(5)}; }
        AnglePair ur_angles(const ChannelParams &g) { return {g(6), g(7)}; }

        // Cascaded ARIS response for snapshot t and its derivatives w.r.t. el_UR / az_UR
        struct CascadeTerms
        {
            cdouble s, s_el, s_az;
        };

        CascadeTerms cascade_terms(int t, const ChannelParams &g, const BoundModel &m)
        {
            const double k0 = 2.0 * pi / m.wavelength;
            const AnglePair ur = ur_angles(g);
            const Direction k = direction_vector(ur) + m.k_ris_side;
            const Eigen::Vector3d de = direction_d_el(ur), da = direction_d_az(ur);
            CascadeTerms c{0.0, 0.0, 0.0};
            for (Eigen::Index i = 0; i < m.aris_offsets.cols(); ++i)
            {
                const auto r = m.aris_offsets.col(i);
                const cdouble e = std::polar(1.0, -k0 * r.dot(k)) * m.w(i, t);
                c.s += e;
                c.s_el += -j1 * k0 * r.dot(de) * e;
                c.s_az += -j1 * k0 * r.dot(da) * e;
            }
            return c;
        }

        void check_model(int n, int t, const BoundModel &m)
        {
            if (n < 0 || n >= m.fas_offsets.cols() || t < 0 || t >= m.x.size())
                throw DimensionError("bounds: (n, t) outside the frame");
        }

        // Neumaier compensated sum
        struct Accumulator
        {
            double sum = 0.0, comp = 0.0;
            void add(double v)
            {
                const double s = sum + v;
                if (std::abs(sum) >= std::abs(v))
                    comp += (sum - s) + v;
                else
                    comp += (v - s) + sum;
                sum = s;
            }
            double value() const { return sum + comp; }
        };
    }

    Eigen::VectorXd per_position_noise(const CMat &h_rb, const NoiseModel &noise, double amplification)
    {
        const double p2 = amplification * amplification;
        Eigen::VectorXd v(h_rb.rows());
        for (Eigen::Index n = 0; n < h_rb.rows(); ++n)
            v(n) = noise.sigma_b2 + noise.sigma_r2 * p2 * h_rb.row(n).squaredNorm();
        return v;
    }

    BoundModel make_bound_model(const ChannelScenario &sc, const PilotSchedule &pilots, const PhaseSchedule &phases,
                                const Eigen::VectorXd &noise_var)
    {
        BoundModel m;
        m.fas_offsets = sc.fas.offsets;
        m.aris_offsets = sc.aris.offsets;
        m.k_bs_side = direction_vector(angles_between(sc.ris, sc.bs));
        m.k_ris_side = direction_vector(angles_between(sc.bs, sc.ris));
        m.w = phases.w;
        m.x = pilots.x;
        m.wavelength = sc.wavelength;
        m.noise_var = noise_var;
        return m;
    }

    ChannelParams channel_params(const ChannelRealization &ch)
    {
        const PathGain rub = ch.gain_ub.at(0), rurb = ch.cascaded_gain();
        ChannelParams g;
        g << rub.real(), rub.imag(), rurb.real(), rurb.imag(), ch.ub_at_bs.at(0).el, ch.ub_at_bs.at(0).az,
            ch.ur_at_ris.at(0).el, ch.ur_at_ris.at(0).az;
        return g;
    }

    PositionParams position_params(const ChannelRealization &ch, const Position &ue)
    {
        const PathGain rub = ch.gain_ub.at(0), rurb = ch.cascaded_gain();
        PositionParams g;
        g << rub.real(), rub.imag(), rurb.real(), rurb.imag(), ue.x(), ue.y(), ue.z();
        return g;
    }

    ChannelParams to_channel_params(const PositionParams &gp, const Position &p_b, const Position &p_r)
    {
        const Position ue = gp.tail<3>();
        const AnglePair ub = angles_between(ue, p_b), ur = angles_between(ue, p_r);
        ChannelParams g;
        g << gp.head<4>(), ub.el, ub.az, ur.el, ur.az;
        return g;
    }

    cdouble mean_signal(int n, int t, const ChannelParams &g, const BoundModel &m)
    {
        check_model(n, t, m);
        const double k0 = 2.0 * pi / m.wavelength;
        const auto p = m.fas_offsets.col(n);
        const cdouble rho_ub{g(0), g(1)}, rho_urb{g(2), g(3)};
        const cdouble direct = rho_ub * std::polar(1.0, -k0 * p.dot(direction_vector(ub_angles(g))));
        const cdouble bs = std::polar(1.0, -k0 * p.dot(m.k_bs_side));
        const CascadeTerms c = cascade_terms(t, g, m);
        return (direct + rho_urb * bs * c.s) * m.x(t);
    }

    Eigen::Matrix<cdouble, 8, 1> mean_signal_gradient(int n, int t, const ChannelParams &g, const BoundModel &m)
    {
        check_model(n, t, m);
        const double k0 = 2.0 * pi / m.wavelength;
        const auto p = m.fas_offsets.col(n);
        const AnglePair ub = ub_angles(g);
        const cdouble rho_ub{g(0), g(1)}, rho_urb{g(2), g(3)};
        const cdouble x = m.x(t);
        const cdouble d = std::polar(1.0, -k0 * p.dot(direction_vector(ub))) * x;
        const cdouble b = std::polar(1.0, -k0 * p.dot(m.k_bs_side)) * x;
        const CascadeTerms c = cascade_terms(t, g, m);

        Eigen::Matrix<cdouble, 8, 1> grad;
        grad(0) = d;
        grad(1) = j1 * d;
        grad(2) = b * c.s;
        grad(3) = j1 * b * c.s;
        grad(4) = rho_ub * (-j1 * k0 * p.dot(direction_d_el(ub))) * d;
        grad(5) = rho_ub * (-j1 * k0 * p.dot(direction_d_az(ub))) * d;
        grad(6) = rho_urb * b * c.s_el;
        grad(7) = rho_urb * b * c.s_az;
        return grad;
    }

    Matrix8d fim_channel(const ChannelParams &g, const BoundModel &m)
    {
        const int n_pos = static_cast<int>(m.fas_offsets.cols());
        const int t_len = static_cast<int>(m.x.size());
        if (m.noise_var.size() != n_pos)
            throw DimensionError("fim_channel: one noise variance per FAS position required");
        if (m.w.cols() != t_len || m.w.rows() != m.aris_offsets.cols())
            throw DimensionError("fim_channel: phase schedule must be M_R x T");
        for (int n = 0; n < n_pos; ++n)
            if (!(m.noise_var(n) > 0.0))
                throw DomainError("fim_channel: noise covariance is singular");

        // The cascade sums depend on t only and the BS-side phases on n only
        std::vector<CascadeTerms> casc(t_len);
        for (int t = 0; t < t_len; ++t)
            casc[t] = cascade_terms(t, g, m);

        const double k0 = 2.0 * pi / m.wavelength;
        const AnglePair ub = ub_angles(g);
        const Direction kub = direction_vector(ub);
        const Eigen::Vector3d de = direction_d_el(ub), da = direction_d_az(ub);
        const cdouble rho_ub{g(0), g(1)}, rho_urb{g(2), g(3)};

        std::array<Accumulator, 36> acc{};
        Eigen::Matrix<cdouble, 8, 1> gr;
        for (int n = 0; n < n_pos; ++n)
        {
            const auto p = m.fas_offsets.col(n);
            const cdouble dn = std::polar(1.0, -k0 * p.dot(kub));
            const cdouble bn = std::polar(1.0, -k0 * p.dot(m.k_bs_side));
            const cdouble fel = rho_ub * (-j1 * k0 * p.dot(de)), faz = rho_ub * (-j1 * k0 * p.dot(da));
            const double scale = 2.0 / m.noise_var(n);
            for (int t = 0; t < t_len; ++t)
            {
                const cdouble x = m.x(t);
                const cdouble d = dn * x, b = bn * x;
                gr << d, j1 * d, b * casc[t].s, j1 * b * casc[t].s, fel * d, faz * d, rho_urb * b * casc[t].s_el,
                    rho_urb * b * casc[t].s_az;
                int k = 0;
                for (int i = 0; i < 8; ++i)
                    for (int jj = i; jj < 8; ++jj)
                        acc[k++].add(scale * (std::conj(gr(i)) * gr(jj)).real());
            }
        }

        Matrix8d f;
        int k = 0;
        for (int i = 0; i < 8; ++i)
            for (int jj = i; jj < 8; ++jj)
            {
                f(i, jj) = f(jj, i) = acc[k++].value();
            }
        return f;
    }

    Matrix87d jacobian(const Position &ue, const Position &p_b, const Position &p_r)
    {
        Matrix87d j = Matrix87d::Zero();
        j.topLeftCorner<4, 4>().setIdentity();

        auto fill = [&](int row, const Position &anchor)
        {
            const Eigen::Vector3d d = ue - anchor;
            const double rho2 = d.x() * d.x() + d.y() * d.y();
            const double rho = std::sqrt(rho2);
            const double r2 = d.squaredNorm();
            if (r2 == 0.0)
                throw DegenerateGeometryError("jacobian: UE coincides with an anchor");
            if (rho2 == 0.0)
                throw DegenerateGeometryError("jacobian: UE on the vertical through an anchor");
            // elevation row
            j(row, 4) = d.x() * d.z() / (rho * r2);
            j(row, 5) = d.y() * d.z() / (rho * r2);
            j(row, 6) = -rho / r2;
            // azimuth row
            j(row + 1, 4) = -d.y() / rho2;
            j(row + 1, 5) = d.x() / rho2;
        };
        fill(4, p_b);
        fill(6, p_r);
        return j;
    }

    bool invert_fim(const Eigen::MatrixXd &f, Eigen::MatrixXd &inv, double rcond)
    {
        const Eigen::Index n = f.rows();
        Eigen::VectorXd s(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (!(f(i, i) > 0.0) || !std::isfinite(f(i, i)))
                return false;
            s(i) = 1.0 / std::sqrt(f(i, i));
        }
        const Eigen::MatrixXd eq = s.asDiagonal() * f * s.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eq);
        if (es.info() != Eigen::Success)
            return false;
        const Eigen::VectorXd ev = es.eigenvalues();
        if (!(ev(0) > rcond * ev(n - 1)))
            return false;
        const Eigen::MatrixXd eq_inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
        inv = s.asDiagonal() * eq_inv * s.asDiagonal();
        return true;
    }

    double peb(const Matrix7d &f_p)
    {
        Eigen::MatrixXd inv;
        if (!invert_fim(f_p, inv))
            return std::numeric_limits<double>::infinity();
        const double tr = inv.bottomRightCorner<3, 3>().trace();
        return tr >= 0.0 ? std::sqrt(tr) : std::numeric_limits<double>::infinity();
    }

    FimBundle evaluate_bounds(const ChannelParams &g, const BoundModel &m, const Position &ue, const Position &p_b,
                              const Position &p_r)
    {
        FimBundle b;
        b.f = fim_channel(g, m);
        b.j = jacobian(ue, p_b, p_r);
        b.f_p = b.j.transpose() * b.f * b.j;
        b.f_p = 0.5 * (b.f_p + b.f_p.transpose()).eval();

        Eigen::MatrixXd inv;
        if (invert_fim(b.f, inv))
            b.crb = inv.diagonal();
        else
            b.crb.setConstant(std::numeric_limits<double>::infinity());
        b.peb = peb(b.f_p);
        return b;
    }
}
