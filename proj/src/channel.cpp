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

#include "fasaris/channel.hpp"
#include "fasaris/errors.hpp"

#include <cmath>
#include <string>

namespace fasaris
{
    ArisGeometry make_aris_geometry(const Position &center, int m_x, int m_z, double wavelength)
    {
        if (m_x < 1 || m_z < 1)
            throw DomainError("make_aris_geometry: element counts must be positive");
        if (!(wavelength > 0.0))
            throw DomainError("make_aris_geometry: wavelength must be positive");

        ArisGeometry g;
        g.center = center;
        g.m_x = m_x;
        g.m_z = m_z;
        g.spacing = 0.5 * wavelength;
        g.offsets.resize(3, m_x * m_z);
        for (int iz = 0; iz < m_z; ++iz)
            for (int iy = 0; iy < m_x; ++iy)
                g.offsets.col(iy + m_x * iz) << 0.0,
                    (iy - 0.5 * (m_x - 1)) * g.spacing,
                    (iz - 0.5 * (m_z - 1)) * g.spacing;
        return g;
    }

    FasGeometry make_fas_geometry(const Position &center, int n_positions, double wavelength, double step)
    {
        if (!(wavelength > 0.0))
            throw DomainError("make_fas_geometry: wavelength must be positive");
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_positions))));
        if (n_positions < 1 || side * side != n_positions)
            throw DomainError("make_fas_geometry: N = " + std::to_string(n_positions) + " is not a perfect square");

        FasGeometry g;
        g.center = center;
        g.side = side;
        g.step = step > 0.0 ? step : 0.5 * wavelength;
        g.aperture = (side - 1) * g.step / wavelength;
        g.offsets.resize(3, n_positions);
        for (int iz = 0; iz < side; ++iz)
            for (int ix = 0; ix < side; ++ix)
                g.offsets.col(ix + side * iz) << (ix - 0.5 * (side - 1)) * g.step,
                    0.0,
                    (iz - 0.5 * (side - 1)) * g.step;
        return g;
    }

    CVec steering(const Eigen::Matrix3Xd &offsets, const Eigen::Vector3d &k, double wavelength)
    {
        const double wavenumber = 2.0 * pi / wavelength;
        CVec a(offsets.cols());
        for (Eigen::Index i = 0; i < offsets.cols(); ++i)
            a(i) = std::polar(1.0, -wavenumber * offsets.col(i).dot(k));
        return a;
    }

    CVec steering_aris(const ArisGeometry &geom, const AnglePair &angles, double wavelength)
    {
        return steering(geom.offsets, direction_vector(angles), wavelength);
    }

    CVec steering_fas(const FasGeometry &geom, const AnglePair &angles, double wavelength)
    {
        return steering(geom.offsets, direction_vector(angles), wavelength);
    }

    PathGain free_space_gain(double distance, double wavelength, double phase)
    {
        if (!(distance > 0.0) || !std::isfinite(distance))
            throw DomainError("free_space_gain: distance must be positive");
        return std::polar(wavelength / (4.0 * pi * distance), phase);
    }

    namespace
    {
        double draw_phase(std::mt19937_64 &rng)
        {
            return std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
        }

        PathGain two_hop_gain(const Position &a, const Position &s, const Position &b, double wavelength,
                              double loss, std::mt19937_64 &rng)
        {
            const double phase = draw_phase(rng);
            const double mag = std::abs(free_space_gain((s - a).norm(), wavelength, 0.0)) *
                               std::abs(free_space_gain((b - s).norm(), wavelength, 0.0));
            return std::polar(loss * mag, phase);
        }
    }

    ChannelRealization build_channels(const ChannelScenario &sc, std::mt19937_64 &rng, std::mt19937_64 &scatter_rng)
    {
        const double lambda = sc.wavelength;
        if (!(lambda > 0.0))
            throw DomainError("build_channels: wavelength must be positive");

        ChannelRealization ch;

        // Direct paths, phases drawn in the fixed order UR, UB, RB
        ch.ur_at_ris.push_back(angles_between(sc.ue, sc.ris));
        ch.gain_ur.push_back(free_space_gain((sc.ue - sc.ris).norm(), lambda, draw_phase(rng)));
        ch.ub_at_bs.push_back(angles_between(sc.ue, sc.bs));
        ch.gain_ub.push_back(free_space_gain((sc.ue - sc.bs).norm(), lambda, draw_phase(rng)));
        ch.rb_at_bs.push_back(angles_between(sc.ris, sc.bs));
        ch.rb_at_ris.push_back(angles_between(sc.bs, sc.ris));
        ch.gain_rb.push_back(free_space_gain((sc.ris - sc.bs).norm(), lambda, draw_phase(rng)));

        for (const auto &s : sc.scatterers.ue_ris)
        {
            ch.ur_at_ris.push_back(angles_between(s, sc.ris));
            ch.gain_ur.push_back(two_hop_gain(sc.ue, s, sc.ris, lambda, sc.reflection_loss, scatter_rng));
        }
        for (const auto &s : sc.scatterers.ue_bs)
        {
            ch.ub_at_bs.push_back(angles_between(s, sc.bs));
            ch.gain_ub.push_back(two_hop_gain(sc.ue, s, sc.bs, lambda, sc.reflection_loss, scatter_rng));
        }
        for (const auto &s : sc.scatterers.ris_bs)
        {
            ch.rb_at_bs.push_back(angles_between(s, sc.bs));
            ch.rb_at_ris.push_back(angles_between(s, sc.ris));
            ch.gain_rb.push_back(two_hop_gain(sc.ris, s, sc.bs, lambda, sc.reflection_loss, scatter_rng));
        }

        const int m_r = sc.aris.size();
        const int n = sc.fas.size();

        ch.h_ur = CVec::Zero(m_r);
        for (size_t i = 0; i < ch.gain_ur.size(); ++i)
            ch.h_ur += ch.gain_ur[i] * steering_aris(sc.aris, ch.ur_at_ris[i], lambda);

        ch.h_ub = CVec::Zero(n);
        for (size_t i = 0; i < ch.gain_ub.size(); ++i)
            ch.h_ub += ch.gain_ub[i] * steering_fas(sc.fas, ch.ub_at_bs[i], lambda);

        ch.h_rb = CMat::Zero(n, m_r);
        for (size_t i = 0; i < ch.gain_rb.size(); ++i)
        {
            const CVec a_bs = steering_fas(sc.fas, ch.rb_at_bs[i], lambda);
            const CVec a_ris = steering_aris(sc.aris, ch.rb_at_ris[i], lambda);
            ch.h_rb.noalias() += ch.gain_rb[i] * (a_bs * a_ris.transpose());
        }
        return ch;
    }

    ChannelRealization build_channels(const ChannelScenario &scenario, std::mt19937_64 &rng)
    {
        return build_channels(scenario, rng, rng);
    }
}
