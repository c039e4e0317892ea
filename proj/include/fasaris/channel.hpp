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

#ifndef FASARIS_CHANNEL_HPP
#define FASARIS_CHANNEL_HPP

#include "fasaris/geometry.hpp"

#include <complex>
#include <random>
#include <vector>

namespace fasaris
{
    using cdouble = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using PathGain = cdouble;

    inline constexpr double speed_of_light = 299792458.0;

    // ARIS uniform planar array, parallel to the y-o-z plane, half-wavelength spacing.
    // Element m = iy + m_x * iz sits at center + [0, (iy - (m_x-1)/2) d, (iz - (m_z-1)/2) d].
    struct ArisGeometry
    {
        Position center = Position::Zero();
        int m_x = 0; // elements along y
        int m_z = 0; // elements along z
        double spacing = 0.0;
        Eigen::Matrix3Xd offsets; // element positions relative to center, 3 x M_R

        int size() const { return m_x * m_z; }
    };

    // FAS virtual array: sqrt(N) x sqrt(N) lattice parallel to the x-o-z plane.
    // Position n = ix + side * iz sits at center + [(ix - (side-1)/2) s, 0, (iz - (side-1)/2) s].
    struct FasGeometry
    {
        Position center = Position::Zero();
        int side = 0;
        double step = 0.0;
        double aperture = 0.0; // A, the square region is A*lambda wide
        Eigen::Matrix3Xd offsets; // 3 x N

        int size() const { return side * side; }
    };

    ArisGeometry make_aris_geometry(const Position &center, int m_x, int m_z, double wavelength);

    // N must be a perfect square; step defaults to lambda/2
    FasGeometry make_fas_geometry(const Position &center, int n_positions, double wavelength, double step = 0.0);

    // exp(-j 2 pi / lambda * offset^T k) for every column of offsets
    CVec steering(const Eigen::Matrix3Xd &offsets, const Eigen::Vector3d &k, double wavelength);

    CVec steering_aris(const ArisGeometry &geom, const AnglePair &angles, double wavelength);
    CVec steering_fas(const FasGeometry &geom, const AnglePair &angles, double wavelength);

    // lambda / (4 pi d) * exp(j phase); throws DomainError for d <= 0
    PathGain free_space_gain(double distance, double wavelength, double phase);

    struct ScattererSet
    {
        std::vector<Position> ue_ris; // L_S1
        std::vector<Position> ris_bs; // L_S2
        std::vector<Position> ue_bs;  // L_S3
    };

    struct ChannelScenario
    {
        Position ue = Position::Zero();
        Position bs = Position::Zero();
        Position ris = Position::Zero();
        ArisGeometry aris;
        FasGeometry fas;
        ScattererSet scatterers;
        double wavelength = 0.0;
        double reflection_loss = 1.0; // amplitude multiplier applied to every scattered path
    };

    // Index 0 of every path list is the scatterer-free path.
    struct ChannelRealization
    {
        CVec h_ur; // M_R
        CVec h_ub; // N
        CMat h_rb; // N x M_R

        std::vector<PathGain> gain_ur, gain_ub, gain_rb;

        std::vector<AnglePair> ur_at_ris; // arrival at the ARIS from UE / L_S1 scatterer
        std::vector<AnglePair> ub_at_bs;  // arrival at the BS from UE / L_S3 scatterer
        std::vector<AnglePair> rb_at_bs;  // arrival at the BS from ARIS / L_S2 scatterer
        std::vector<AnglePair> rb_at_ris; // departure at the ARIS towards BS / L_S2 scatterer

        PathGain cascaded_gain() const { return gain_rb.at(0) * gain_ur.at(0); }
    };

    // Direct-path phases are drawn from rng; scattered-path phases from scatter_rng.
    ChannelRealization build_channels(const ChannelScenario &scenario, std::mt19937_64 &rng, std::mt19937_64 &scatter_rng);
    ChannelRealization build_channels(const ChannelScenario &scenario, std::mt19937_64 &rng);
}

#endif
