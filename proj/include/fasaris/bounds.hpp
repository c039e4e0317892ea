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


#ifndef FASARIS_BOUNDS_HPP
#define FASARIS_BOUNDS_HPP

#include "fasaris/channel.hpp"
#include "fasaris/waveform.hpp"

namespace fasaris
{
    // [Re rho_UB, Im rho_UB, Re rho_URB, Im rho_URB, el_UB, az_UB, el_UR, az_UR]
    using ChannelParams = Eigen::Matrix<double, 8, 1>;

    // [Re rho_UB, Im rho_UB, Re rho_URB, Im rho_URB, x_U, y_U, z_U]
    using PositionParams = Eigen::Matrix<double, 7, 1>;

    using Matrix8d = Eigen::Matrix<double, 8, 8>;
    using Matrix87d = Eigen::Matrix<double, 8, 7>;
    using Matrix7d = Eigen::Matrix<double, 7, 7>;

    // Everything the noise-free mean depends on besides the channel parameters.
    // The ARIS<->BS directions are geometry constants and stay fixed.
    struct BoundModel
    {
        Eigen::Matrix3Xd fas_offsets;  // 3 x N, relative to p_B
        Eigen::Matrix3Xd aris_offsets; // 3 x M_R, relative to p_R
        Direction k_bs_side;           // ARIS -> BS arrival direction at the FAS
        Direction k_ris_side;          // BS direction seen from the ARIS
        CMat w;                        // M_R x T phase schedule (magnitude p)
        CVec x;                        // T pilots
        double wavelength = 0.0;
        Eigen::VectorXd noise_var;     // per FAS position: sigma_B^2 + [C_R]_{n,n}
    };

    // Per-position variance sigma_B^2 + sigma_R^2 p^2 sum_m |H_RB(n,m)|^2, C_R held fixed
    Eigen::VectorXd per_position_noise(const CMat &h_rb, const NoiseModel &noise, double amplification);

    BoundModel make_bound_model(const ChannelScenario &scenario, const PilotSchedule &pilots, const PhaseSchedule &phases,
                                const Eigen::VectorXd &noise_var);

    // Ground-truth parameter vectors of the scatterer-free paths
    ChannelParams channel_params(const ChannelRealization &ch);
    PositionParams position_params(const ChannelRealization &ch, const Position &ue);

    // gamma(gamma_p) given the anchors
    ChannelParams to_channel_params(const PositionParams &gp, const Position &p_b, const Position &p_r);

    // mu_{n,t}: direct term plus the M_R-summed cascaded term
    cdouble mean_signal(int n, int t, const ChannelParams &g, const BoundModel &m);

    // d mu_{n,t} / d gamma, analytic
    Eigen::Matrix<cdouble, 8, 1> mean_signal_gradient(int n, int t, const ChannelParams &g, const BoundModel &m);

    // F = sum_{n,t} (2 / v_n) Re{dmu^H dmu}. Neumaier-compensated accumulation.
    // Throws DomainError for a non-positive noise variance.
    Matrix8d fim_channel(const ChannelParams &g, const BoundModel &m);

    // d gamma / d gamma_p (rows index gamma, columns gamma_p)
    Matrix87d jacobian(const Position &ue, const Position &p_b, const Position &p_r);

    struct FimBundle
    {
        Matrix8d f;
        Matrix87d j;
        Matrix7d f_p;                 // J^T F J
        Eigen::Matrix<double, 8, 1> crb; // diag F^-1, +inf when singular
        double peb = 0.0;             // +inf when F_p is singular
    };

    // Symmetric PSD inverse with equilibration; returns false when numerically singular
    bool invert_fim(const Eigen::MatrixXd &f, Eigen::MatrixXd &inv, double rcond = 1e-12);

    double peb(const Matrix7d &f_p);

    FimBundle evaluate_bounds(const ChannelParams &g, const BoundModel &m, const Position &ue, const Position &p_b,
                              const Position &p_r);
}

#endif
