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

#ifndef FASARIS_WAVEFORM_HPP
#define FASARIS_WAVEFORM_HPP

#include "fasaris/channel.hpp"

#include <random>

namespace fasaris
{
    inline constexpr double boltzmann = 1.380649e-23;
    inline constexpr double reference_temperature = 290.0;

    double dbm_to_watt(double dbm);
    double watt_to_dbm(double watt);

    // k_B * 290 K * bandwidth * 10^(NF/10)
    double thermal_noise_power(double noise_figure_db, double bandwidth_hz);

    // Repeated pilot block: x = [x_1 .. x_{T/2}, x_1 .. x_{T/2}], |x_t|^2 = power
    struct PilotSchedule
    {
        CVec x;
        double power = 0.0;

        int length() const { return static_cast<int>(x.size()); }
        int half() const { return length() / 2; }
    };

    // ARIS reflection schedule, M_R x T. Columns T/2+1..T are the negation of 1..T/2.
    struct PhaseSchedule
    {
        CMat w;
        double amplification = 1.0;
    };

    struct NoiseModel
    {
        double sigma_b2 = 0.0; // BS thermal noise, W
        double sigma_r2 = 0.0; // ARIS-injected noise per element, W
    };

    // Noisy received frame plus the noiseless components it was built from
    struct RxFrame
    {
        CMat y;      // N x T
        CMat h_los;  // N x T
        CMat h_nlos; // N x T
    };

    // Unit-modulus random-phase symbols scaled to power. T must be even and >= 2.
    PilotSchedule make_pilots(int length, double power, std::mt19937_64 &rng);

    // First-half phases uniform on [0, 2 pi) with magnitude p, second half negated. p >= 1.
    PhaseSchedule make_phase_schedule(int n_elements, int length, double amplification, std::mt19937_64 &rng);

    // Identifier of the epsilon -> p mapping below, written to run metadata
    inline constexpr const char *amplification_model_id = "aris-output-power-budget/v1";

    // p = sqrt(eps * P_U * M_R / sum_m (P_U |h_ur(m)|^2 + sigma_r2)), floored at 1.
    // The ARIS then radiates eps times the UE transmit power.
    double amplification_from_epsilon(double epsilon, double ue_power, const CVec &h_ur, double sigma_r2);

    // y_{n,t} = h_ub(n) x_t + h_rb(n,:) diag(w_t) (h_ur x_t + z_R,t) + z_B,{n,t}
    RxFrame synthesize_rx(const ChannelRealization &ch, const PilotSchedule &pilots, const PhaseSchedule &phases,
                          const NoiseModel &noise, std::mt19937_64 &aris_noise_rng, std::mt19937_64 &bs_noise_rng);
    RxFrame synthesize_rx(const ChannelRealization &ch, const PilotSchedule &pilots, const PhaseSchedule &phases,
                          const NoiseModel &noise, std::mt19937_64 &rng);

    // Circularly-symmetric complex Gaussian CN(0, variance)
    cdouble complex_normal(double variance, std::mt19937_64 &rng);
}

#endif
