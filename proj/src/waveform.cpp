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

#include "fasaris/waveform.hpp"
#include "fasaris/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fasaris
{
    double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

    double thermal_noise_power(double noise_figure_db, double bandwidth_hz)
    {
        if (bandwidth_hz < 0.0)
            throw DomainError("thermal_noise_power: negative bandwidth");
        return boltzmann * reference_temperature * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
    }

    cdouble complex_normal(double variance, std::mt19937_64 &rng)
    {
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * variance));
        const double re = gauss(rng);
        const double im = gauss(rng);
        return {re, im};
    }

    PilotSchedule make_pilots(int length, double power, std::mt19937_64 &rng)
    {
        if (length < 2 || length % 2 != 0)
            throw DomainError("make_pilots: T = " + std::to_string(length) + " must be even and >= 2");
        if (!(power >= 0.0))
            throw DomainError("make_pilots: negative power");

        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        const int half = length / 2;
        const double amp = std::sqrt(power);

        PilotSchedule p;
        p.power = power;
        p.x.resize(length);
        for (int t = 0; t < half; ++t)
        {
            p.x(t) = std::polar(amp, phase(rng));
            p.x(t + half) = p.x(t);
        }
        return p;
    }

    PhaseSchedule make_phase_schedule(int n_elements, int length, double amplification, std::mt19937_64 &rng)
    {
        if (length < 2 || length % 2 != 0)
            throw DomainError("make_phase_schedule: T must be even and >= 2");
        if (n_elements < 1)
            throw DomainError("make_phase_schedule: M_R must be positive");
        if (!(amplification >= 1.0))
            throw DomainError("make_phase_schedule: amplification must be >= 1");

        std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
        const int half = length / 2;

        PhaseSchedule s;
        s.amplification = amplification;
        s.w.resize(n_elements, length);
        for (int t = 0; t < half; ++t)
            for (int m = 0; m < n_elements; ++m)
            {
                s.w(m, t) = std::polar(amplification, phase(rng));
                s.w(m, t + half) = -s.w(m, t);
            }
        return s;
    }

    double amplification_from_epsilon(double epsilon, double ue_power, const CVec &h_ur, double sigma_r2)
    {
        if (!(epsilon > 0.0))
            throw DomainError("amplification_from_epsilon: epsilon must be positive");
        const double m_r = static_cast<double>(h_ur.size());
        const double input_power = ue_power * h_ur.squaredNorm() + m_r * sigma_r2;
        if (!(input_power > 0.0))
            return 1.0;
        return std::max(1.0, std::sqrt(epsilon * ue_power * m_r / input_power));
    }

    RxFrame synthesize_rx(const ChannelRealization &ch, const PilotSchedule &pilots, const PhaseSchedule &phases,
                          const NoiseModel &noise, std::mt19937_64 &aris_noise_rng, std::mt19937_64 &bs_noise_rng)
    {
        const Eigen::Index n = ch.h_ub.size();
        const Eigen::Index m_r = ch.h_ur.size();
        const Eigen::Index t_len = pilots.x.size();
        if (ch.h_rb.rows() != n || ch.h_rb.cols() != m_r)
            throw DimensionError("synthesize_rx: h_rb must be N x M_R");
        if (phases.w.rows() != m_r || phases.w.cols() != t_len)
            throw DimensionError("synthesize_rx: phase schedule must be M_R x T");
        if (noise.sigma_b2 < 0.0 || noise.sigma_r2 < 0.0)
            throw DomainError("synthesize_rx: negative noise power");

        RxFrame f;
        f.h_los = ch.h_ub * pilots.x.transpose();

        // Column t of the reflected link: h_rb * (w_t .* h_ur) * x_t
        const CMat reflected = phases.w.array().colwise() * ch.h_ur.array();
        f.h_nlos = ch.h_rb * reflected;
        f.h_nlos.array().rowwise() *= pilots.x.transpose().array();

        f.y = f.h_los + f.h_nlos;

        if (noise.sigma_r2 > 0.0)
        {
            CMat z_r(m_r, t_len);
            for (Eigen::Index t = 0; t < t_len; ++t)
                for (Eigen::Index m = 0; m < m_r; ++m)
                    z_r(m, t) = complex_normal(noise.sigma_r2, aris_noise_rng);
            f.y.noalias() += ch.h_rb * (phases.w.array() * z_r.array()).matrix();
        }
        if (noise.sigma_b2 > 0.0)
        {
            for (Eigen::Index t = 0; t < t_len; ++t)
                for (Eigen::Index i = 0; i < n; ++i)
                    f.y(i, t) += complex_normal(noise.sigma_b2, bs_noise_rng);
        }
        return f;
    }

    RxFrame synthesize_rx(const ChannelRealization &ch, const PilotSchedule &pilots, const PhaseSchedule &phases,
                          const NoiseModel &noise, std::mt19937_64 &rng)
    {
        return synthesize_rx(ch, pilots, phases, noise, rng, rng);
    }
}
