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

#ifndef FASARIS_ESTIMATION_HPP
#define FASARIS_ESTIMATION_HPP

#include "fasaris/channel.hpp"
#include "fasaris/optimize.hpp"
#include "fasaris/waveform.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace fasaris
{
    // ---------------------------------------------------------------- decoupling

    struct DecoupledSignals
    {
        CMat y_los;  // N x T/2, (Y_T1 + Y_T2) / 2
        CMat y_nlos; // N x T/2, (Y_T1 - Y_T2) / 2
    };

    // Throws DomainError for odd T.
    DecoupledSignals decouple(const CMat &y);

    // R = Y Y^H / K
    CMat sample_covariance(const CMat &y);

    // ---------------------------------------------------------------- MUSIC

    // Rectangular elevation/azimuth search grid. Nodes are lo + i * step up to hi inclusive.
    // The FAS lattice lies in the x-o-z plane and only observes k_x and k_z, so the azimuth
    // range has to stay inside one half-space (default: k_y >= 0, az in [0, pi]).
    struct AngleGrid
    {
        double el_min = 0.0;
        double el_max = pi;
        double az_min = 0.0;
        double az_max = pi;
        double step = pi / 180.0;

        int n_el() const;
        int n_az() const;
        double el(int i) const { return el_min + i * step; }
        double az(int i) const { return az_min + i * step; }
    };

    struct SpectrumGrid
    {
        std::vector<double> el;
        std::vector<double> az;
        Eigen::MatrixXd values; // n_el x n_az pseudo-spectrum 1 / (a^H U_n U_n^H a)
    };

    struct MusicResult
    {
        std::vector<AnglePair> peaks; // strongest first
        std::vector<double> peak_values;
        SpectrumGrid spectrum;
    };

    // B strongest local maxima of the 2-D MUSIC pseudo-spectrum of R = Y Y^H / K.
    // Ties are broken towards the lowest grid index (i_el * n_az + i_az).
    // Throws DimensionError for B >= N, NumericalError for a non-finite covariance.
    MusicResult music_aoa(const CMat &y, const FasGeometry &geom, double wavelength, int sources, const AngleGrid &grid);

    // a^H U_n for the noise subspace of R built from y with B sources (diagnostic for the orthogonality identity)
    Eigen::RowVectorXcd noise_subspace_projection(const CMat &y, const FasGeometry &geom, double wavelength, int sources,
                                                  const AnglePair &angles);

    // ---------------------------------------------------------------- refinement

    using AngleObjective = std::function<double(const AnglePair &)>;

    struct RefineResult
    {
        AnglePair angles;
        double initial_objective = 0.0;
        double objective = 0.0;
        int iterations = 0;
        std::vector<double> history;
    };

    // Bounded local minimization of objective over [initial - window, initial + window],
    // intersected with admissible. Converges when step and objective decrease both fall below 1e-9.
    RefineResult refine_angle(const AnglePair &initial, const AnglePair &window, const AngleObjective &objective,
                              const AngleGrid &admissible);

    // Normalized LS misfit ||Y - rho(theta) a(theta) x^T||_F^2 / ||Y||_F^2 with the gain profiled out.
    // Pass a single column and symbol for the one-snapshot form. When nulled (unit norm) is given, y is
    // assumed already projected onto its orthogonal complement and the steering vector is projected too.
    AngleObjective known_waveform_objective(const CMat &y, const CVec &x, const FasGeometry &geom, double wavelength,
                                            const CVec &nulled = CVec());

    // y - u u^H y for a unit vector u
    CMat project_out(const CMat &y, const CVec &u);

    // Coherent LoS-block paths fitted jointly to v = Y conj(x) / ||x||^2 by cyclic
    // single-path refinement (RELAX): each path is re-estimated against the residual
    // left by all others. first seeds path 0; the others come from residual periodogram peaks.
    struct LosPath
    {
        AnglePair theta;
        PathGain gain;
    };
    std::vector<LosPath> relax_paths(const CVec &v, const FasGeometry &geom, double wavelength, int paths,
                                     const AngleGrid &grid, const AnglePair &first, const CVec &nulled = CVec(),
                                     int cycles = 3);

    // Normalized ||(I - a a^H / N) Y||_F^2 / ||Y||_F^2: the per-snapshot amplitudes are profiled out.
    AngleObjective unknown_waveform_objective(const CMat &y, const FasGeometry &geom, double wavelength);

    // rho = a^dagger y / x_t. Throws DomainError for a zero pilot.
    PathGain gain_ls(const CVec &y_col, const CVec &steering, cdouble pilot);

    // a_B^dagger(theta_RB) y_nlos: one complex sample per snapshot
    CVec peel_off(const CMat &y_nlos, const AnglePair &theta_rb, const FasGeometry &geom, double wavelength);

    // ---------------------------------------------------------------- cascade

    // Spatial-frequency sums psi = k_y(theta_UR) + k_y(ris->bs), k_z(theta_UR) + k_z(ris->bs), each in [-2, 2]
    struct CascadeParams
    {
        double psi_y = 0.0;
        double psi_z = 0.0;
    };

    struct CascadeBox
    {
        double y_min = -2.0;
        double y_max = 2.0;
        double z_min = -2.0;
        double z_max = 2.0;
        double step = 0.01;

        int n_y() const;
        int n_z() const;
    };

    // The cascade phase law has period 2 in each component (half-wavelength spacing), so
    // [-2, 2]^2 holds four aliases. Given the known ARIS->BS direction, the physical window is
    // k_known +- 1, which covers exactly one period.
    CascadeBox feasible_cascade_box(const AnglePair &known_ris_side, double step = 0.01);

    // a_R(psi): exp(-j 2 pi / lambda (y_m psi_y + z_m psi_z)) over the ARIS elements
    CVec cascade_steering(const ArisGeometry &geom, const CascadeParams &psi, double wavelength);

    // g_t = a_R(psi)^T diag(w_t) x_t for every snapshot
    CVec cascade_signature(const ArisGeometry &geom, const CascadeParams &psi, const CMat &w, const CVec &x,
                           double wavelength);

    // Normalized sum_t |peeled_t - rho g_t|^2 / sum_t |peeled_t|^2 with rho profiled out
    double cascade_objective(const CascadeParams &psi, const CVec &peeled, const CMat &w, const CVec &x,
                             const ArisGeometry &geom, double wavelength);

    struct CascadeEstimate
    {
        CascadeParams grid;    // best grid node
        CascadeParams refined; // after bounded local refinement
        double grid_objective = 0.0;
        double objective = 0.0;
        int iterations = 0;
        std::vector<double> history;
        double snapshots_per_element = 0.0;
        double phase_condition = 0.0; // singular-value ratio of the snapshot phase matrix
    };

    // Grid search over box followed by refinement within one grid cell.
    // w is M_R x K and x has K entries (the first-half schedule). Throws DimensionError for K = 0.
    CascadeEstimate estimate_cascade(const CVec &peeled, const CMat &w, const CVec &x, const ArisGeometry &geom,
                                     double wavelength, const CascadeBox &box, bool refine = true);

    // Invert psi = k(theta_UR) + k(known) on the y/z components. front_sign picks the sign of k_x.
    // Throws InfeasibleCascadeError when the remainder is not a direction.
    AnglePair recover_theta_ur(const CascadeParams &psi, const AnglePair &known_ris_side, double front_sign = 1.0);

    // Snapshot-averaged LS gain rho_URB = sum conj(g_t) peeled_t / sum |g_t|^2
    PathGain estimate_gain_nlos(const CVec &peeled, const CascadeParams &psi, const CMat &w, const CVec &x,
                                const ArisGeometry &geom, double wavelength);

    // ---------------------------------------------------------------- full chain

    struct EstimatorConfig
    {
        AngleGrid bs_grid;            // MUSIC grid for the BS-side angles
        int los_sources = 1;          // coherent LoS-block paths fitted jointly; the strongest is theta_UB
        int nlos_sources = 1;         // BS-side NLoS paths processed, strongest first
        double psi_step = 0.01;       // cascade grid step
        bool refine = true;
        double ris_front_sign = 1.0;  // UE lies on the +x side of the ARIS plane

        // Known BS-side direction of the ARIS. The ARIS noise reaches every FAS position through the
        // same ARIS->BS path, so in the LoS block it is a rank-one interferer along a_B(los_null),
        // which is projected out before the BS AoA search.
        std::optional<AnglePair> los_null;
    };

    struct EstimationReport
    {
        AnglePair theta_ub;
        AnglePair theta_rb;
        CascadeParams psi;
        AnglePair theta_ur;
        PathGain gain_ub;
        PathGain gain_urb;

        double los_peak = 0.0;
        double nlos_peak = 0.0;
        double los_residual = 0.0;
        double nlos_residual = 0.0;
        double cascade_residual = 0.0;
        double phase_condition = 0.0;
    };

    // Decouple, estimate theta_UB by MUSIC + refinement, estimate theta_RB on the NLoS block,
    // peel it off, fit the cascade, and recover theta_UR. known_ris_side is the ARIS->BS direction.
    EstimationReport estimate_channel(const CMat &y, const PilotSchedule &pilots, const PhaseSchedule &phases,
                                      const FasGeometry &fas, const ArisGeometry &aris, const AnglePair &known_ris_side,
                                      double wavelength, const EstimatorConfig &cfg = {});
}

#endif
