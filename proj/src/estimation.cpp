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

#include "fasaris/estimation.hpp"
#include "fasaris/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fasaris
{
    DecoupledSignals decouple(const CMat &y)
    {
        if (y.cols() < 2 || y.cols() % 2 != 0)
            throw DomainError("decouple: T = " + std::to_string(y.cols()) + " must be even");
        const Eigen::Index half = y.cols() / 2;
        DecoupledSignals d;
        d.y_los = 0.5 * (y.leftCols(half) + y.rightCols(half));
        d.y_nlos = 0.5 * (y.leftCols(half) - y.rightCols(half));
        return d;
    }

    CMat sample_covariance(const CMat &y)
    {
        if (y.cols() < 1)
            throw DimensionError("sample_covariance: no snapshots");
        return (y * y.adjoint()) / static_cast<double>(y.cols());
    }

    // ------------------------------------------------------------------------- MUSIC

    namespace
    {
        int node_count(double lo, double hi, double step)
        {
            if (!(step > 0.0) || hi < lo)
                throw DomainError("grid: step must be positive and hi >= lo");
            return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
        }

        // Signal-subspace eigenvectors (largest B) of R as columns
        CMat signal_subspace(const CMat &y, int sources, CMat *noise = nullptr)
        {
            const CMat r = sample_covariance(y);
            if (!r.allFinite())
                throw NumericalError("music: covariance has non-finite entries");
            Eigen::SelfAdjointEigenSolver<CMat> es(r);
            if (es.info() != Eigen::Success)
                throw NumericalError("music: eigendecomposition failed");
            const Eigen::Index n = r.rows();
            if (noise)
                *noise = es.eigenvectors().leftCols(n - sources);
            return es.eigenvectors().rightCols(sources);
        }

        void check_sources(const CMat &y, const FasGeometry &geom, int sources)
        {
            if (y.rows() != geom.size())
                throw DimensionError("music: rows of y must equal the number of FAS positions");
            if (sources < 1 || sources >= y.rows())
                throw DimensionError("music: need 1 <= B < N (B = " + std::to_string(sources) + ")");
        }
    }

    int AngleGrid::n_el() const { return node_count(el_min, el_max, step); }
    int AngleGrid::n_az() const { return node_count(az_min, az_max, step); }

    namespace
    {
        // sum_b |a(theta)^H v_b|^2 over the grid, using the separable lattice a_n = ex[ix] ez[iz]
        Eigen::MatrixXd beam_power(const CMat &vecs, const FasGeometry &geom, double wavelength, const AngleGrid &grid)
        {
            const int side = geom.side;
            const double k0 = 2.0 * pi / wavelength;
            const int n_el = grid.n_el(), n_az = grid.n_az();
            const auto cols = static_cast<int>(vecs.cols());

            std::vector<double> xs(side), zs(side);
            for (int i = 0; i < side; ++i)
            {
                xs[i] = geom.offsets(0, i);
                zs[i] = geom.offsets(2, side * i);
            }

            // conj(v) reshaped so that row iz holds the ix run
            std::vector<CMat> vc(cols);
            for (int b = 0; b < cols; ++b)
            {
                vc[b].resize(side, side);
                for (int iz = 0; iz < side; ++iz)
                    for (int ix = 0; ix < side; ++ix)
                        vc[b](iz, ix) = std::conj(vecs(ix + side * iz, b));
            }

            Eigen::MatrixXd out(n_el, n_az);
            CVec ex(side), ez(side), inner(side);
            for (int i = 0; i < n_el; ++i)
            {
                const double el = grid.el(i);
                const double kz = std::cos(el), se = std::sin(el);
                for (int iz = 0; iz < side; ++iz)
                    ez(iz) = std::polar(1.0, -k0 * zs[iz] * kz);

                for (int j = 0; j < n_az; ++j)
                {
                    const double kx = se * std::cos(grid.az(j));
                    for (int ix = 0; ix < side; ++ix)
                        ex(ix) = std::polar(1.0, -k0 * xs[ix] * kx);

                    double captured = 0.0;
                    for (int b = 0; b < cols; ++b)
                    {
                        inner.noalias() = vc[b] * ex;
                        captured += std::norm(ez.dot(inner.conjugate()));
                    }
                    out(i, j) = captured;
                }
            }
            return out;
        }
    }

    MusicResult music_aoa(const CMat &y, const FasGeometry &geom, double wavelength, int sources, const AngleGrid &grid)
    {
        check_sources(y, geom, sources);
        const CMat us = signal_subspace(y, sources);

        const double n = static_cast<double>(geom.size());
        const int n_el = grid.n_el(), n_az = grid.n_az();

        MusicResult res;
        res.spectrum.el.resize(n_el);
        res.spectrum.az.resize(n_az);
        for (int i = 0; i < n_el; ++i)
            res.spectrum.el[i] = grid.el(i);
        for (int j = 0; j < n_az; ++j)
            res.spectrum.az[j] = grid.az(j);

        // 1 / (a^H U_n U_n^H a) = 1 / (N - ||U_s^H a||^2)
        const Eigen::MatrixXd captured = beam_power(us, geom, wavelength, grid);
        res.spectrum.values =
            (n - captured.array()).max(std::numeric_limits<double>::min()).inverse().matrix();

        // Local maxima over the 8-neighbourhood, lowest index wins plateaus
        const bool az_periodic = (grid.az_max - grid.az_min + grid.step) >= 2.0 * pi - 1e-9;
        const auto &v = res.spectrum.values;
        auto beats = [&](int i1, int j1, int i2, int j2)
        {
            const double a = v(i1, j1), b = v(i2, j2);
            return a > b || (a == b && (i1 * n_az + j1) < (i2 * n_az + j2));
        };

        struct Peak
        {
            double value;
            int index;
            int i, j;
        };
        std::vector<Peak> peaks;
        for (int i = 0; i < n_el; ++i)
            for (int j = 0; j < n_az; ++j)
            {
                bool is_peak = true;
                for (int di = -1; di <= 1 && is_peak; ++di)
                    for (int dj = -1; dj <= 1 && is_peak; ++dj)
                    {
                        if (di == 0 && dj == 0)
                            continue;
                        const int ii = i + di;
                        int jj = j + dj;
                        if (ii < 0 || ii >= n_el)
                            continue;
                        if (jj < 0 || jj >= n_az)
                        {
                            if (!az_periodic)
                                continue;
                            jj = (jj + n_az) % n_az;
                        }
                        if (beats(ii, jj, i, j))
                            is_peak = false;
                    }
                if (is_peak)
                    peaks.push_back({v(i, j), i * n_az + j, i, j});
            }

        std::sort(peaks.begin(), peaks.end(), [](const Peak &a, const Peak &b)
                  { return a.value > b.value || (a.value == b.value && a.index < b.index); });

        for (int b = 0; b < sources && b < static_cast<int>(peaks.size()); ++b)
        {
            res.peaks.push_back({grid.el(peaks[b].i), grid.az(peaks[b].j)});
            res.peak_values.push_back(peaks[b].value);
        }
        return res;
    }

    Eigen::RowVectorXcd noise_subspace_projection(const CMat &y, const FasGeometry &geom, double wavelength, int sources,
                                                  const AnglePair &angles)
    {
        check_sources(y, geom, sources);
        CMat un;
        signal_subspace(y, sources, &un);
        const CVec a = steering_fas(geom, angles, wavelength);
        return a.adjoint() * un;
    }

    // ------------------------------------------------------------------------- refinement

    RefineResult refine_angle(const AnglePair &initial, const AnglePair &window, const AngleObjective &objective,
                              const AngleGrid &admissible)
    {
        const Point2 lo{std::max(initial.el - window.el, admissible.el_min), std::max(initial.az - window.az, admissible.az_min)};
        const Point2 hi{std::min(initial.el + window.el, admissible.el_max), std::min(initial.az + window.az, admissible.az_max)};
        if (lo[0] > hi[0] || lo[1] > hi[1])
            throw DomainError("refine_angle: initial point outside the admissible box");

        const Objective2 f = [&](const Point2 &p)
        { return objective({p[0], p[1]}); };
        const BoxMinimizeResult m = minimize_box(f, {initial.el, initial.az}, lo, hi);

        RefineResult r;
        r.angles = {m.x[0], m.x[1]};
        r.initial_objective = m.initial_objective;
        r.objective = m.objective;
        r.iterations = m.iterations;
        r.history = m.history;
        return r;
    }

    CMat project_out(const CMat &y, const CVec &u)
    {
        if (u.size() != y.rows())
            throw DimensionError("project_out: direction length must equal the rows of y");
        return y - u * (u.adjoint() * y);
    }

    namespace
    {
        // Steering vector with the nulled direction removed
        CVec effective_steering(const Eigen::Matrix3Xd &offsets, const AnglePair &th, double wavelength, const CVec &nulled)
        {
            CVec a = steering(offsets, direction_vector(th), wavelength);
            if (nulled.size() > 0)
                a -= nulled * nulled.dot(a);
            return a;
        }
    }

    AngleObjective known_waveform_objective(const CMat &y, const CVec &x, const FasGeometry &geom, double wavelength,
                                            const CVec &nulled)
    {
        if (x.size() != y.cols())
            throw DimensionError("known_waveform_objective: one pilot per column required");
        if (nulled.size() != 0 && nulled.size() != y.rows())
            throw DimensionError("known_waveform_objective: nulled direction has the wrong length");
        const double energy = y.squaredNorm();
        const double x_energy = x.squaredNorm();
        if (!(x_energy > 0.0))
            throw DomainError("known_waveform_objective: zero pilot sequence");
        const CVec matched = y * x.conjugate(); // Y conj(x)

        return [y, x, matched, energy, x_energy, nulled, offsets = geom.offsets, wavelength](const AnglePair &th)
        {
            if (energy == 0.0)
                return 0.0;
            const CVec a = effective_steering(offsets, th, wavelength, nulled);
            const double aa = a.squaredNorm();
            if (!(aa > 0.0))
                return 1.0;
            const cdouble rho = a.dot(matched) / (aa * x_energy);
            const CMat resid = y - (rho * a) * x.transpose();
            return resid.squaredNorm() / energy;
        };
    }

    std::vector<LosPath> relax_paths(const CVec &v, const FasGeometry &geom, double wavelength, int paths,
                                     const AngleGrid &grid, const AnglePair &first, const CVec &nulled, int cycles)
    {
        if (v.size() != geom.size())
            throw DimensionError("relax_paths: vector length must equal the number of FAS positions");
        if (paths < 1 || paths >= geom.size())
            throw DimensionError("relax_paths: need 1 <= paths < N");

        const AnglePair cell{grid.step, grid.step};
        const double n = static_cast<double>(geom.size());

        auto fit = [&](const CVec &r, const AnglePair &start)
        {
            const double energy = r.squaredNorm();
            const AngleObjective f = [&](const AnglePair &th)
            {
                if (energy == 0.0)
                    return 0.0;
                const CVec a = effective_steering(geom.offsets, th, wavelength, nulled);
                const double aa = a.squaredNorm();
                if (!(aa > 0.0))
                    return 1.0;
                return (r - (a.dot(r) / aa) * a).squaredNorm() / energy;
            };
            LosPath p;
            p.theta = refine_angle(start, cell, f, grid).angles;
            const CVec a = effective_steering(geom.offsets, p.theta, wavelength, nulled);
            p.gain = a.dot(r) / a.squaredNorm();
            return p;
        };
        auto contribution = [&](const LosPath &p)
        { return CVec(p.gain * effective_steering(geom.offsets, p.theta, wavelength, nulled)); };

        std::vector<LosPath> out{fit(v, first)};

        // Normalized periodogram |a_eff^H r|^2 / ||a_eff||^2; directions close to the null are not trusted
        Eigen::MatrixXd norm2 = Eigen::MatrixXd::Constant(grid.n_el(), grid.n_az(), n);
        if (nulled.size() > 0)
            norm2 = (n - beam_power(nulled, geom, wavelength, grid).array()).max(1e-3 * n).matrix();

        for (int k = 1; k < paths; ++k)
        {
            CVec r = v;
            for (const auto &p : out)
                r -= contribution(p);
            const Eigen::MatrixXd score = beam_power(r, geom, wavelength, grid).cwiseQuotient(norm2);
            Eigen::Index bi = 0, bj = 0;
            score.maxCoeff(&bi, &bj); // first maximum in column-major order
            out.push_back(fit(r, {grid.el(static_cast<int>(bi)), grid.az(static_cast<int>(bj))}));
        }

        for (int c = 0; c < cycles && paths > 1; ++c)
            for (int i = 0; i < paths; ++i)
            {
                CVec r = v;
                for (int j = 0; j < paths; ++j)
                    if (j != i)
                        r -= contribution(out[j]);
                out[i] = fit(r, out[i].theta);
            }
        return out;
    }

    AngleObjective unknown_waveform_objective(const CMat &y, const FasGeometry &geom, double wavelength)
    {
        const double energy = y.squaredNorm();
        const double n = static_cast<double>(y.rows());
        return [y, energy, n, offsets = geom.offsets, wavelength](const AnglePair &th)
        {
            if (energy == 0.0)
                return 0.0;
            const CVec a = steering(offsets, direction_vector(th), wavelength);
            const Eigen::RowVectorXcd s = (a.adjoint() * y) / n;
            const CMat resid = y - a * s;
            return resid.squaredNorm() / energy;
        };
    }

    PathGain gain_ls(const CVec &y_col, const CVec &a, cdouble pilot)
    {
        if (pilot == cdouble(0.0))
            throw DomainError("gain_ls: zero pilot");
        if (y_col.size() != a.size())
            throw DimensionError("gain_ls: size mismatch");
        const double aa = a.squaredNorm();
        if (!(aa > 0.0))
            throw DomainError("gain_ls: zero steering vector");
        return a.dot(y_col) / (aa * pilot);
    }

    CVec peel_off(const CMat &y_nlos, const AnglePair &theta_rb, const FasGeometry &geom, double wavelength)
    {
        if (y_nlos.rows() != geom.size())
            throw DimensionError("peel_off: rows of y must equal the number of FAS positions");
        const CVec a = steering_fas(geom, theta_rb, wavelength);
        const double aa = a.squaredNorm();
        if (!(aa > 0.0))
            throw DomainError("peel_off: degenerate steering vector");
        return (a.adjoint() * y_nlos).transpose() / aa;
    }

    // ------------------------------------------------------------------------- cascade

    int CascadeBox::n_y() const { return node_count(y_min, y_max, step); }
    int CascadeBox::n_z() const { return node_count(z_min, z_max, step); }

    CascadeBox feasible_cascade_box(const AnglePair &known_ris_side, double step)
    {
        const Direction k = direction_vector(known_ris_side);
        CascadeBox b;
        b.step = step;
        b.y_min = std::max(-2.0, k.y() - 1.0);
        b.y_max = std::min(2.0, k.y() + 1.0);
        b.z_min = std::max(-2.0, k.z() - 1.0);
        b.z_max = std::min(2.0, k.z() + 1.0);
        return b;
    }

    CVec cascade_steering(const ArisGeometry &geom, const CascadeParams &psi, double wavelength)
    {
        return steering(geom.offsets, Eigen::Vector3d(0.0, psi.psi_y, psi.psi_z), wavelength);
    }

    CVec cascade_signature(const ArisGeometry &geom, const CascadeParams &psi, const CMat &w, const CVec &x,
                           double wavelength)
    {
        if (w.rows() != geom.size() || w.cols() != x.size())
            throw DimensionError("cascade_signature: w must be M_R x K with K pilots");
        const CVec a = cascade_steering(geom, psi, wavelength);
        return ((w.transpose() * a).array() * x.array()).matrix();
    }

    double cascade_objective(const CascadeParams &psi, const CVec &peeled, const CMat &w, const CVec &x,
                             const ArisGeometry &geom, double wavelength)
    {
        if (peeled.size() != x.size())
            throw DimensionError("cascade_objective: one peeled sample per pilot required");
        const double energy = peeled.squaredNorm();
        if (energy == 0.0)
            return 0.0;
        const CVec g = cascade_signature(geom, psi, w, x, wavelength);
        const double gg = g.squaredNorm();
        if (!(gg > 0.0))
            return 1.0;
        const cdouble rho = g.dot(peeled) / gg;
        return (peeled - rho * g).squaredNorm() / energy;
    }

    CascadeEstimate estimate_cascade(const CVec &peeled, const CMat &w, const CVec &x, const ArisGeometry &geom,
                                     double wavelength, const CascadeBox &box, bool refine)
    {
        const Eigen::Index k = x.size();
        if (k == 0 || peeled.size() == 0)
            throw DimensionError("estimate_cascade: empty snapshot set");
        if (peeled.size() != k || w.cols() != k || w.rows() != geom.size())
            throw DimensionError("estimate_cascade: inconsistent dimensions");
        if (!peeled.allFinite())
            throw NumericalError("estimate_cascade: non-finite samples");

        const int mx = geom.m_x, mz = geom.m_z;
        const double k0 = 2.0 * pi / wavelength;
        const int ny = box.n_y(), nz = box.n_z();

        // Element coordinates along y (per column iy) and z (per row iz)
        std::vector<double> ys(mx), zs(mz);
        for (int i = 0; i < mx; ++i)
            ys[i] = geom.offsets(1, i);
        for (int i = 0; i < mz; ++i)
            zs[i] = geom.offsets(2, mx * i);

        const CMat wx = (w.array().rowwise() * x.transpose().array()).matrix(); // M_R x K

        // ey table, one row per psi_y node
        CMat ey(ny, mx);
        for (int iy = 0; iy < ny; ++iy)
        {
            const double py = box.y_min + iy * box.step;
            for (int m = 0; m < mx; ++m)
                ey(iy, m) = std::polar(1.0, -k0 * ys[m] * py);
        }

        double best_score = -1.0;
        long best_index = std::numeric_limits<long>::max();
        int best_iy = 0, best_iz = 0;

        CMat v(mx, k);
        CVec g(k);
        for (int iz = 0; iz < nz; ++iz)
        {
            const double pz = box.z_min + iz * box.step;
            v.setZero();
            for (int r = 0; r < mz; ++r)
            {
                const cdouble ez = std::polar(1.0, -k0 * zs[r] * pz);
                v.noalias() += ez * wx.middleRows(static_cast<Eigen::Index>(r) * mx, mx);
            }
            const Eigen::RowVectorXcd pv = (v * peeled.conjugate()).transpose(); // sum_t V(m,t) conj(p_t)
            for (int iy = 0; iy < ny; ++iy)
            {
                g.noalias() = v.transpose() * ey.row(iy).transpose();
                const double gg = g.squaredNorm();
                if (!(gg > 0.0))
                    continue;
                const cdouble c = pv.dot(ey.row(iy).conjugate()); // conj(g)^T p, conjugated; modulus is what counts
                const double score = std::norm(c) / gg;
                const long index = static_cast<long>(iy) * nz + iz;
                if (score > best_score || (score == best_score && index < best_index))
                {
                    best_score = score;
                    best_index = index;
                    best_iy = iy;
                    best_iz = iz;
                }
            }
        }

        CascadeEstimate est;
        est.grid = {box.y_min + best_iy * box.step, box.z_min + best_iz * box.step};
        est.grid_objective = cascade_objective(est.grid, peeled, w, x, geom, wavelength);
        est.refined = est.grid;
        est.objective = est.grid_objective;
        est.history = {est.grid_objective};

        if (refine)
        {
            const Point2 lo{std::max(est.grid.psi_y - box.step, box.y_min), std::max(est.grid.psi_z - box.step, box.z_min)};
            const Point2 hi{std::min(est.grid.psi_y + box.step, box.y_max), std::min(est.grid.psi_z + box.step, box.z_max)};
            const Objective2 f = [&](const Point2 &p)
            { return cascade_objective({p[0], p[1]}, peeled, w, x, geom, wavelength); };
            const BoxMinimizeResult m = minimize_box(f, {est.grid.psi_y, est.grid.psi_z}, lo, hi);
            est.refined = {m.x[0], m.x[1]};
            est.objective = m.objective;
            est.iterations = m.iterations;
            est.history = m.history;
        }

        est.snapshots_per_element = static_cast<double>(k) / geom.size();
        Eigen::JacobiSVD<CMat> svd(w);
        const auto &sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        est.phase_condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
        return est;
    }

    AnglePair recover_theta_ur(const CascadeParams &psi, const AnglePair &known_ris_side, double front_sign)
    {
        const Direction kk = direction_vector(known_ris_side);
        const double ky = psi.psi_y - kk.y();
        const double kz = psi.psi_z - kk.z();
        constexpr double slack = 1e-12;

        if (!std::isfinite(ky) || !std::isfinite(kz) || std::abs(kz) > 1.0 + slack)
            throw InfeasibleCascadeError("recover_theta_ur: |k_z| > 1");
        AnglePair th;
        th.el = std::acos(std::clamp(kz, -1.0, 1.0));
        const double se = std::sin(th.el);
        if (se == 0.0)
        {
            if (std::abs(ky) > slack)
                throw InfeasibleCascadeError("recover_theta_ur: k_y != 0 on the polar axis");
            th.az = 0.0;
            return th;
        }
        const double s = ky / se;
        if (std::abs(s) > 1.0 + slack)
            throw InfeasibleCascadeError("recover_theta_ur: |k_y / sin(el)| > 1");
        const double base = std::asin(std::clamp(s, -1.0, 1.0));
        th.az = front_sign >= 0.0 ? base : wrap_angle(pi - base);
        return th;
    }

    PathGain estimate_gain_nlos(const CVec &peeled, const CascadeParams &psi, const CMat &w, const CVec &x,
                                const ArisGeometry &geom, double wavelength)
    {
        const CVec g = cascade_signature(geom, psi, w, x, wavelength);
        const double gg = g.squaredNorm();
        if (!(gg > 0.0))
            throw DomainError("estimate_gain_nlos: zero cascade signature");
        return g.dot(peeled) / gg;
    }

    // ------------------------------------------------------------------------- full chain

    EstimationReport estimate_channel(const CMat &y, const PilotSchedule &pilots, const PhaseSchedule &phases,
                                      const FasGeometry &fas, const ArisGeometry &aris, const AnglePair &known_ris_side,
                                      double wavelength, const EstimatorConfig &cfg)
    {
        if (y.cols() != pilots.x.size() || phases.w.cols() != pilots.x.size())
            throw DimensionError("estimate_channel: frame, pilots and phases disagree on T");
        if (!y.allFinite())
            throw NumericalError("estimate_channel: non-finite received samples");

        const DecoupledSignals d = decouple(y);
        const Eigen::Index half = d.y_los.cols();
        const CVec x1 = pilots.x.head(half);
        const CMat w1 = phases.w.leftCols(half);
        const AnglePair cell{cfg.bs_grid.step, cfg.bs_grid.step};

        EstimationReport rep;

        // Direct path at the BS: strongest MUSIC peak of the LoS block, refined by LS
        CVec nulled;
        CMat y_los = d.y_los;
        if (cfg.los_null)
        {
            nulled = steering_fas(fas, *cfg.los_null, wavelength).normalized();
            y_los = project_out(y_los, nulled);
        }
        const MusicResult los = music_aoa(y_los, fas, wavelength, cfg.los_sources, cfg.bs_grid);
        rep.theta_ub = los.peaks.front();
        rep.los_peak = los.peak_values.front();
        if (cfg.refine)
        {
            const RefineResult r = refine_angle(rep.theta_ub, cell,
                                                known_waveform_objective(y_los, x1, fas, wavelength, nulled), cfg.bs_grid);
            rep.theta_ub = r.angles;
            rep.los_residual = r.objective;
        }
        const CVec matched = y_los * x1.conjugate() / x1.squaredNorm();
        CVec a_ub = steering_fas(fas, rep.theta_ub, wavelength);
        if (nulled.size() > 0)
            a_ub -= nulled * nulled.dot(a_ub);
        rep.gain_ub = gain_ls(matched, a_ub, 1.0);

        // Coherent scattered paths in the LoS block: fit them jointly and keep the strongest
        if (cfg.los_sources > 1 && cfg.refine)
        {
            const auto paths = relax_paths(matched, fas, wavelength, cfg.los_sources, cfg.bs_grid, rep.theta_ub, nulled);
            const auto best = std::max_element(paths.begin(), paths.end(), [](const LosPath &a, const LosPath &b)
                                               { return std::abs(a.gain) < std::abs(b.gain); });
            rep.theta_ub = best->theta;
            rep.gain_ub = best->gain;
        }

        // Reflected path: BS-side angle, peel-off, cascade fit; strongest recovered gain wins
        const MusicResult nlos = music_aoa(d.y_nlos, fas, wavelength, cfg.nlos_sources, cfg.bs_grid);
        const CascadeBox box = feasible_cascade_box(known_ris_side, cfg.psi_step);

        bool have = false;
        for (size_t i = 0; i < nlos.peaks.size(); ++i)
        {
            AnglePair theta_rb = nlos.peaks[i];
            double resid = 0.0;
            if (cfg.refine)
            {
                const RefineResult r = refine_angle(theta_rb, cell, unknown_waveform_objective(d.y_nlos, fas, wavelength),
                                                    cfg.bs_grid);
                theta_rb = r.angles;
                resid = r.objective;
            }
            const CVec peeled = peel_off(d.y_nlos, theta_rb, fas, wavelength);
            const CascadeEstimate ce = estimate_cascade(peeled, w1, x1, aris, wavelength, box, cfg.refine);
            const PathGain gain = estimate_gain_nlos(peeled, ce.refined, w1, x1, aris, wavelength);

            if (!have || std::abs(gain) > std::abs(rep.gain_urb))
            {
                have = true;
                rep.theta_rb = theta_rb;
                rep.nlos_peak = nlos.peak_values[i];
                rep.nlos_residual = resid;
                rep.psi = ce.refined;
                rep.cascade_residual = ce.objective;
                rep.phase_condition = ce.phase_condition;
                rep.gain_urb = gain;
            }
        }
        if (!have)
            throw NumericalError("estimate_channel: no NLoS peak found");

        rep.theta_ur = recover_theta_ur(rep.psi, known_ris_side, cfg.ris_front_sign);
        return rep;
    }
}
