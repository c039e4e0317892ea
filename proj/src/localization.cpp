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


#include "fasaris/localization.hpp"
#include "fasaris/errors.hpp"

#include <Eigen/Eigenvalues>

namespace fasaris
{
    BearingProjection BearingProjection::from(const AnglePair &bearing)
    {
        const Direction u = direction_vector(bearing);
        return {Eigen::Matrix3d::Identity() - u * u.transpose()};
    }

    double bearing_residual(const Position &p, const AnglePair &theta_ub, const AnglePair &theta_ur, const Position &p_b,
                            const Position &p_r)
    {
        const Eigen::Matrix3d kb = BearingProjection::from(theta_ub).k;
        const Eigen::Matrix3d kr = BearingProjection::from(theta_ur).k;
        return (kb * (p - p_b)).squaredNorm() + (kr * (p - p_r)).squaredNorm();
    }

    Position locate(const AnglePair &theta_ub, const AnglePair &theta_ur, const Position &p_b, const Position &p_r,
                    double max_condition)
    {
        const Eigen::Matrix3d kb = BearingProjection::from(theta_ub).k;
        const Eigen::Matrix3d kr = BearingProjection::from(theta_ur).k;
        const Eigen::Matrix3d a = kr + kb;

        // a is symmetric PSD, so its eigenvalues give the 2-norm condition number
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(2);
        if (!(lmin > 0.0) || lmax / lmin > max_condition)
            throw CollinearGeometryError("locate: bearings are (nearly) parallel");

        const Eigen::Vector3d rhs = kr * p_r + kb * p_b;
        return a.ldlt().solve(rhs);
    }
}
