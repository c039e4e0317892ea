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


#ifndef FASARIS_LOCALIZATION_HPP
#define FASARIS_LOCALIZATION_HPP

#include "fasaris/geometry.hpp"

namespace fasaris
{
    // K = I - k k^T: projector onto the plane orthogonal to a bearing
    struct BearingProjection
    {
        Eigen::Matrix3d k;

        static BearingProjection from(const AnglePair &bearing);
    };

    // Sum of squared distances from p to the two bearing lines through p_B and p_R
    double bearing_residual(const Position &p, const AnglePair &theta_ub, const AnglePair &theta_ur, const Position &p_b,
                            const Position &p_r);

    // Closed-form LS intersection p = (K_R + K_B)^-1 (K_R p_R + K_B p_B).
    // Throws CollinearGeometryError when the system's condition number exceeds max_condition.
    Position locate(const AnglePair &theta_ub, const AnglePair &theta_ur, const Position &p_b, const Position &p_r,
                    double max_condition = 1e12);
}

#endif
