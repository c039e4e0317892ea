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

#include "fasaris/geometry.hpp"
#include "fasaris/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fasaris
{
    bool AnglePair::valid() const
    {
        return std::isfinite(el) && std::isfinite(az) && el >= 0.0 && el <= pi && az > -pi && az <= pi;
    }

    Direction direction_vector(const AnglePair &angles)
    {
        const double se = std::sin(angles.el), ce = std::cos(angles.el);
        const double sa = std::sin(angles.az), ca = std::cos(angles.az);
        return {se * ca, se * sa, ce};
    }

    Eigen::Vector3d direction_d_el(const AnglePair &angles)
    {
        const double se = std::sin(angles.el), ce = std::cos(angles.el);
        const double sa = std::sin(angles.az), ca = std::cos(angles.az);
        return {ce * ca, ce * sa, -se};
    }

    Eigen::Vector3d direction_d_az(const AnglePair &angles)
    {
        const double se = std::sin(angles.el);
        const double sa = std::sin(angles.az), ca = std::cos(angles.az);
        return {-se * sa, se * ca, 0.0};
    }

    AnglePair angles_of(const Eigen::Vector3d &v)
    {
        const double r = v.norm();
        if (!(r > 0.0) || !std::isfinite(r))
            throw DegenerateGeometryError("angles_of: zero or non-finite vector");

        AnglePair a;
        a.el = std::acos(std::clamp(v.z() / r, -1.0, 1.0));
        a.az = std::atan2(v.y(), v.x()); // atan2(0, 0) = 0
        if (a.az == -pi)
            a.az = pi;
        return a;
    }

    AnglePair angles_between(const Position &p1, const Position &p2)
    {
        const Eigen::Vector3d d = p1 - p2;
        if (d.squaredNorm() == 0.0)
            throw DegenerateGeometryError("angles_between: coincident points");
        return angles_of(d);
    }

    double wrap_angle(double a)
    {
        a = std::remainder(a, 2.0 * pi);
        if (a <= -pi)
            a += 2.0 * pi;
        return a;
    }

    AnglePair angle_error(const AnglePair &estimate, const AnglePair &truth)
    {
        return {estimate.el - truth.el, wrap_angle(estimate.az - truth.az)};
    }
}
