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

#ifndef FASARIS_GEOMETRY_HPP
#define FASARIS_GEOMETRY_HPP

#include <Eigen/Dense>
#include <numbers>

namespace fasaris
{
    inline constexpr double pi = std::numbers::pi;

    // Cartesian position in meters
    using Position = Eigen::Vector3d;

    // Unit-norm propagation direction (dimensionless)
    using Direction = Eigen::Vector3d;

    // Elevation measured from +z in [0, pi], azimuth from +x towards +y in (-pi, pi]. Radians.
    struct AnglePair
    {
        double el = 0.0;
        double az = 0.0;

        bool valid() const;
    };

    // k(theta) = [sin el cos az, sin el sin az, cos el]
    Direction direction_vector(const AnglePair &angles);

    // Partial derivatives of k(theta) with respect to elevation and azimuth
    Eigen::Vector3d direction_d_el(const AnglePair &angles);
    Eigen::Vector3d direction_d_az(const AnglePair &angles);

    // Angles of the direction pointing from p2 to p1.
    // Throws DegenerateGeometryError when the points coincide.
    AnglePair angles_between(const Position &p1, const Position &p2);

    // Inverse of direction_vector for an arbitrary nonzero vector
    AnglePair angles_of(const Eigen::Vector3d &v);

    // Wrap an angle difference to (-pi, pi]
    double wrap_angle(double a);

    // Componentwise error est - truth, azimuth wrapped
    AnglePair angle_error(const AnglePair &estimate, const AnglePair &truth);
}

#endif
