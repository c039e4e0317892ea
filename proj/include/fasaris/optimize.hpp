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

#ifndef FASARIS_OPTIMIZE_HPP
#define FASARIS_OPTIMIZE_HPP

#include <array>
#include <functional>
#include <vector>

namespace fasaris
{
    using Point2 = std::array<double, 2>;
    using Objective2 = std::function<double(const Point2 &)>;

    struct BoxMinimizeOptions
    {
        double step_tolerance = 1e-9;      // stop when the accepted step is shorter than this ...
        double objective_tolerance = 1e-9; // ... and the objective decreased by less than this
        double fd_step = 1e-5;             // finite-difference step for gradient and Hessian
        int max_iterations = 200;
    };

    struct BoxMinimizeResult
    {
        Point2 x{};
        double objective = 0.0;
        double initial_objective = 0.0;
        int iterations = 0;
        std::vector<double> history; // objective after every accepted iterate, starting with the initial one
    };

    // Projected Newton minimization of a smooth 2-D objective inside the box [lo, hi].
    // Only strictly decreasing steps are accepted, so the objective never increases.
    // Throws NumericalError when the objective is not finite at the start point.
    BoxMinimizeResult minimize_box(const Objective2 &f, Point2 x0, const Point2 &lo, const Point2 &hi,
                                   const BoxMinimizeOptions &opts = {});
}

#endif
