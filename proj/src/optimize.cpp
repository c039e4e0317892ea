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

#include "fasaris/optimize.hpp"
#include "fasaris/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fasaris
{
    namespace
    {
        Point2 clamp_box(Point2 x, const Point2 &lo, const Point2 &hi)
        {
            for (int i = 0; i < 2; ++i)
                x[i] = std::clamp(x[i], lo[i], hi[i]);
            return x;
        }

        double dist(const Point2 &a, const Point2 &b)
        {
            return std::hypot(a[0] - b[0], a[1] - b[1]);
        }

        // Backtracking along d from x; returns true and updates (x, fx) on strict decrease.
        bool line_search(const Objective2 &f, Point2 &x, double &fx, const Point2 &d, const Point2 &lo, const Point2 &hi)
        {
            double alpha = 1.0;
            for (int k = 0; k < 60; ++k, alpha *= 0.5)
            {
                const Point2 cand = clamp_box({x[0] + alpha * d[0], x[1] + alpha * d[1]}, lo, hi);
                if (cand == x)
                    return false;
                const double fc = f(cand);
                if (std::isfinite(fc) && fc < fx)
                {
                    x = cand;
                    fx = fc;
                    return true;
                }
            }
            return false;
        }
    }

    BoxMinimizeResult minimize_box(const Objective2 &f, Point2 x0, const Point2 &lo, const Point2 &hi,
                                   const BoxMinimizeOptions &opts)
    {
        BoxMinimizeResult res;
        Point2 x = clamp_box(x0, lo, hi);
        double fx = f(x);
        if (!std::isfinite(fx))
            throw NumericalError("minimize_box: objective is not finite at the start point");

        res.initial_objective = fx;
        res.history.push_back(fx);

        const double h = opts.fd_step;
        for (int it = 0; it < opts.max_iterations; ++it)
        {
            const double fxp = f({x[0] + h, x[1]}), fxm = f({x[0] - h, x[1]});
            const double fyp = f({x[0], x[1] + h}), fym = f({x[0], x[1] - h});
            const double fpp = f({x[0] + h, x[1] + h}), fpm = f({x[0] + h, x[1] - h});
            const double fmp = f({x[0] - h, x[1] + h}), fmm = f({x[0] - h, x[1] - h});

            const Point2 g{(fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)};
            const double hxx = (fxp - 2.0 * fx + fxm) / (h * h);
            const double hyy = (fyp - 2.0 * fx + fym) / (h * h);
            const double hxy = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
                throw NumericalError("minimize_box: non-finite gradient");

            // Coordinates pinned at a bound with the gradient pushing outwards stay fixed
            std::array<bool, 2> free{};
            for (int i = 0; i < 2; ++i)
                free[i] = !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0));

            Point2 d{0.0, 0.0};
            bool have_newton = false;
            if (free[0] && free[1])
            {
                const double det = hxx * hyy - hxy * hxy;
                if (hxx > 0.0 && det > 0.0)
                {
                    d = {-(hyy * g[0] - hxy * g[1]) / det, -(hxx * g[1] - hxy * g[0]) / det};
                    have_newton = true;
                }
            }
            else if (free[0] && hxx > 0.0)
            {
                d = {-g[0] / hxx, 0.0};
                have_newton = true;
            }
            else if (free[1] && hyy > 0.0)
            {
                d = {0.0, -g[1] / hyy};
                have_newton = true;
            }

            const Point2 before = x;
            const double f_before = fx;
            bool moved = have_newton && line_search(f, x, fx, d, lo, hi);
            if (!moved)
            {
                // Scaled steepest descent fallback
                Point2 sd{free[0] ? -g[0] : 0.0, free[1] ? -g[1] : 0.0};
                const double curv = std::max({std::abs(hxx), std::abs(hyy), 1e-12});
                sd = {sd[0] / curv, sd[1] / curv};
                moved = line_search(f, x, fx, sd, lo, hi);
            }
            if (!moved)
                break;

            res.iterations = it + 1;
            res.history.push_back(fx);
            if (dist(before, x) < opts.step_tolerance && f_before - fx < opts.objective_tolerance)
                break;
        }

        res.x = x;
        res.objective = fx;
        return res;
    }
}
