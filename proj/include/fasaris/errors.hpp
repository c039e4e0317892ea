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

#ifndef FASARIS_ERRORS_HPP
#define FASARIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fasaris
{
    // Two points coincide, so no direction can be formed between them.
    class DegenerateGeometryError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Argument outside the mathematical domain of an operation (d <= 0, odd T, ...).
    class DomainError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    class DimensionError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Base for failures that invalidate a single Monte Carlo trial without
    // invalidating the run. The harness counts these as failures.
    class EstimationError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // The estimated cascade parameters do not map back to a physical direction.
    class InfeasibleCascadeError : public EstimationError
    {
    public:
        using EstimationError::EstimationError;
    };

    // Bearings from BS and ARIS are (nearly) parallel.
    class CollinearGeometryError : public EstimationError
    {
    public:
        using EstimationError::EstimationError;
    };

    // Non-finite values reached an estimator (objective, covariance).
    class NumericalError : public EstimationError
    {
    public:
        using EstimationError::EstimationError;
    };

    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}

#endif
