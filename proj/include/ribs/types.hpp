// SPDX-License-Identifier: Apache-2.0
//
// ribs-sim: simulation and optimization toolkit for reconfigurable intelligent base stations
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

#ifndef RIBS_TYPES_HPP
#define RIBS_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ribs
{
    using cx = std::complex<double>;
    using Vec3 = Eigen::Vector3d;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double speed_of_light = 299792458.0; // m/s
    inline constexpr double default_carrier_hz = 1.9e9;

    inline double wavelength_from_carrier(double carrier_hz) { return speed_of_light / carrier_hz; }

    // dBm -> W
    inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    // Base of all library errors. The CLI maps the subclasses to exit codes.
    class error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class invalid_geometry : public error
    {
    public:
        using error::error;
    };

    class singular_geometry : public error
    {
    public:
        using error::error;
    };

    class invalid_input : public error
    {
    public:
        using error::error;
    };

    class numeric_error : public error
    {
    public:
        using error::error;
    };

    class scenario_error : public error
    {
    public:
        using error::error;
    };

    class import_error : public error
    {
    public:
        using error::error;
    };

    class power_budget_error : public error
    {
    public:
        using error::error;
    };

    class campaign_error : public error
    {
    public:
        using error::error;
    };

} // namespace ribs

#endif
