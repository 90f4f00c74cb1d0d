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

#ifndef RIBS_CHANNEL_GEOMETRY_HPP
#define RIBS_CHANNEL_GEOMETRY_HPP

#include "ribs/types.hpp"

#include <vector>

namespace ribs
{
    // Planar element grid (BS array or RIS).
    //
    // Local frame: the reference plane is the global y-z plane with normal +x. The horizontal
    // axis is +y and the vertical axis +z before tilting; the tilt rotates the grid about its
    // horizontal axis. Element n = r * cols + c, each row running along the horizontal axis
    // (column index c increases with +horizontal, row index r increases downwards).
    struct ArrayGeometry
    {
        std::size_t rows = 1;
        std::size_t cols = 1;
        double spacing = 0.0; // m
        Vec3 center = Vec3::Zero();
        Vec3 normal = Vec3::UnitX();
        Vec3 horizontal = Vec3::UnitY();
        Vec3 vertical = Vec3::UnitZ();
        double tilt = 0.0; // rad
        std::vector<Vec3> element_positions;

        std::size_t size() const { return element_positions.size(); }

        // Index of the element mirrored across the horizontal (row-flip) or vertical
        // (column-flip) center line.
        std::size_t mirror_rows(std::size_t n) const;
        std::size_t mirror_cols(std::size_t n) const;
    };

    // Throws invalid_geometry for rows/cols == 0 or spacing <= 0.
    ArrayGeometry build_planar_array(std::size_t rows, std::size_t cols, double spacing,
                                     const Vec3 &center, double tilt);

    // Enforces the half-wavelength minimum spacing (no mutual coupling).
    void require_min_spacing(const ArrayGeometry &array, double wavelength);

    struct NearFieldChannel
    {
        CMat entries;            // [n_bs, n_ris]
        Eigen::MatrixXd distance; // d_{m,n} in m
        double wavelength = 0.0;
    };

    // Pure LoS spherical-wave channel: [H]_{m,n} = lambda / (4 pi d) exp(-j 2 pi d / lambda).
    // Throws singular_geometry if any BS element coincides with a RIS element.
    NearFieldChannel near_field_channel(const ArrayGeometry &bs, const ArrayGeometry &ris,
                                        double wavelength);

    // Far-field response vector, phase referenced at the array center (boresight -> all ones).
    // Azimuth is measured from the normal towards the horizontal axis, elevation towards
    // the vertical axis.
    CVec array_response(const ArrayGeometry &array, double azimuth, double elevation,
                        double wavelength);

    // Unit direction for (azimuth, elevation) in the array's frame.
    Vec3 direction_vector(const ArrayGeometry &array, double azimuth, double elevation);

    struct Angles
    {
        double azimuth = 0.0;
        double elevation = 0.0;
    };

    // Angles of a point as seen from the array center.
    Angles angles_towards(const ArrayGeometry &array, const Vec3 &point);

} // namespace ribs

#endif
