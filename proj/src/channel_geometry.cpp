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

#include "ribs/channel_geometry.hpp"

#include <cmath>
#include <string>

namespace ribs
{
    std::size_t ArrayGeometry::mirror_rows(std::size_t n) const
    {
        const std::size_t r = n / cols, c = n % cols;
        return (rows - 1 - r) * cols + c;
    }

    std::size_t ArrayGeometry::mirror_cols(std::size_t n) const
    {
        const std::size_t r = n / cols, c = n % cols;
        return r * cols + (cols - 1 - c);
    }

    ArrayGeometry build_planar_array(std::size_t rows, std::size_t cols, double spacing,
                                     const Vec3 &center, double tilt)
    {
        if (rows == 0 || cols == 0)
            throw invalid_geometry("array needs at least one row and one column");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw invalid_geometry("element spacing must be positive, got " + std::to_string(spacing));

        ArrayGeometry g;
        g.rows = rows;
        g.cols = cols;
        g.spacing = spacing;
        g.center = center;
        g.tilt = tilt;

        // Rotation about the horizontal (y) axis.
        const double ct = std::cos(tilt), st = std::sin(tilt);
        g.horizontal = Vec3::UnitY();
        g.normal = Vec3(ct, 0.0, -st);
        g.vertical = Vec3(st, 0.0, ct);

        g.element_positions.reserve(rows * cols);
        const double r0 = 0.5 * static_cast<double>(rows - 1);
        const double c0 = 0.5 * static_cast<double>(cols - 1);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
            {
                const double oh = (static_cast<double>(c) - c0) * spacing;
                const double ov = (r0 - static_cast<double>(r)) * spacing;
                g.element_positions.emplace_back(center + oh * g.horizontal + ov * g.vertical);
            }
        return g;
    }

    void require_min_spacing(const ArrayGeometry &array, double wavelength)
    {
        if (array.size() > 1 && array.spacing < 0.5 * wavelength * (1.0 - 1e-12))
            throw invalid_geometry("element spacing " + std::to_string(array.spacing) +
                                   " m is below half a wavelength");
    }

    NearFieldChannel near_field_channel(const ArrayGeometry &bs, const ArrayGeometry &ris,
                                        double wavelength)
    {
        if (!(wavelength > 0.0))
            throw invalid_input("wavelength must be positive");

        NearFieldChannel out;
        out.wavelength = wavelength;
        const auto n_bs = static_cast<Eigen::Index>(bs.size());
        const auto n_ris = static_cast<Eigen::Index>(ris.size());
        out.entries.resize(n_bs, n_ris);
        out.distance.resize(n_bs, n_ris);

        const double k = 2.0 * pi / wavelength;
        for (Eigen::Index m = 0; m < n_bs; ++m)
            for (Eigen::Index n = 0; n < n_ris; ++n)
            {
                const double d = (bs.element_positions[m] - ris.element_positions[n]).norm();
                if (!(d > 0.0))
                    throw singular_geometry("BS element " + std::to_string(m) +
                                            " coincides with RIS element " + std::to_string(n));
                out.distance(m, n) = d;
                out.entries(m, n) = std::polar(wavelength / (4.0 * pi * d), -k * d);
            }
        return out;
    }

    Vec3 direction_vector(const ArrayGeometry &array, double azimuth, double elevation)
    {
        const double ce = std::cos(elevation);
        return ce * std::cos(azimuth) * array.normal + ce * std::sin(azimuth) * array.horizontal +
               std::sin(elevation) * array.vertical;
    }

    CVec array_response(const ArrayGeometry &array, double azimuth, double elevation,
                        double wavelength)
    {
        const Vec3 kvec = (2.0 * pi / wavelength) * direction_vector(array, azimuth, elevation);
        CVec a(static_cast<Eigen::Index>(array.size()));
        for (std::size_t n = 0; n < array.size(); ++n)
            a[static_cast<Eigen::Index>(n)] =
                std::polar(1.0, kvec.dot(array.element_positions[n] - array.center));
        return a;
    }

    Angles angles_towards(const ArrayGeometry &array, const Vec3 &point)
    {
        const Vec3 d = point - array.center;
        const double x = d.dot(array.normal);
        const double y = d.dot(array.horizontal);
        const double z = d.dot(array.vertical);
        return {std::atan2(y, x), std::atan2(z, std::hypot(x, y))};
    }

} // namespace ribs
