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

#ifndef RIBS_DETERMINISTIC_CHANNEL_HPP
#define RIBS_DETERMINISTIC_CHANNEL_HPP

#include "ribs/channel_geometry.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ribs
{
    // Planar rectangle with a real scalar reflection coefficient.
    // Corners are given in order around the rectangle.
    struct Facet
    {
        std::array<Vec3, 4> corners;
        double reflection = -0.7;

        Vec3 normal() const;
    };

    inline constexpr double concrete_reflection = -0.7;
    inline constexpr double ground_reflection = -0.5;

    struct Scene
    {
        std::vector<Facet> facets;
        bool ground = false;
        double ground_height = 0.0;
        double ground_reflection_coefficient = ribs::ground_reflection;
    };

    // Throws invalid_geometry for non-coplanar / degenerate corners or |reflection| > 1.
    void validate_scene(const Scene &scene);

    // Axis-aligned box (walls only) as four vertical facets.
    void add_building(Scene &scene, const Vec3 &min_corner, const Vec3 &max_corner,
                      double reflection = concrete_reflection);

    struct RayPath
    {
        cx gain;                   // includes free-space amplitude, carrier phase and reflections
        double delay = 0.0;        // s
        std::size_t order = 0;     // bounce count
        std::vector<Vec3> vertices; // tx, reflection points..., rx
        std::vector<int> reflectors; // facet index per bounce, -1 for the ground

        double length() const { return delay * speed_of_light; }
    };

    // LOS + specular reflections up to max_order via mirror-image enumeration with visibility
    // checks. a_r = lambda / (4 pi L) exp(-j 2 pi L / lambda) * prod(reflection coefficients).
    // Result is sorted by delay, then lexicographically by vertices.
    std::vector<RayPath> trace_paths(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                     std::size_t max_order, double wavelength);

    struct Tap
    {
        cx gain;
        double delay = 0.0;
    };

    inline constexpr double delay_merge_tolerance = 1e-15; // s

    // Discrete impulse response: taps sorted by delay, coincident delays merged.
    std::vector<Tap> impulse_response(const std::vector<RayPath> &paths);

    // H(f) = sum_r a_r exp(-j 2 pi f tau_r), f in baseband (relative to the carrier at which
    // the gains were computed).
    cx frequency_response(const std::vector<RayPath> &paths, double f);
    cx frequency_response(const std::vector<Tap> &taps, double f);

    // Column k holds the RIS -> UE k channel, entry l traced from RIS element l (isotropic).
    CMat build_ris_ue_channels(const Scene &scene, const ArrayGeometry &ris,
                               const std::vector<Vec3> &ue_positions, double wavelength,
                               std::size_t max_order, double subcarrier_offset_hz = 0.0);

    enum class Provenance
    {
        statistical,
        ray_traced,
        imported
    };

    std::string to_string(Provenance p);

    struct ChannelSet
    {
        CMat h; // [n_ris, n_ue]
        Provenance provenance = Provenance::imported;
        double carrier_hz = default_carrier_hz;
        std::string source; // free-form provenance string from the dump header
    };

    // ------------------------------------------------------------------------
    // Channel dump interchange (JSON).
    // ------------------------------------------------------------------------

    inline constexpr int channel_dump_format_version = 1;

    struct DumpRay
    {
        cx gain;
        double tau_s = 0.0;
    };

    struct ChannelDump
    {
        double carrier_hz = default_carrier_hz;
        std::size_t n_ris = 0;
        std::size_t n_ue = 0;
        std::string provenance;
        std::string geometry_hash;                     // optional
        std::optional<CMat> h;                         // "freq" mode, [n_ris, n_ue]
        std::vector<std::vector<std::vector<DumpRay>>> rays; // "rays" mode, [n_ue][n_ris][...]

        bool ray_mode() const { return !h.has_value(); }
    };

    // FNV-1a over the element positions, hex encoded.
    std::string geometry_hash(const ArrayGeometry &array);

    std::string serialize_channel_dump(const ChannelDump &dump);
    ChannelDump parse_channel_dump(const std::string &text);

    void save_channel_dump(const std::filesystem::path &path, const ChannelDump &dump);
    ChannelDump read_channel_dump(const std::filesystem::path &path);

    // Validated ChannelSet; ray lists are synthesized at the dump carrier (zero baseband offset).
    ChannelSet to_channel_set(const ChannelDump &dump);
    ChannelSet load_channel_dump(const std::filesystem::path &path);

    ChannelDump make_freq_dump(const ChannelSet &set);

} // namespace ribs

#endif
