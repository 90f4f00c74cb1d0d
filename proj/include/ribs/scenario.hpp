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

#ifndef RIBS_SCENARIO_HPP
#define RIBS_SCENARIO_HPP

#include "ribs/deterministic_channel.hpp"
#include "ribs/ris_optimizer.hpp"
#include "ribs/stochastic_channel.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ribs
{
    enum class ChannelMode
    {
        statistical,
        internal_rt,
        imported
    };

    enum class RisMode
    {
        random,
        optimized
    };

    std::string to_string(ChannelMode m);
    std::string to_string(RisMode m);
    ChannelMode channel_mode_from_string(const std::string &s);
    RisMode ris_mode_from_string(const std::string &s);

    // One swept parameter: "n_ris", "p_max", "precoder" or "channel_mode".
    // An n_ris value N becomes the most square rows x cols grid with rows <= cols.
    struct Sweep
    {
        std::string parameter;
        std::vector<std::string> values; // textual form, parsed per parameter
    };

    const std::vector<std::string> &sweepable_parameters();

    struct Building
    {
        Vec3 min_corner = Vec3::Zero();
        Vec3 max_corner = Vec3::Zero();
        double reflection = concrete_reflection;
    };

    // Scene description for the internal tracer. Buildings expand to four walls each; UEs
    // are never dropped inside a building footprint.
    struct SceneSpec
    {
        bool ground = true;
        double ground_height = 0.0;
        double ground_reflection = ribs::ground_reflection;
        std::vector<Building> buildings;
        std::vector<Facet> facets;

        Scene build() const;
        bool inside_building(const Vec3 &point) const;
    };

    // Ground plane plus two rectangular buildings inside the UE region.
    SceneSpec default_toy_scene();

    // Defaults reproduce the evaluation setup: 16-antenna BS, 64-element RIS, 25 UEs,
    // P_max = 0.5 W, nu = 0.5, -107 dBm noise, D in [4, 5] wavelengths, tilt pi/6.
    struct ScenarioConfig
    {
        std::size_t bs_rows = 4, bs_cols = 4;
        std::size_t ris_rows = 8, ris_cols = 8;
        double bs_spacing_wl = 0.5, ris_spacing_wl = 0.5; // in wavelengths
        std::size_t n_ue = 25;

        double carrier_hz = default_carrier_hz;
        double bandwidth_hz = 1e6;
        double noise_ris_dbm = -107.0;
        double noise_ue_dbm = -107.0;
        double p_max = 0.5;
        double nu = 0.5;

        double distance_min_wl = 4.0, distance_max_wl = 5.0; // BS-RIS center distance
        double tilt = pi / 6.0;
        Vec3 ribs_position = Vec3(-158.0, 8.0, 30.0);
        double ue_height = 1.5;
        double region_x_min = -90.0, region_y_min = -160.0;
        double region_x_max = 150.0, region_y_max = 210.0;

        UrbanModel urban;

        ChannelMode channel_mode = ChannelMode::statistical;
        PrecoderScheme precoder = PrecoderScheme::rzf;
        RisMode ris_mode = RisMode::optimized;
        double random_epsilon = 0.25;

        double tol = 1e-3;
        double mu_max = default_mu_max;
        std::size_t fp_sweeps = 5;

        std::uint64_t seed = 1;
        std::size_t drops = 50;
        std::size_t realizations = 20; // fading blocks per drop (statistical mode)

        SceneSpec scene = default_toy_scene();
        std::size_t rt_max_order = 4;
        double subcarrier_offset_hz = 0.0;
        std::string channel_dump;  // imported mode

        std::optional<Sweep> sweep;

        double wavelength() const { return wavelength_from_carrier(carrier_hz); }
        double noise_ris_w() const { return dbm_to_watt(noise_ris_dbm); }
        double noise_ue_w() const { return dbm_to_watt(noise_ue_dbm); }
        std::size_t n_bs() const { return bs_rows * bs_cols; }
        std::size_t n_ris() const { return ris_rows * ris_cols; }

        OptimizerOptions optimizer_options() const;
    };

    ScenarioConfig default_scenario();

    // Throws scenario_error naming the offending field.
    void validate(const ScenarioConfig &cfg);

    // JSON schema: every ScenarioConfig field under its snake_case name; missing keys keep
    // their defaults, unknown keys are rejected.
    ScenarioConfig scenario_from_json(const nlohmann::json &j);
    nlohmann::json scenario_to_json(const ScenarioConfig &cfg);
    ScenarioConfig load_scenario(const std::filesystem::path &path);

    // Copy of cfg with the swept parameter set to `value`.
    ScenarioConfig apply_sweep_value(const ScenarioConfig &cfg, const std::string &parameter,
                                     const std::string &value);

} // namespace ribs

#endif
