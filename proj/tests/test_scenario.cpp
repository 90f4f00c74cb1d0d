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

#include "ribs/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

using namespace ribs;
using nlohmann::json;

namespace
{
    // Message of the scenario_error thrown by f, empty when nothing is thrown.
    template <class F>
    std::string error_of(F &&f)
    {
        try
        {
            f();
        }
        catch (const scenario_error &e)
        {
            return e.what();
        }
        return {};
    }

    std::string parse_error(const json &j)
    {
        return error_of([&] { validate(scenario_from_json(j)); });
    }
} // namespace

TEST_CASE("defaults mirror the evaluation setup")
{
    const ScenarioConfig c = default_scenario();
    CHECK(c.n_bs() == 16);
    CHECK(c.n_ris() == 64);
    CHECK(c.n_ue == 25);
    CHECK(c.p_max == 0.5);
    CHECK(c.nu == 0.5);
    CHECK(c.noise_ue_dbm == -107.0);
    CHECK(c.noise_ris_w() == Catch::Approx(1.9952623e-14).epsilon(1e-6));
    CHECK(c.urban.min_distance_m == 70.0);
    CHECK(c.distance_min_wl == 4.0);
    CHECK(c.distance_max_wl == 5.0);
    CHECK(c.tilt == Catch::Approx(pi / 6.0));
    CHECK(c.random_epsilon == 0.25);
    CHECK(c.precoder == PrecoderScheme::rzf);
    CHECK(c.channel_mode == ChannelMode::statistical);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("JSON round trip of the defaults and of a modified config")
{
    const ScenarioConfig c = default_scenario();
    const json j = scenario_to_json(c);
    CHECK(scenario_to_json(scenario_from_json(j)) == j);
    // serialization is stable as text
    CHECK(scenario_to_json(scenario_from_json(json::parse(j.dump()))).dump() == j.dump());

    json m = j;
    m["n_ue"] = 3;
    m["precoder"] = "mr";
    m["channel_mode"] = "internal_rt";
    m["seed"] = 18446744073709551615ull;
    m["sweep"] = {{"parameter", "p_max"}, {"values", {0.05, 0.5, 5}}};
    const ScenarioConfig r = scenario_from_json(m);
    CHECK(r.n_ue == 3);
    CHECK(r.precoder == PrecoderScheme::mr);
    CHECK(r.channel_mode == ChannelMode::internal_rt);
    CHECK(r.seed == 18446744073709551615ull);
    REQUIRE(r.sweep);
    CHECK(r.sweep->values.size() == 3);
    CHECK(scenario_to_json(scenario_from_json(scenario_to_json(r))) == scenario_to_json(r));
}

TEST_CASE("missing keys keep their defaults")
{
    const ScenarioConfig c = scenario_from_json(json{{"n_ue", 4}});
    CHECK(c.n_ue == 4);
    CHECK(c.n_ris() == 64);
    CHECK(scenario_to_json(scenario_from_json(json::object())) == scenario_to_json(default_scenario()));
}

TEST_CASE("unknown keys and wrong types name the field")
{
    CHECK(parse_error(json{{"n_uex", 4}}).find("n_uex") != std::string::npos);
    CHECK(parse_error(json{{"p_max", "high"}}).find("p_max") != std::string::npos);
    CHECK(parse_error(json{{"n_ue", -2}}).find("n_ue") != std::string::npos);
    CHECK(parse_error(json{{"scene", {{"walls", 1}}}}).find("scene") != std::string::npos);
    CHECK(parse_error(json{{"region", {1, 2, 3}}}).find("region") != std::string::npos);
    CHECK(parse_error(json{{"precoder", "zf"}}).find("precoder") != std::string::npos);
    CHECK(parse_error(json{{"channel_mode", "sionna"}}).find("channel_mode") != std::string::npos);
    CHECK(parse_error(json::array()) != "");
}

TEST_CASE("invalid values name the field")
{
    const std::pair<const char *, json> cases[] = {
        {"n_ue", 0},          {"drops", 0},          {"realizations", 0},   {"p_max", 0.0},
        {"p_max", -1.0},      {"nu", -0.1},          {"carrier_hz", 0.0},   {"bs_spacing_wl", 0.4},
        {"ris_spacing_wl", 0.25}, {"random_epsilon", 1.0}, {"tol", 0.0},   {"fp_sweeps", 0},
        {"distance_min_wl", 0.0}, {"rt_max_order", 9}, {"mu_max", 0.0},
    };
    for (const auto &[field, value] : cases)
    {
        INFO(field);
        CHECK(parse_error(json{{field, value}}).find(field) != std::string::npos);
    }
    CHECK(parse_error(json{{"distance_max_wl", 3.0}}).find("distance_max_wl") != std::string::npos);
    CHECK(parse_error(json{{"region", {10, 0, -10, 5}}}).find("region") != std::string::npos);
    CHECK(parse_error(json{{"channel_mode", "imported"}}).find("channel_dump") != std::string::npos);
}

TEST_CASE("sweep parsing and application")
{
    const ScenarioConfig base = default_scenario();
    ScenarioConfig c = apply_sweep_value(base, "n_ris", "32");
    CHECK(c.ris_rows == 4);
    CHECK(c.ris_cols == 8);
    c = apply_sweep_value(base, "n_ris", "16");
    CHECK(c.ris_rows == 4);
    CHECK(c.ris_cols == 4);
    c = apply_sweep_value(base, "n_ris", "7");
    CHECK(c.ris_rows == 1);
    CHECK(c.ris_cols == 7);
    CHECK(apply_sweep_value(base, "p_max", "5").p_max == 5.0);
    CHECK(apply_sweep_value(base, "precoder", "mmse").precoder == PrecoderScheme::mmse);
    CHECK(apply_sweep_value(base, "channel_mode", "internal_rt").channel_mode == ChannelMode::internal_rt);
    CHECK_FALSE(apply_sweep_value(base, "p_max", "5").sweep);

    CHECK(error_of([&] { apply_sweep_value(base, "n_ris", "2.5"); }).find("sweep.values") != std::string::npos);
    CHECK(error_of([&] { apply_sweep_value(base, "p_max", "-1"); }).find("sweep.values") != std::string::npos);
    CHECK(error_of([&] { apply_sweep_value(base, "nu", "1"); }).find("sweep.parameter") != std::string::npos);
    CHECK(error_of([&] { apply_sweep_value(base, "precoder", "zf"); }).find("sweep.values") != std::string::npos);

    CHECK(parse_error(json{{"sweep", {{"parameter", "n_ris"}, {"values", {16, 0}}}}}).find("sweep") != std::string::npos);
    CHECK(parse_error(json{{"sweep", {{"parameter", "tilt"}, {"values", {0.1}}}}}).find("sweep") != std::string::npos);
    CHECK(parse_error(json{{"sweep", {{"parameter", "p_max"}, {"values", 5}}}}).find("sweep.values") != std::string::npos);
    CHECK(parse_error(json{{"sweep", {{"parameter", "precoder"}, {"values", {"mr", "rzf", "mmse"}}}}}).empty());
}

TEST_CASE("scene description builds walls and footprints")
{
    const SceneSpec s = default_toy_scene();
    const Scene scene = s.build();
    CHECK(scene.ground);
    CHECK(scene.facets.size() == 4 * s.buildings.size());
    CHECK(s.inside_building(Vec3(-20.0, 50.0, 1.5)));
    CHECK_FALSE(s.inside_building(Vec3(0.0, 0.0, 1.5)));

    json j = scenario_to_json(default_scenario());
    j["scene"]["buildings"].push_back({{"min", {0, 0, 0}}, {"max", {1, 1, 1}}, {"reflection", 0.5}});
    CHECK(scenario_from_json(j).scene.buildings.size() == 3);
    j["scene"]["buildings"].back()["max"] = {1, 1};
    CHECK(parse_error(j).find("max") != std::string::npos);
}

TEST_CASE("loading from a file")
{
    const auto dir = std::filesystem::temp_directory_path() / "ribs_scenario_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "ok.json") << json{{"n_ue", 7}, {"seed", 99}}.dump();
        std::ofstream(dir / "broken.json") << "{\"n_ue\": 7,";
    }
    const ScenarioConfig c = load_scenario(dir / "ok.json");
    CHECK(c.n_ue == 7);
    CHECK(c.seed == 99);
    CHECK_THROWS_AS(load_scenario(dir / "broken.json"), scenario_error);
    CHECK_THROWS_AS(load_scenario(dir / "missing.json"), scenario_error);
    std::filesystem::remove_all(dir);
}
