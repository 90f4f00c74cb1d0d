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

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ribs
{
    using nlohmann::json;

    std::string to_string(ChannelMode m)
    {
        switch (m)
        {
        case ChannelMode::statistical:
            return "statistical";
        case ChannelMode::internal_rt:
            return "internal_rt";
        case ChannelMode::imported:
            return "imported";
        }
        return "?";
    }

    std::string to_string(RisMode m)
    {
        return m == RisMode::random ? "random" : "optimized";
    }

    ChannelMode channel_mode_from_string(const std::string &s)
    {
        if (s == "statistical")
            return ChannelMode::statistical;
        if (s == "internal_rt")
            return ChannelMode::internal_rt;
        if (s == "imported")
            return ChannelMode::imported;
        throw scenario_error("unknown channel_mode '" + s + "' (statistical | internal_rt | imported)");
    }

    RisMode ris_mode_from_string(const std::string &s)
    {
        if (s == "random")
            return RisMode::random;
        if (s == "optimized")
            return RisMode::optimized;
        throw scenario_error("unknown ris_mode '" + s + "' (random | optimized)");
    }

    const std::vector<std::string> &sweepable_parameters()
    {
        static const std::vector<std::string> names{"n_ris", "p_max", "precoder", "channel_mode"};
        return names;
    }

    Scene SceneSpec::build() const
    {
        Scene s;
        s.ground = ground;
        s.ground_height = ground_height;
        s.ground_reflection_coefficient = ground_reflection;
        for (const auto &b : buildings)
            add_building(s, b.min_corner, b.max_corner, b.reflection);
        s.facets.insert(s.facets.end(), facets.begin(), facets.end());
        return s;
    }

    bool SceneSpec::inside_building(const Vec3 &point) const
    {
        for (const auto &b : buildings)
            if ((point.array() >= b.min_corner.array()).all() && (point.array() <= b.max_corner.array()).all())
                return true;
        return false;
    }

    SceneSpec default_toy_scene()
    {
        SceneSpec s;
        s.buildings.push_back({Vec3(-40.0, 30.0, 0.0), Vec3(-10.0, 80.0, 25.0), concrete_reflection});
        s.buildings.push_back({Vec3(40.0, -90.0, 0.0), Vec3(80.0, -40.0, 30.0), concrete_reflection});
        return s;
    }

    OptimizerOptions ScenarioConfig::optimizer_options() const
    {
        OptimizerOptions o;
        o.p_max = p_max;
        o.scheme = precoder;
        o.nu = nu;
        o.tol = tol;
        o.mu_max = mu_max;
        o.fp_sweeps = fp_sweeps;
        return o;
    }

    ScenarioConfig default_scenario()
    {
        return ScenarioConfig{};
    }

    namespace
    {
        void require(bool ok, const std::string &field, const std::string &what)
        {
            if (!ok)
                throw scenario_error(field + ": " + what);
        }

        bool parse_positive(const std::string &text, double &out)
        {
            std::istringstream is(text);
            is >> out;
            return is && is.eof() && out > 0.0 && std::isfinite(out);
        }

        void validate_sweep(const ScenarioConfig &cfg)
        {
            const Sweep &sw = *cfg.sweep;
            const auto &names = sweepable_parameters();
            require(std::find(names.begin(), names.end(), sw.parameter) != names.end(), "sweep.parameter",
                    "'" + sw.parameter + "' cannot be swept");
            require(!sw.values.empty(), "sweep.values", "must not be empty");
            for (const auto &v : sw.values)
                (void)apply_sweep_value(cfg, sw.parameter, v);
        }
    } // namespace

    void validate(const ScenarioConfig &c)
    {
        require(c.bs_rows >= 1 && c.bs_cols >= 1, "bs_rows/bs_cols", "must be >= 1");
        require(c.ris_rows >= 1 && c.ris_cols >= 1, "ris_rows/ris_cols", "must be >= 1");
        require(c.n_ue >= 1, "n_ue", "must be >= 1");
        require(c.drops >= 1, "drops", "must be >= 1");
        require(c.realizations >= 1, "realizations", "must be >= 1");
        require(c.fp_sweeps >= 1, "fp_sweeps", "must be >= 1");
        require(c.bs_spacing_wl >= 0.5, "bs_spacing_wl", "must be at least half a wavelength");
        require(c.ris_spacing_wl >= 0.5, "ris_spacing_wl", "must be at least half a wavelength");
        require(c.carrier_hz > 0.0, "carrier_hz", "must be positive");
        require(c.bandwidth_hz > 0.0, "bandwidth_hz", "must be positive");
        require(std::isfinite(c.noise_ris_dbm) && std::isfinite(c.noise_ue_dbm), "noise_*_dbm", "must be finite");
        require(c.p_max > 0.0 && std::isfinite(c.p_max), "p_max", "must be positive");
        require(c.nu >= 0.0 && std::isfinite(c.nu), "nu", "must be non-negative");
        require(c.distance_min_wl > 0.0, "distance_min_wl", "must be positive");
        require(c.distance_max_wl >= c.distance_min_wl, "distance_max_wl", "must not be below distance_min_wl");
        require(std::isfinite(c.tilt), "tilt", "must be finite");
        require(c.region_x_min < c.region_x_max, "region", "x_min must be below x_max");
        require(c.region_y_min < c.region_y_max, "region", "y_min must be below y_max");
        require(c.random_epsilon > 0.0 && c.random_epsilon < 1.0, "random_epsilon", "must lie in (0, 1)");
        require(c.tol > 0.0 && c.tol < 1.0, "tol", "must lie in (0, 1)");
        require(c.mu_max > 0.0, "mu_max", "must be positive");
        require(c.urban.min_distance_m >= 0.0, "min_distance_m", "must be non-negative");
        require(c.urban.azimuth_spread >= 0.0 && c.urban.elevation_spread >= 0.0, "angular spreads",
                "must be non-negative");
        require(c.urban.shadowing_sigma_db >= 0.0, "shadowing_sigma_db", "must be non-negative");
        require(c.rt_max_order <= 8, "rt_max_order", "must be at most 8");

        // The farthest region corner must clear the minimum RIBS-UE distance.
        double farthest = 0.0;
        for (double x : {c.region_x_min, c.region_x_max})
            for (double y : {c.region_y_min, c.region_y_max})
                farthest = std::max(farthest, (Vec3(x, y, c.ue_height) - c.ribs_position).norm());
        require(farthest >= c.urban.min_distance_m, "min_distance_m",
                "no point of the UE region is that far from the RIBS");

        if (c.channel_mode == ChannelMode::imported)
            require(!c.channel_dump.empty(), "channel_dump", "required when channel_mode is imported");

        try
        {
            validate_scene(c.scene.build());
        }
        catch (const invalid_geometry &e)
        {
            throw scenario_error(std::string("scene: ") + e.what());
        }

        if (c.sweep)
            validate_sweep(c);
    }

    ScenarioConfig apply_sweep_value(const ScenarioConfig &cfg, const std::string &parameter,
                                     const std::string &value)
    {
        ScenarioConfig out = cfg;
        out.sweep.reset();
        if (parameter == "n_ris")
        {
            double v = 0.0;
            require(parse_positive(value, v) && v == std::floor(v), "sweep.values", "n_ris needs positive integers");
            const auto n = static_cast<std::size_t>(v);
            std::size_t rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
            while (rows > 1 && n % rows != 0)
                --rows;
            out.ris_rows = rows;
            out.ris_cols = n / rows;
        }
        else if (parameter == "p_max")
        {
            require(parse_positive(value, out.p_max), "sweep.values", "p_max needs positive numbers");
        }
        else if (parameter == "precoder")
        {
            try
            {
                out.precoder = precoder_from_string(value);
            }
            catch (const invalid_input &e)
            {
                throw scenario_error(std::string("sweep.values: ") + e.what());
            }
        }
        else if (parameter == "channel_mode")
            out.channel_mode = channel_mode_from_string(value);
        else
            throw scenario_error("sweep.parameter: '" + parameter + "' cannot be swept");
        return out;
    }

    // ------------------------------------------------------------------------
    // JSON
    // ------------------------------------------------------------------------

    namespace
    {
        // Reads keys from an object and remembers which ones were used.
        class Reader
        {
        public:
            Reader(const json &j, std::string path) : j_(j), path_(std::move(path))
            {
                if (!j_.is_object())
                    throw scenario_error(where("") + "expected an object");
            }

            template <class T>
            void get(const char *key, T &out)
            {
                used_.insert(key);
                auto it = j_.find(key);
                if (it == j_.end())
                    return;
                try
                {
                    out = it->template get<T>();
                }
                catch (const json::exception &)
                {
                    throw scenario_error(where(key) + "has the wrong type");
                }
            }

            void get_count(const char *key, std::size_t &out)
            {
                used_.insert(key);
                auto it = j_.find(key);
                if (it == j_.end())
                    return;
                if (!it->is_number_integer() || it->get<long long>() < 0)
                    throw scenario_error(where(key) + "must be a non-negative integer");
                out = it->get<std::size_t>();
            }

            void get_vec3(const char *key, Vec3 &out)
            {
                used_.insert(key);
                auto it = j_.find(key);
                if (it == j_.end())
                    return;
                out = vec3(*it, where(key));
            }

            const json *child(const char *key)
            {
                used_.insert(key);
                auto it = j_.find(key);
                return it == j_.end() ? nullptr : &*it;
            }

            void finish() const
            {
                for (auto it = j_.begin(); it != j_.end(); ++it)
                    if (!used_.count(it.key()))
                        throw scenario_error(where(it.key()) + "unknown key");
            }

            std::string where(const std::string &key) const
            {
                std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
                return p.empty() ? "" : p + ": ";
            }

            static Vec3 vec3(const json &v, const std::string &where)
            {
                if (!v.is_array() || v.size() != 3)
                    throw scenario_error(where + "expected [x, y, z]");
                Vec3 out;
                for (int i = 0; i < 3; ++i)
                {
                    if (!v[i].is_number())
                        throw scenario_error(where + "expected numbers");
                    out[i] = v[i].get<double>();
                }
                return out;
            }

        private:
            const json &j_;
            std::string path_;
            std::set<std::string> used_;
        };

        json vec3_json(const Vec3 &v) { return json::array({v.x(), v.y(), v.z()}); }

        SceneSpec scene_from_json(const json &j)
        {
            SceneSpec s;
            s.buildings.clear();
            Reader r(j, "scene");
            r.get("ground", s.ground);
            r.get("ground_height", s.ground_height);
            r.get("ground_reflection", s.ground_reflection);
            if (const json *b = r.child("buildings"))
            {
                if (!b->is_array())
                    throw scenario_error("scene.buildings: expected an array");
                for (std::size_t i = 0; i < b->size(); ++i)
                {
                    const std::string path = "scene.buildings[" + std::to_string(i) + "]";
                    Reader rb((*b)[i], path);
                    Building bl;
                    rb.get_vec3("min", bl.min_corner);
                    rb.get_vec3("max", bl.max_corner);
                    rb.get("reflection", bl.reflection);
                    rb.finish();
                    s.buildings.push_back(bl);
                }
            }
            if (const json *f = r.child("facets"))
            {
                if (!f->is_array())
                    throw scenario_error("scene.facets: expected an array");
                for (std::size_t i = 0; i < f->size(); ++i)
                {
                    const std::string path = "scene.facets[" + std::to_string(i) + "]";
                    Reader rf((*f)[i], path);
                    Facet fc;
                    const json *corners = rf.child("corners");
                    if (!corners || !corners->is_array() || corners->size() != 4)
                        throw scenario_error(path + ".corners: expected four [x, y, z] points");
                    for (std::size_t c = 0; c < 4; ++c)
                        fc.corners[c] = Reader::vec3((*corners)[c], path + ".corners: ");
                    rf.get("reflection", fc.reflection);
                    rf.finish();
                    s.facets.push_back(fc);
                }
            }
            r.finish();
            return s;
        }

        json scene_to_json(const SceneSpec &s)
        {
            json b = json::array();
            for (const auto &bl : s.buildings)
                b.push_back({{"min", vec3_json(bl.min_corner)}, {"max", vec3_json(bl.max_corner)},
                             {"reflection", bl.reflection}});
            json f = json::array();
            for (const auto &fc : s.facets)
            {
                json corners = json::array();
                for (const auto &c : fc.corners)
                    corners.push_back(vec3_json(c));
                f.push_back({{"corners", corners}, {"reflection", fc.reflection}});
            }
            return {{"ground", s.ground},
                    {"ground_height", s.ground_height},
                    {"ground_reflection", s.ground_reflection},
                    {"buildings", b},
                    {"facets", f}};
        }

        std::string scalar_text(const json &v, const std::string &where)
        {
            if (v.is_string())
                return v.get<std::string>();
            if (v.is_number())
                return v.dump();
            throw scenario_error(where + "sweep values must be numbers or strings");
        }
    } // namespace

    ScenarioConfig scenario_from_json(const json &j)
    {
        ScenarioConfig c;
        Reader r(j, "");
        r.get_count("bs_rows", c.bs_rows);
        r.get_count("bs_cols", c.bs_cols);
        r.get_count("ris_rows", c.ris_rows);
        r.get_count("ris_cols", c.ris_cols);
        r.get("bs_spacing_wl", c.bs_spacing_wl);
        r.get("ris_spacing_wl", c.ris_spacing_wl);
        r.get_count("n_ue", c.n_ue);
        r.get("carrier_hz", c.carrier_hz);
        r.get("bandwidth_hz", c.bandwidth_hz);
        r.get("noise_ris_dbm", c.noise_ris_dbm);
        r.get("noise_ue_dbm", c.noise_ue_dbm);
        r.get("p_max", c.p_max);
        r.get("nu", c.nu);
        r.get("distance_min_wl", c.distance_min_wl);
        r.get("distance_max_wl", c.distance_max_wl);
        r.get("tilt", c.tilt);
        r.get_vec3("ribs_position", c.ribs_position);
        r.get("ue_height", c.ue_height);
        if (const json *reg = r.child("region"))
        {
            if (!reg->is_array() || reg->size() != 4 ||
                !std::all_of(reg->begin(), reg->end(), [](const json &v) { return v.is_number(); }))
                throw scenario_error("region: expected [x_min, y_min, x_max, y_max]");
            c.region_x_min = (*reg)[0].get<double>();
            c.region_y_min = (*reg)[1].get<double>();
            c.region_x_max = (*reg)[2].get<double>();
            c.region_y_max = (*reg)[3].get<double>();
        }
        r.get("min_distance_m", c.urban.min_distance_m);
        r.get("shadowing_sigma_db", c.urban.shadowing_sigma_db);
        double az_deg = c.urban.azimuth_spread * 180.0 / pi, el_deg = c.urban.elevation_spread * 180.0 / pi;
        r.get("azimuth_spread_deg", az_deg);
        r.get("elevation_spread_deg", el_deg);
        c.urban.azimuth_spread = az_deg * pi / 180.0;
        c.urban.elevation_spread = el_deg * pi / 180.0;
        r.get_count("specular_components", c.urban.specular_components);
        r.get("nlos_keeps_specular", c.urban.nlos_keeps_specular);

        std::string text;
        text = to_string(c.channel_mode);
        r.get("channel_mode", text);
        c.channel_mode = channel_mode_from_string(text);
        text = to_string(c.precoder);
        r.get("precoder", text);
        try
        {
            c.precoder = precoder_from_string(text);
        }
        catch (const invalid_input &e)
        {
            throw scenario_error(std::string("precoder: ") + e.what());
        }
        text = to_string(c.ris_mode);
        r.get("ris_mode", text);
        c.ris_mode = ris_mode_from_string(text);

        r.get("random_epsilon", c.random_epsilon);
        r.get("tol", c.tol);
        r.get("mu_max", c.mu_max);
        r.get_count("fp_sweeps", c.fp_sweeps);
        if (const json *s = r.child("seed"))
        {
            if (!s->is_number_unsigned())
                throw scenario_error("seed: must be an unsigned integer");
            c.seed = s->get<std::uint64_t>();
        }
        r.get_count("drops", c.drops);
        r.get_count("realizations", c.realizations);
        if (const json *s = r.child("scene"))
            c.scene = scene_from_json(*s);
        r.get_count("rt_max_order", c.rt_max_order);
        r.get("subcarrier_offset_hz", c.subcarrier_offset_hz);
        r.get("channel_dump", c.channel_dump);
        if (const json *sw = r.child("sweep"))
        {
            if (!sw->is_null())
            {
                Reader rs(*sw, "sweep");
                Sweep s;
                rs.get("parameter", s.parameter);
                const json *values = rs.child("values");
                if (!values || !values->is_array())
                    throw scenario_error("sweep.values: expected an array");
                for (const auto &v : *values)
                    s.values.push_back(scalar_text(v, "sweep.values: "));
                rs.finish();
                c.sweep = s;
            }
        }
        r.finish();
        validate(c);
        return c;
    }

    json scenario_to_json(const ScenarioConfig &c)
    {
        json j;
        j["bs_rows"] = c.bs_rows;
        j["bs_cols"] = c.bs_cols;
        j["ris_rows"] = c.ris_rows;
        j["ris_cols"] = c.ris_cols;
        j["bs_spacing_wl"] = c.bs_spacing_wl;
        j["ris_spacing_wl"] = c.ris_spacing_wl;
        j["n_ue"] = c.n_ue;
        j["carrier_hz"] = c.carrier_hz;
        j["bandwidth_hz"] = c.bandwidth_hz;
        j["noise_ris_dbm"] = c.noise_ris_dbm;
        j["noise_ue_dbm"] = c.noise_ue_dbm;
        j["p_max"] = c.p_max;
        j["nu"] = c.nu;
        j["distance_min_wl"] = c.distance_min_wl;
        j["distance_max_wl"] = c.distance_max_wl;
        j["tilt"] = c.tilt;
        j["ribs_position"] = vec3_json(c.ribs_position);
        j["ue_height"] = c.ue_height;
        j["region"] = json::array({c.region_x_min, c.region_y_min, c.region_x_max, c.region_y_max});
        j["min_distance_m"] = c.urban.min_distance_m;
        j["shadowing_sigma_db"] = c.urban.shadowing_sigma_db;
        j["azimuth_spread_deg"] = c.urban.azimuth_spread * 180.0 / pi;
        j["elevation_spread_deg"] = c.urban.elevation_spread * 180.0 / pi;
        j["specular_components"] = c.urban.specular_components;
        j["nlos_keeps_specular"] = c.urban.nlos_keeps_specular;
        j["channel_mode"] = to_string(c.channel_mode);
        j["precoder"] = to_string(c.precoder);
        j["ris_mode"] = to_string(c.ris_mode);
        j["random_epsilon"] = c.random_epsilon;
        j["tol"] = c.tol;
        j["mu_max"] = c.mu_max;
        j["fp_sweeps"] = c.fp_sweeps;
        j["seed"] = c.seed;
        j["drops"] = c.drops;
        j["realizations"] = c.realizations;
        j["scene"] = scene_to_json(c.scene);
        j["rt_max_order"] = c.rt_max_order;
        j["subcarrier_offset_hz"] = c.subcarrier_offset_hz;
        j["channel_dump"] = c.channel_dump;
        if (c.sweep)
            j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
        else
            j["sweep"] = nullptr;
        return j;
    }

    ScenarioConfig load_scenario(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw scenario_error("cannot open scenario file " + path.string());
        json j;
        try
        {
            j = json::parse(in);
        }
        catch (const json::parse_error &e)
        {
            throw scenario_error(path.string() + ": " + e.what());
        }
        return scenario_from_json(j);
    }

} // namespace ribs
