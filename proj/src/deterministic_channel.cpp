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

#include "ribs/deterministic_channel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ribs
{
    namespace
    {
        constexpr double geom_tol = 1e-9;

        struct Reflector
        {
            Vec3 point;
            Vec3 normal;
            double gamma = 0.0;
            int facet = -1; // -1: ground plane
        };

        Vec3 mirror(const Vec3 &p, const Reflector &r)
        {
            return p - 2.0 * (p - r.point).dot(r.normal) * r.normal;
        }

        // Parametric position (u, v) of q on the facet parallelogram spanned at corner 0.
        bool inside_facet(const Facet &f, const Vec3 &q)
        {
            const Vec3 e1 = f.corners[1] - f.corners[0];
            const Vec3 e2 = f.corners[3] - f.corners[0];
            const Vec3 d = q - f.corners[0];
            const double u = d.dot(e1) / e1.squaredNorm();
            const double v = d.dot(e2) / e2.squaredNorm();
            const double tu = geom_tol / e1.norm(), tv = geom_tol / e2.norm();
            return u >= -tu && u <= 1.0 + tu && v >= -tv && v <= 1.0 + tv;
        }

        // True if the open segment a-b crosses facet f.
        bool blocks(const Facet &f, const Vec3 &n, const Vec3 &a, const Vec3 &b)
        {
            const double da = (a - f.corners[0]).dot(n);
            const double db = (b - f.corners[0]).dot(n);
            if (std::abs(da) <= geom_tol || std::abs(db) <= geom_tol || da * db > 0.0)
                return false;
            const Vec3 q = a + (da / (da - db)) * (b - a);
            return inside_facet(f, q);
        }

        bool leg_visible(const Scene &scene, const std::vector<Vec3> &normals, const Vec3 &a,
                         const Vec3 &b)
        {
            for (std::size_t i = 0; i < scene.facets.size(); ++i)
                if (blocks(scene.facets[i], normals[i], a, b))
                    return false;
            if (scene.ground)
            {
                const double za = a.z() - scene.ground_height, zb = b.z() - scene.ground_height;
                if ((za < -geom_tol) || (zb < -geom_tol))
                    return false;
            }
            return true;
        }

        struct Tracer
        {
            const Scene &scene;
            const std::vector<Reflector> &reflectors;
            const std::vector<Vec3> &normals;
            Vec3 tx, rx;
            double wavelength;
            std::vector<RayPath> *out;

            // Back-trace the image chain for sequence seq; images[i] is the image of tx after
            // reflections seq[0..i].
            void try_sequence(const std::vector<int> &seq, const std::vector<Vec3> &images) const
            {
                const std::size_t m = seq.size();
                std::vector<Vec3> pts(m + 2);
                pts[0] = tx;
                pts[m + 1] = rx;
                Vec3 target = rx;
                for (std::size_t ii = m; ii-- > 0;)
                {
                    const Reflector &r = reflectors[static_cast<std::size_t>(seq[ii])];
                    const Vec3 &img = images[ii];
                    const double dt = (target - r.point).dot(r.normal);
                    const double di = (img - r.point).dot(r.normal);
                    if (std::abs(dt) <= geom_tol || std::abs(di) <= geom_tol || dt * di > 0.0)
                        return;
                    const Vec3 q = target + (dt / (dt - di)) * (img - target);
                    if (r.facet >= 0 && !inside_facet(scene.facets[static_cast<std::size_t>(r.facet)], q))
                        return;
                    pts[ii + 1] = q;
                    target = q;
                }
                for (std::size_t i = 0; i + 1 < pts.size(); ++i)
                    if (!leg_visible(scene, normals, pts[i], pts[i + 1]))
                        return;

                const double length = (m == 0) ? (rx - tx).norm() : (rx - images[m - 1]).norm();
                double gamma = 1.0;
                std::vector<int> ids;
                for (int s : seq)
                {
                    gamma *= reflectors[static_cast<std::size_t>(s)].gamma;
                    ids.push_back(reflectors[static_cast<std::size_t>(s)].facet);
                }
                RayPath p;
                p.gain = gamma * std::polar(wavelength / (4.0 * pi * length), -2.0 * pi * length / wavelength);
                p.delay = length / speed_of_light;
                p.order = m;
                p.vertices = std::move(pts);
                p.reflectors = std::move(ids);
                out->push_back(std::move(p));
            }

            void recurse(std::vector<int> &seq, std::vector<Vec3> &images, std::size_t max_order) const
            {
                try_sequence(seq, images);
                if (seq.size() == max_order)
                    return;
                const Vec3 &src = images.empty() ? tx : images.back();
                for (std::size_t r = 0; r < reflectors.size(); ++r)
                {
                    if (!seq.empty() && seq.back() == static_cast<int>(r))
                        continue;
                    // The source image must not lie on the mirror plane.
                    if (std::abs((src - reflectors[r].point).dot(reflectors[r].normal)) <= geom_tol)
                        continue;
                    seq.push_back(static_cast<int>(r));
                    images.push_back(mirror(src, reflectors[r]));
                    recurse(seq, images, max_order);
                    seq.pop_back();
                    images.pop_back();
                }
            }
        };

        bool vertex_less(const RayPath &a, const RayPath &b)
        {
            if (a.delay != b.delay)
                return a.delay < b.delay;
            const std::size_t n = std::min(a.vertices.size(), b.vertices.size());
            for (std::size_t i = 0; i < n; ++i)
                for (int c = 0; c < 3; ++c)
                    if (a.vertices[i][c] != b.vertices[i][c])
                        return a.vertices[i][c] < b.vertices[i][c];
            return a.vertices.size() < b.vertices.size();
        }
    } // namespace

    Vec3 Facet::normal() const
    {
        return (corners[1] - corners[0]).cross(corners[3] - corners[0]).normalized();
    }

    void validate_scene(const Scene &scene)
    {
        for (std::size_t i = 0; i < scene.facets.size(); ++i)
        {
            const Facet &f = scene.facets[i];
            const std::string id = "facet " + std::to_string(i);
            const Vec3 e1 = f.corners[1] - f.corners[0];
            const Vec3 e2 = f.corners[3] - f.corners[0];
            const Vec3 c = e1.cross(e2);
            if (e1.norm() <= geom_tol || e2.norm() <= geom_tol || c.norm() <= geom_tol * (e1.norm() + e2.norm()))
                throw invalid_geometry(id + " is degenerate");
            const Vec3 n = c.normalized();
            for (const Vec3 &p : f.corners)
                if (std::abs((p - f.corners[0]).dot(n)) > geom_tol)
                    throw invalid_geometry(id + " corners are not coplanar");
            if ((f.corners[2] - (f.corners[1] + e2)).norm() > geom_tol)
                throw invalid_geometry(id + " is not a parallelogram");
            if (!(std::abs(f.reflection) <= 1.0))
                throw invalid_geometry(id + " has |reflection| > 1");
        }
        if (scene.ground && !(std::abs(scene.ground_reflection_coefficient) <= 1.0))
            throw invalid_geometry("ground has |reflection| > 1");
    }

    void add_building(Scene &scene, const Vec3 &lo, const Vec3 &hi, double reflection)
    {
        const double z0 = lo.z(), z1 = hi.z();
        auto wall = [&](double x0, double y0, double x1, double y1)
        {
            Facet f;
            f.corners = {Vec3(x0, y0, z0), Vec3(x1, y1, z0), Vec3(x1, y1, z1), Vec3(x0, y0, z1)};
            f.reflection = reflection;
            scene.facets.push_back(f);
        };
        wall(lo.x(), lo.y(), hi.x(), lo.y());
        wall(hi.x(), lo.y(), hi.x(), hi.y());
        wall(hi.x(), hi.y(), lo.x(), hi.y());
        wall(lo.x(), hi.y(), lo.x(), lo.y());
    }

    std::vector<RayPath> trace_paths(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                     std::size_t max_order, double wavelength)
    {
        if ((tx - rx).norm() <= geom_tol)
            throw invalid_input("transmitter and receiver coincide");
        validate_scene(scene);

        std::vector<Reflector> reflectors;
        std::vector<Vec3> normals;
        for (std::size_t i = 0; i < scene.facets.size(); ++i)
        {
            const Vec3 n = scene.facets[i].normal();
            normals.push_back(n);
            reflectors.push_back({scene.facets[i].corners[0], n, scene.facets[i].reflection, static_cast<int>(i)});
        }
        if (scene.ground)
            reflectors.push_back({Vec3(0.0, 0.0, scene.ground_height), Vec3::UnitZ(),
                                  scene.ground_reflection_coefficient, -1});

        std::vector<RayPath> paths;
        Tracer t{scene, reflectors, normals, tx, rx, wavelength, &paths};
        std::vector<int> seq;
        std::vector<Vec3> images;
        t.recurse(seq, images, max_order);
        std::sort(paths.begin(), paths.end(), vertex_less);
        return paths;
    }

    std::vector<Tap> impulse_response(const std::vector<RayPath> &paths)
    {
        std::vector<Tap> taps;
        taps.reserve(paths.size());
        for (const auto &p : paths)
            taps.push_back({p.gain, p.delay});
        std::stable_sort(taps.begin(), taps.end(), [](const Tap &a, const Tap &b)
                         { return a.delay < b.delay; });

        std::vector<Tap> merged;
        for (const Tap &t : taps)
        {
            if (!merged.empty() && std::abs(t.delay - merged.back().delay) < delay_merge_tolerance)
                merged.back().gain += t.gain;
            else
                merged.push_back(t);
        }
        return merged;
    }

    cx frequency_response(const std::vector<RayPath> &paths, double f)
    {
        cx h(0.0);
        for (const auto &p : paths)
            h += p.gain * std::polar(1.0, -2.0 * pi * f * p.delay);
        return h;
    }

    cx frequency_response(const std::vector<Tap> &taps, double f)
    {
        cx h(0.0);
        for (const auto &t : taps)
            h += t.gain * std::polar(1.0, -2.0 * pi * f * t.delay);
        return h;
    }

    CMat build_ris_ue_channels(const Scene &scene, const ArrayGeometry &ris,
                               const std::vector<Vec3> &ue_positions, double wavelength,
                               std::size_t max_order, double subcarrier_offset_hz)
    {
        CMat h(static_cast<Eigen::Index>(ris.size()), static_cast<Eigen::Index>(ue_positions.size()));
        for (std::size_t k = 0; k < ue_positions.size(); ++k)
            for (std::size_t l = 0; l < ris.size(); ++l)
            {
                const auto paths = trace_paths(scene, ris.element_positions[l], ue_positions[k], max_order, wavelength);
                h(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
                    frequency_response(paths, subcarrier_offset_hz);
            }
        return h;
    }

    std::string to_string(Provenance p)
    {
        switch (p)
        {
        case Provenance::statistical:
            return "statistical";
        case Provenance::ray_traced:
            return "ray-traced";
        case Provenance::imported:
            return "imported";
        }
        return "unknown";
    }

    // ------------------------------------------------------------------------
    // Dump I/O
    // ------------------------------------------------------------------------

    std::string geometry_hash(const ArrayGeometry &array)
    {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](double v)
        {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            for (int i = 0; i < 8; ++i)
            {
                h ^= (bits >> (8 * i)) & 0xffu;
                h *= 1099511628211ull;
            }
        };
        for (const Vec3 &p : array.element_positions)
            for (int c = 0; c < 3; ++c)
                mix(p[c]);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    namespace
    {
        void put_number(std::string &s, double v, const char *field)
        {
            if (!std::isfinite(v))
                throw import_error(std::string("refusing to serialize non-finite value in ") + field);
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            s += buf;
        }

        void put_string(std::string &s, const std::string &v)
        {
            s += nlohmann::json(v).dump();
        }

        const nlohmann::json &require(const nlohmann::json &obj, const char *key, const std::string &where)
        {
            if (!obj.is_object() || !obj.contains(key))
                throw import_error(where + ": missing field '" + key + "'");
            return obj.at(key);
        }

        double finite_number(const nlohmann::json &v, const std::string &where)
        {
            if (!v.is_number())
                throw import_error(where + ": expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d))
                throw import_error(where + ": non-finite value");
            return d;
        }

        std::size_t count(const nlohmann::json &v, const std::string &where)
        {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                throw import_error(where + ": expected a non-negative integer");
            return v.get<std::size_t>();
        }
    } // namespace

    std::string serialize_channel_dump(const ChannelDump &d)
    {
        std::string s;
        s += "{\"header\":{\"format_version\":" + std::to_string(channel_dump_format_version);
        s += ",\"carrier_hz\":";
        put_number(s, d.carrier_hz, "header.carrier_hz");
        s += ",\"n_ris\":" + std::to_string(d.n_ris);
        s += ",\"n_ue\":" + std::to_string(d.n_ue);
        s += ",\"mode\":";
        s += d.ray_mode() ? "\"rays\"" : "\"freq\"";
        s += ",\"provenance\":";
        put_string(s, d.provenance);
        if (!d.geometry_hash.empty())
        {
            s += ",\"geometry_hash\":";
            put_string(s, d.geometry_hash);
        }
        s += "},\n";

        if (!d.ray_mode())
        {
            const CMat &h = *d.h;
            if (static_cast<std::size_t>(h.rows()) != d.n_ris || static_cast<std::size_t>(h.cols()) != d.n_ue)
                throw import_error("h: matrix shape does not match header");
            s += "\"h\":[";
            for (Eigen::Index k = 0; k < h.cols(); ++k)
            {
                s += (k ? ",\n[" : "\n[");
                for (Eigen::Index l = 0; l < h.rows(); ++l)
                {
                    s += (l ? ",[" : "[");
                    put_number(s, h(l, k).real(), "h");
                    s += ',';
                    put_number(s, h(l, k).imag(), "h");
                    s += ']';
                }
                s += ']';
            }
            s += "]}\n";
        }
        else
        {
            if (d.rays.size() != d.n_ue)
                throw import_error("rays: outer length does not match n_ue");
            s += "\"rays\":[";
            for (std::size_t k = 0; k < d.rays.size(); ++k)
            {
                if (d.rays[k].size() != d.n_ris)
                    throw import_error("rays[" + std::to_string(k) + "]: length does not match n_ris");
                s += (k ? ",\n[" : "\n[");
                for (std::size_t l = 0; l < d.rays[k].size(); ++l)
                {
                    s += (l ? ",[" : "[");
                    for (std::size_t r = 0; r < d.rays[k][l].size(); ++r)
                    {
                        const DumpRay &ray = d.rays[k][l][r];
                        s += (r ? ",{\"re\":" : "{\"re\":");
                        put_number(s, ray.gain.real(), "rays.re");
                        s += ",\"im\":";
                        put_number(s, ray.gain.imag(), "rays.im");
                        s += ",\"tau_s\":";
                        put_number(s, ray.tau_s, "rays.tau_s");
                        s += '}';
                    }
                    s += ']';
                }
                s += ']';
            }
            s += "]}\n";
        }
        return s;
    }

    ChannelDump parse_channel_dump(const std::string &text)
    {
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw import_error(std::string("malformed JSON: ") + e.what());
        }

        const auto &hdr = require(j, "header", "dump");
        const auto version = count(require(hdr, "format_version", "header"), "header.format_version");
        if (version != static_cast<std::size_t>(channel_dump_format_version))
            throw import_error("header.format_version: unsupported version " + std::to_string(version));

        ChannelDump d;
        d.carrier_hz = finite_number(require(hdr, "carrier_hz", "header"), "header.carrier_hz");
        if (!(d.carrier_hz > 0.0))
            throw import_error("header.carrier_hz: must be positive");
        d.n_ris = count(require(hdr, "n_ris", "header"), "header.n_ris");
        d.n_ue = count(require(hdr, "n_ue", "header"), "header.n_ue");
        const auto &mode = require(hdr, "mode", "header");
        if (!mode.is_string() || (mode != "rays" && mode != "freq"))
            throw import_error("header.mode: expected \"rays\" or \"freq\"");
        const auto &prov = require(hdr, "provenance", "header");
        if (!prov.is_string())
            throw import_error("header.provenance: expected a string");
        d.provenance = prov.get<std::string>();
        if (hdr.contains("geometry_hash"))
        {
            if (!hdr["geometry_hash"].is_string())
                throw import_error("header.geometry_hash: expected a string");
            d.geometry_hash = hdr["geometry_hash"].get<std::string>();
        }

        if (mode == "freq")
        {
            const auto &h = require(j, "h", "dump");
            if (!h.is_array() || h.size() != d.n_ue)
                throw import_error("h: expected " + std::to_string(d.n_ue) + " UE rows (n_ue)");
            CMat m(static_cast<Eigen::Index>(d.n_ris), static_cast<Eigen::Index>(d.n_ue));
            for (std::size_t k = 0; k < d.n_ue; ++k)
            {
                const std::string wk = "h[" + std::to_string(k) + "]";
                if (!h[k].is_array() || h[k].size() != d.n_ris)
                    throw import_error(wk + ": expected " + std::to_string(d.n_ris) + " entries (n_ris)");
                for (std::size_t l = 0; l < d.n_ris; ++l)
                {
                    const std::string wl = wk + "[" + std::to_string(l) + "]";
                    const auto &e = h[k][l];
                    if (!e.is_array() || e.size() != 2)
                        throw import_error(wl + ": expected an [re, im] pair");
                    m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) =
                        cx(finite_number(e[0], wl + ".re"), finite_number(e[1], wl + ".im"));
                }
            }
            d.h = std::move(m);
        }
        else
        {
            const auto &rays = require(j, "rays", "dump");
            if (!rays.is_array() || rays.size() != d.n_ue)
                throw import_error("rays: expected " + std::to_string(d.n_ue) + " UE rows (n_ue)");
            d.rays.resize(d.n_ue);
            for (std::size_t k = 0; k < d.n_ue; ++k)
            {
                const std::string wk = "rays[" + std::to_string(k) + "]";
                if (!rays[k].is_array() || rays[k].size() != d.n_ris)
                    throw import_error(wk + ": expected " + std::to_string(d.n_ris) + " entries (n_ris)");
                d.rays[k].resize(d.n_ris);
                for (std::size_t l = 0; l < d.n_ris; ++l)
                {
                    const std::string wl = wk + "[" + std::to_string(l) + "]";
                    if (!rays[k][l].is_array())
                        throw import_error(wl + ": expected a list of rays");
                    for (std::size_t r = 0; r < rays[k][l].size(); ++r)
                    {
                        const std::string wr = wl + "[" + std::to_string(r) + "]";
                        const auto &ray = rays[k][l][r];
                        DumpRay out;
                        out.gain = cx(finite_number(require(ray, "re", wr), wr + ".re"),
                                      finite_number(require(ray, "im", wr), wr + ".im"));
                        out.tau_s = finite_number(require(ray, "tau_s", wr), wr + ".tau_s");
                        d.rays[k][l].push_back(out);
                    }
                }
            }
        }
        return d;
    }

    void save_channel_dump(const std::filesystem::path &path, const ChannelDump &dump)
    {
        const std::string text = serialize_channel_dump(dump);
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw import_error("cannot open " + path.string() + " for writing");
        f << text;
        if (!f)
            throw import_error("failed writing " + path.string());
    }

    ChannelDump read_channel_dump(const std::filesystem::path &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw import_error("cannot open " + path.string());
        std::stringstream ss;
        ss << f.rdbuf();
        return parse_channel_dump(ss.str());
    }

    ChannelSet to_channel_set(const ChannelDump &dump)
    {
        ChannelSet set;
        set.provenance = Provenance::imported;
        set.carrier_hz = dump.carrier_hz;
        set.source = dump.provenance;
        if (!dump.ray_mode())
        {
            set.h = *dump.h;
            return set;
        }
        set.h.resize(static_cast<Eigen::Index>(dump.n_ris), static_cast<Eigen::Index>(dump.n_ue));
        for (std::size_t k = 0; k < dump.n_ue; ++k)
            for (std::size_t l = 0; l < dump.n_ris; ++l)
            {
                std::vector<Tap> taps;
                for (const auto &r : dump.rays[k][l])
                    taps.push_back({r.gain, r.tau_s});
                set.h(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = frequency_response(taps, 0.0);
            }
        return set;
    }

    ChannelSet load_channel_dump(const std::filesystem::path &path)
    {
        return to_channel_set(read_channel_dump(path));
    }

    ChannelDump make_freq_dump(const ChannelSet &set)
    {
        ChannelDump d;
        d.carrier_hz = set.carrier_hz;
        d.n_ris = static_cast<std::size_t>(set.h.rows());
        d.n_ue = static_cast<std::size_t>(set.h.cols());
        d.provenance = set.source.empty() ? to_string(set.provenance) : set.source;
        d.h = set.h;
        return d;
    }

} // namespace ribs
