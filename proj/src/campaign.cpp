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

#include "ribs/campaign.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace ribs
{
    using nlohmann::json;

    std::uint64_t drop_seed(std::uint64_t campaign_seed, std::size_t index)
    {
        std::uint64_t z = campaign_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(index) + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    rng_t stream_rng(std::uint64_t seed, Stream stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream)};
        return rng_t(seq);
    }

    DropGeometry place_drop(const ScenarioConfig &cfg, std::uint64_t seed)
    {
        rng_t rng = stream_rng(seed, Stream::placement);
        const double lambda = cfg.wavelength();

        DropGeometry g;
        std::uniform_real_distribution<double> dist(cfg.distance_min_wl * lambda, cfg.distance_max_wl * lambda);
        g.distance = dist(rng);

        g.ris = build_planar_array(cfg.ris_rows, cfg.ris_cols, cfg.ris_spacing_wl * lambda, cfg.ribs_position, 0.0);
        g.bs = build_planar_array(cfg.bs_rows, cfg.bs_cols, cfg.bs_spacing_wl * lambda,
                                  cfg.ribs_position + g.distance * g.ris.normal, cfg.tilt);
        require_min_spacing(g.ris, lambda);
        require_min_spacing(g.bs, lambda);
        g.H = near_field_channel(g.bs, g.ris, lambda).entries;

        std::uniform_real_distribution<double> ux(cfg.region_x_min, cfg.region_x_max);
        std::uniform_real_distribution<double> uy(cfg.region_y_min, cfg.region_y_max);
        const Scene scene = cfg.scene.build();
        const bool has_scene = scene.ground || !scene.facets.empty();
        const std::size_t max_tries = 10000 * cfg.n_ue;
        std::size_t tries = 0;
        while (g.ue_positions.size() < cfg.n_ue)
        {
            if (++tries > max_tries)
                throw scenario_error("could not place UEs: region too close to the RIBS or blocked by buildings");
            const double x = ux(rng);
            const double y = uy(rng);
            const Vec3 ue(x, y, cfg.ue_height);
            if ((ue - cfg.ribs_position).norm() < cfg.urban.min_distance_m || cfg.scene.inside_building(ue))
                continue;
            // Coverage holes of the scene are not served, whatever the channel mode.
            if (has_scene && trace_paths(scene, g.ris.center, ue, cfg.rt_max_order, lambda).empty())
                continue;
            g.ue_positions.push_back(ue);
        }
        return g;
    }

    std::vector<LinkState> drop_links(const ScenarioConfig &cfg, const DropGeometry &geo, std::uint64_t seed,
                                      const ChannelSet *imported)
    {
        const double lambda = cfg.wavelength();
        const auto K = static_cast<Eigen::Index>(cfg.n_ue);

        LinkState base;
        base.H = geo.H;
        base.sigma_ris2 = cfg.noise_ris_w();
        base.sigma_ue2 = RVec::Constant(K, cfg.noise_ue_w());

        std::vector<LinkState> links;
        switch (cfg.channel_mode)
        {
        case ChannelMode::statistical:
        {
            rng_t ls_rng = stream_rng(seed, Stream::large_scale);
            rng_t fading = stream_rng(seed, Stream::fading);
            std::vector<LargeScaleParams> ls;
            std::vector<CorrelationMatrix> corr;
            for (const auto &ue : geo.ue_positions)
            {
                ls.push_back(large_scale_model(cfg.urban, geo.ris, ue, ls_rng));
                corr.push_back(local_scattering_correlation(geo.ris, ls.back().scattering_mean.azimuth,
                                                            ls.back().scattering_mean.elevation,
                                                            cfg.urban.azimuth_spread, cfg.urban.elevation_spread,
                                                            lambda));
            }
            for (std::size_t r = 0; r < cfg.realizations; ++r)
            {
                LinkState link = base;
                link.h.resize(static_cast<Eigen::Index>(geo.ris.size()), K);
                for (Eigen::Index k = 0; k < K; ++k)
                    link.h.col(k) = draw_channel(ls[static_cast<std::size_t>(k)], corr[static_cast<std::size_t>(k)],
                                                 geo.ris, lambda, fading);
                links.push_back(std::move(link));
            }
            break;
        }
        case ChannelMode::internal_rt:
        {
            LinkState link = base;
            link.h = build_ris_ue_channels(cfg.scene.build(), geo.ris, geo.ue_positions, lambda, cfg.rt_max_order,
                                           cfg.subcarrier_offset_hz);
            links.push_back(std::move(link));
            break;
        }
        case ChannelMode::imported:
        {
            if (!imported)
                throw scenario_error("imported channel mode needs a loaded channel dump");
            if (imported->h.rows() != static_cast<Eigen::Index>(geo.ris.size()) || imported->h.cols() != K)
                throw scenario_error("channel dump is " + std::to_string(imported->h.rows()) + " x " +
                                     std::to_string(imported->h.cols()) + " but the scenario needs " +
                                     std::to_string(geo.ris.size()) + " x " + std::to_string(K));
            LinkState link = base;
            link.h = imported->h;
            links.push_back(std::move(link));
            break;
        }
        }
        return links;
    }

    DropRecord run_drop(const ScenarioConfig &cfg, std::size_t index, std::uint64_t seed, const ChannelSet *imported)
    {
        DropRecord rec;
        rec.index = index;
        rec.seed = seed;
        try
        {
            const DropGeometry geo = place_drop(cfg, seed);
            rec.distance = geo.distance;
            rec.ue_positions = geo.ue_positions;

            const std::vector<LinkState> links = drop_links(cfg, geo, seed, imported);
            const OptimizerOptions opt = cfg.optimizer_options();
            rng_t opt_rng = stream_rng(seed, Stream::optimizer);
            rng_t base_rng = stream_rng(seed, Stream::baseline);

            double se_r = 0.0, se_o = 0.0, eps = 0.0;
            for (std::size_t r = 0; r < links.size(); ++r)
            {
                const LinkState &link = links[r];
                const CVec p_rand = random_reflection(link, cfg.random_epsilon, opt, base_rng, opt.init_fill);
                const double random_se = evaluate_configuration(link, p_rand, cfg.random_epsilon, opt).sum_se;
                se_r += random_se;
                if (cfg.ris_mode == RisMode::optimized)
                {
                    OptimizeResult res = optimize(link, opt, opt_rng);
                    se_o += res.sum_se;
                    eps += res.epsilon;
                    rec.epsilon_per_realization.push_back(res.epsilon);
                    rec.boundary_hits += res.boundary_hits;
                    rec.rescales += res.rescales;
                    if (r == 0)
                        rec.trace = std::move(res.trace);
                }
                else
                {
                    se_o += random_se;
                    eps += cfg.random_epsilon;
                    rec.epsilon_per_realization.push_back(cfg.random_epsilon);
                }
            }
            const auto n = static_cast<double>(links.size());
            rec.realizations = links.size();
            rec.se_random = se_r / n;
            rec.se_optimized = se_o / n;
            rec.epsilon_opt = eps / n;
        }
        catch (const error &e)
        {
            rec.ok = false;
            rec.failure = e.what();
        }
        return rec;
    }

    CdfCurve empirical_cdf(const std::vector<double> &optimized, const std::vector<double> &random,
                           std::size_t points)
    {
        CdfCurve c;
        if (optimized.empty() && random.empty())
            return c;
        points = std::max<std::size_t>(points, 2);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto *v : {&optimized, &random})
            for (double x : *v)
            {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        if (!(hi > lo))
            hi = lo + 1.0;

        auto sorted = [](std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            return v;
        };
        const std::vector<double> so = sorted(optimized), sr = sorted(random);
        auto cdf_at = [](const std::vector<double> &s, double x)
        {
            if (s.empty())
                return 0.0;
            const auto n = std::upper_bound(s.begin(), s.end(), x) - s.begin();
            return static_cast<double>(n) / static_cast<double>(s.size());
        };

        for (std::size_t i = 0; i < points; ++i)
        {
            // The last grid point is hi exactly so both curves end at 1.
            const double x = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
            c.x.push_back(x);
            c.optimized.push_back(cdf_at(so, x));
            c.random.push_back(cdf_at(sr, x));
        }
        return c;
    }

    namespace
    {
        void mean_stderr(const std::vector<double> &v, double &mean, double &se)
        {
            mean = se = 0.0;
            if (v.empty())
                return;
            for (double x : v)
                mean += x;
            mean /= static_cast<double>(v.size());
            if (v.size() < 2)
                return;
            double ss = 0.0;
            for (double x : v)
                ss += (x - mean) * (x - mean);
            se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        }

        double median(std::vector<double> v)
        {
            if (v.empty())
                return 0.0;
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }

        std::vector<double> column(const std::vector<DropRecord> &drops, double DropRecord::*field)
        {
            std::vector<double> out;
            for (const auto &d : drops)
                if (d.ok)
                    out.push_back(d.*field);
            return out;
        }
    } // namespace

    PointSummary summarize(const std::vector<DropRecord> &drops)
    {
        PointSummary s;
        std::vector<double> gains;
        std::size_t ge = 0, above = 0;
        double eps = 0.0;
        for (const auto &d : drops)
        {
            if (!d.ok)
            {
                ++s.failures;
                continue;
            }
            ++s.successes;
            if (d.se_random > 0.0)
                gains.push_back(d.se_optimized / d.se_random);
            ge += d.se_optimized >= d.se_random;
            above += d.epsilon_opt > 0.5;
            eps += d.epsilon_opt;
        }
        mean_stderr(column(drops, &DropRecord::se_optimized), s.mean_optimized, s.stderr_optimized);
        mean_stderr(column(drops, &DropRecord::se_random), s.mean_random, s.stderr_random);
        s.median_gain = median(gains);
        if (s.successes)
        {
            const auto n = static_cast<double>(s.successes);
            s.fraction_optimized_ge_random = static_cast<double>(ge) / n;
            s.fraction_epsilon_above_half = static_cast<double>(above) / n;
            s.mean_epsilon = eps / n;
        }
        return s;
    }

    namespace
    {
        std::string utc_timestamp()
        {
            const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            std::tm tm{};
            gmtime_r(&t, &tm);
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
            return buf;
        }

        void finish_point(SweepPoint &pt)
        {
            pt.summary = summarize(pt.drops);
            pt.cdf = empirical_cdf(column(pt.drops, &DropRecord::se_optimized),
                                   column(pt.drops, &DropRecord::se_random));
        }

        std::vector<DropRecord> run_point(const ScenarioConfig &cfg, const CampaignOptions &opt,
                                          const std::string &label)
        {
            std::optional<ChannelSet> imported;
            if (cfg.channel_mode == ChannelMode::imported)
            {
                try
                {
                    imported = load_channel_dump(cfg.channel_dump);
                }
                catch (const import_error &e)
                {
                    throw scenario_error(std::string("channel_dump: ") + e.what());
                }
            }
            const ChannelSet *imp = imported ? &*imported : nullptr;

            std::vector<DropRecord> records(cfg.drops);
            std::atomic<std::size_t> next{0};
            std::mutex mtx;
            std::exception_ptr failure;
            std::size_t done = 0;

            auto worker = [&]()
            {
                for (;;)
                {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cfg.drops)
                        return;
                    try
                    {
                        records[i] = run_drop(cfg, i, drop_seed(cfg.seed, i), imp);
                    }
                    catch (...)
                    {
                        std::lock_guard lock(mtx);
                        if (!failure)
                            failure = std::current_exception();
                        next = cfg.drops;
                        return;
                    }
                    if (opt.progress)
                    {
                        std::lock_guard lock(mtx);
                        ++done;
                        const auto &r = records[i];
                        char buf[200];
                        if (r.ok)
                            std::snprintf(buf, sizeof buf, "[%s] drop %zu (%zu/%zu): random %.3f optimized %.3f eps %.3f",
                                          label.c_str(), i, done, cfg.drops, r.se_random, r.se_optimized, r.epsilon_opt);
                        else
                            std::snprintf(buf, sizeof buf, "[%s] drop %zu (%zu/%zu) failed: %.120s", label.c_str(), i,
                                          done, cfg.drops, r.failure.c_str());
                        opt.progress(buf);
                    }
                }
            };

            const std::size_t n_workers = std::clamp<std::size_t>(opt.workers, 1, cfg.drops);
            if (n_workers == 1)
                worker();
            else
            {
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < n_workers; ++w)
                    pool.emplace_back(worker);
                for (auto &t : pool)
                    t.join();
            }
            if (failure)
                std::rethrow_exception(failure);
            return records;
        }
    } // namespace

    CampaignResult run_campaign(const ScenarioConfig &cfg, const CampaignOptions &opt)
    {
        validate(cfg);
        CampaignResult result;
        result.config = cfg;
        result.timestamp = utc_timestamp();

        std::vector<std::pair<std::string, ScenarioConfig>> grid;
        if (cfg.sweep)
        {
            result.sweep_parameter = cfg.sweep->parameter;
            for (const auto &v : cfg.sweep->values)
                grid.emplace_back(v, apply_sweep_value(cfg, cfg.sweep->parameter, v));
        }
        else
            grid.emplace_back("default", cfg);

        for (auto &[label, point_cfg] : grid)
        {
            SweepPoint pt;
            pt.value = label;
            pt.drops = run_point(point_cfg, opt, label);
            finish_point(pt);
            if (pt.summary.successes == 0)
                throw campaign_error("all " + std::to_string(pt.drops.size()) + " drops failed at sweep point '" +
                                     label + "'; first cause: " + pt.drops.front().failure);
            result.points.push_back(std::move(pt));
        }
        return result;
    }

    // ------------------------------------------------------------------------
    // Persistence
    // ------------------------------------------------------------------------

    namespace
    {
        json record_to_json(const DropRecord &d)
        {
            json ues = json::array();
            for (const auto &u : d.ue_positions)
                ues.push_back({u.x(), u.y(), u.z()});
            json trace = json::array();
            for (const auto &t : d.trace)
                trace.push_back({{"iteration", t.iteration},
                                 {"epsilon", t.epsilon},
                                 {"mu", t.mu},
                                 {"baseline_se", t.baseline_se},
                                 {"candidate_se", t.candidate_se},
                                 {"incumbent_se", t.incumbent_se},
                                 {"accepted", t.accepted}});
            return {{"index", d.index},
                    {"seed", d.seed},
                    {"distance_m", d.distance},
                    {"ue_positions", ues},
                    {"realizations", d.realizations},
                    {"se_random", d.se_random},
                    {"se_optimized", d.se_optimized},
                    {"epsilon_opt", d.epsilon_opt},
                    {"epsilon_per_realization", d.epsilon_per_realization},
                    {"boundary_hits", d.boundary_hits},
                    {"rescales", d.rescales},
                    {"trace", trace}};
        }

        DropRecord record_from_json(const json &j)
        {
            DropRecord d;
            d.index = j.at("index").get<std::size_t>();
            d.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("cause"))
            {
                d.ok = false;
                d.failure = j.at("cause").get<std::string>();
                return d;
            }
            d.distance = j.at("distance_m").get<double>();
            for (const auto &u : j.at("ue_positions"))
                d.ue_positions.emplace_back(u.at(0).get<double>(), u.at(1).get<double>(), u.at(2).get<double>());
            d.realizations = j.at("realizations").get<std::size_t>();
            d.se_random = j.at("se_random").get<double>();
            d.se_optimized = j.at("se_optimized").get<double>();
            d.epsilon_opt = j.at("epsilon_opt").get<double>();
            d.epsilon_per_realization = j.at("epsilon_per_realization").get<std::vector<double>>();
            d.boundary_hits = j.at("boundary_hits").get<std::size_t>();
            d.rescales = j.at("rescales").get<std::size_t>();
            for (const auto &t : j.at("trace"))
            {
                TraceRow r;
                r.iteration = t.at("iteration").get<std::size_t>();
                r.epsilon = t.at("epsilon").get<double>();
                r.mu = t.at("mu").get<double>();
                r.baseline_se = t.at("baseline_se").get<double>();
                r.candidate_se = t.at("candidate_se").get<double>();
                r.incumbent_se = t.at("incumbent_se").get<double>();
                r.accepted = t.at("accepted").get<bool>();
                d.trace.push_back(r);
            }
            return d;
        }

        json summary_to_json(const PointSummary &s)
        {
            return {{"successes", s.successes},
                    {"failures", s.failures},
                    {"mean_optimized", s.mean_optimized},
                    {"stderr_optimized", s.stderr_optimized},
                    {"mean_random", s.mean_random},
                    {"stderr_random", s.stderr_random},
                    {"median_gain", s.median_gain},
                    {"fraction_optimized_ge_random", s.fraction_optimized_ge_random},
                    {"fraction_epsilon_above_half", s.fraction_epsilon_above_half},
                    {"mean_epsilon", s.mean_epsilon}};
        }

        std::string fmt_double(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        void write_file(const std::filesystem::path &path, const std::string &text)
        {
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot open " + path.string() + " for writing");
            out << text;
            if (!out)
                throw std::runtime_error("write to " + path.string() + " failed");
        }

        std::string csv_field(const std::string &s)
        {
            if (s.find_first_of(",\"\n") == std::string::npos)
                return s;
            std::string out = "\"";
            for (char c : s)
                out += c == '"' ? std::string("\"\"") : std::string(1, c);
            return out + "\"";
        }
    } // namespace

    json campaign_to_json(const CampaignResult &r)
    {
        json points = json::array();
        std::vector<std::uint64_t> seeds;
        for (const auto &pt : r.points)
        {
            json drops = json::array(), failures = json::array();
            for (const auto &d : pt.drops)
            {
                if (d.ok)
                    drops.push_back(record_to_json(d));
                else
                    failures.push_back({{"index", d.index}, {"seed", d.seed}, {"cause", d.failure}});
            }
            points.push_back({{"value", pt.value},
                              {"summary", summary_to_json(pt.summary)},
                              {"cdf", {{"x", pt.cdf.x}, {"optimized", pt.cdf.optimized}, {"random", pt.cdf.random}}},
                              {"drops", drops},
                              {"failures", failures}});
        }
        for (std::size_t i = 0; i < r.config.drops; ++i)
            seeds.push_back(drop_seed(r.config.seed, i));

        return {{"tool", tool_name},
                {"version", tool_version},
                {"timestamp", r.timestamp},
                {"seed", r.config.seed},
                {"drop_seeds", seeds},
                {"sweep_parameter", r.sweep_parameter},
                {"config", scenario_to_json(r.config)},
                {"points", points}};
    }

    void emit_results(const CampaignResult &result, const std::filesystem::path &out_dir)
    {
        std::filesystem::create_directories(out_dir);
        write_file(out_dir / "campaign.json", campaign_to_json(result).dump(2) + "\n");

        std::string cdf = "x,y,series,point\n";
        for (const auto &pt : result.points)
            for (const auto &[name, ys] : {std::pair{"optimized", &pt.cdf.optimized}, std::pair{"random", &pt.cdf.random}})
                for (std::size_t i = 0; i < pt.cdf.x.size(); ++i)
                    cdf += fmt_double(pt.cdf.x[i]) + "," + fmt_double((*ys)[i]) + "," + name + "," +
                           csv_field(pt.value) + "\n";
        write_file(out_dir / "cdf.csv", cdf);

        std::string trend = "x,y,y_stderr,random_mean,random_stderr,median_gain,fraction_epsilon_above_half,failures\n";
        for (const auto &pt : result.points)
        {
            const auto &s = pt.summary;
            trend += csv_field(pt.value) + "," + fmt_double(s.mean_optimized) + "," + fmt_double(s.stderr_optimized) +
                     "," + fmt_double(s.mean_random) + "," + fmt_double(s.stderr_random) + "," +
                     fmt_double(s.median_gain) + "," + fmt_double(s.fraction_epsilon_above_half) + "," +
                     std::to_string(s.failures) + "\n";
        }
        write_file(out_dir / "trend.csv", trend);
    }

    CampaignResult load_campaign(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw campaign_error("cannot open " + path.string());
        try
        {
            const json j = json::parse(in);
            CampaignResult r;
            r.config = scenario_from_json(j.at("config"));
            r.timestamp = j.at("timestamp").get<std::string>();
            r.sweep_parameter = j.at("sweep_parameter").get<std::string>();
            for (const auto &p : j.at("points"))
            {
                SweepPoint pt;
                pt.value = p.at("value").get<std::string>();
                for (const auto &d : p.at("drops"))
                    pt.drops.push_back(record_from_json(d));
                for (const auto &d : p.at("failures"))
                    pt.drops.push_back(record_from_json(d));
                std::sort(pt.drops.begin(), pt.drops.end(),
                          [](const DropRecord &a, const DropRecord &b) { return a.index < b.index; });
                finish_point(pt);
                r.points.push_back(std::move(pt));
            }
            return r;
        }
        catch (const json::exception &e)
        {
            throw campaign_error(path.string() + ": " + e.what());
        }
    }

} // namespace ribs
