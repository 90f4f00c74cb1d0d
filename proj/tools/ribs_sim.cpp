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

// ribs_sim: command line front end.
//
//   ribs_sim campaign --config cfg.json --out results/ [--seed N] [--parallel N]
//   ribs_sim drop     --config cfg.json [--seed N] [--index I] [--trace-csv path]
//   ribs_sim import   dump.json [--n-ris N] [--n-ue K] [--out freq.json]
//   ribs_sim trace    --config cfg.json [--element N] [--ue I] [--max-order M]
//   ribs_sim defaults [--out cfg.json]
//
// Exit codes: 0 success, 2 configuration / input error, 3 numeric or campaign failure.

#include "ribs/campaign.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace
{
    constexpr int exit_config = 2;
    constexpr int exit_failure = 3;

    ribs::ScenarioConfig load_config(const std::string &path)
    {
        return path.empty() ? ribs::default_scenario() : ribs::load_scenario(path);
    }

    int cmd_campaign(const std::string &config, const std::string &out, std::optional<std::uint64_t> seed,
                     std::size_t parallel, std::optional<std::size_t> drops, bool quiet)
    {
        ribs::ScenarioConfig cfg = load_config(config);
        if (seed)
            cfg.seed = *seed;
        if (drops)
            cfg.drops = *drops;
        ribs::validate(cfg);

        ribs::CampaignOptions opt;
        opt.workers = parallel;
        if (!quiet)
            opt.progress = [](const std::string &line) { std::cerr << line << '\n'; };

        const ribs::CampaignResult result = ribs::run_campaign(cfg, opt);
        ribs::emit_results(result, out);

        for (const auto &pt : result.points)
        {
            const auto &s = pt.summary;
            std::printf("%s=%s: optimized %.3f +- %.3f, random %.3f +- %.3f bit/s/Hz, median gain %.3f, "
                        "eps>0.5 in %.0f%% of %zu drops, %zu failed\n",
                        result.sweep_parameter.empty() ? "point" : result.sweep_parameter.c_str(), pt.value.c_str(),
                        s.mean_optimized, s.stderr_optimized, s.mean_random, s.stderr_random, s.median_gain,
                        100.0 * s.fraction_epsilon_above_half, s.successes, s.failures);
        }
        std::printf("results written to %s\n", out.c_str());
        return 0;
    }

    int cmd_drop(const std::string &config, std::optional<std::uint64_t> seed, std::size_t index,
                 const std::string &trace_csv)
    {
        ribs::ScenarioConfig cfg = load_config(config);
        if (seed)
            cfg.seed = *seed;
        ribs::validate(cfg);

        std::optional<ribs::ChannelSet> imported;
        if (cfg.channel_mode == ribs::ChannelMode::imported)
            imported = ribs::load_channel_dump(cfg.channel_dump);

        const std::uint64_t ds = ribs::drop_seed(cfg.seed, index);
        const ribs::DropRecord rec = ribs::run_drop(cfg, index, ds, imported ? &*imported : nullptr);
        if (!rec.ok)
        {
            std::fprintf(stderr, "drop %zu failed: %s\n", index, rec.failure.c_str());
            return exit_failure;
        }

        std::printf("drop %zu seed %llu: D = %.4f m, %zu realization(s)\n", index,
                    static_cast<unsigned long long>(ds), rec.distance, rec.realizations);
        std::printf("%4s %10s %12s %12s %12s %12s %s\n", "iter", "epsilon", "mu", "baseline", "candidate",
                    "incumbent", "accepted");
        for (const auto &r : rec.trace)
            std::printf("%4zu %10.6f %12.5g %12.6f %12.6f %12.6f %s\n", r.iteration, r.epsilon, r.mu, r.baseline_se,
                        r.candidate_se, r.incumbent_se, r.accepted ? "yes" : "no");
        std::printf("sum SE random (eps = %.2f): %.6f bit/s/Hz\n", cfg.random_epsilon, rec.se_random);
        std::printf("sum SE optimized: %.6f bit/s/Hz, eps_opt %.6f\n", rec.se_optimized, rec.epsilon_opt);

        if (!trace_csv.empty())
        {
            std::ofstream os(trace_csv);
            if (!os)
                throw std::runtime_error("cannot write " + trace_csv);
            ribs::write_trace_csv(os, rec.trace);
        }
        return 0;
    }

    int cmd_import(const std::string &dump_path, std::optional<std::size_t> n_ris, std::optional<std::size_t> n_ue,
                   const std::string &out)
    {
        const ribs::ChannelDump dump = ribs::read_channel_dump(dump_path);
        const ribs::ChannelSet set = ribs::to_channel_set(dump);
        if (n_ris && *n_ris != dump.n_ris)
            throw ribs::import_error("dump has n_ris = " + std::to_string(dump.n_ris) + ", expected " +
                                     std::to_string(*n_ris));
        if (n_ue && *n_ue != dump.n_ue)
            throw ribs::import_error("dump has n_ue = " + std::to_string(dump.n_ue) + ", expected " +
                                     std::to_string(*n_ue));

        std::size_t rays = 0;
        for (const auto &ue : dump.rays)
            for (const auto &el : ue)
                rays += el.size();
        std::printf("%s: valid, mode %s, n_ris %zu, n_ue %zu, carrier %.6g Hz, provenance '%s'", dump_path.c_str(),
                    dump.ray_mode() ? "rays" : "freq", dump.n_ris, dump.n_ue, dump.carrier_hz,
                    dump.provenance.c_str());
        if (dump.ray_mode())
            std::printf(", %zu rays", rays);
        std::printf(", mean |h|^2 %.6g\n", set.h.cwiseAbs2().mean());

        if (!out.empty())
        {
            ribs::save_channel_dump(out, ribs::make_freq_dump(set));
            std::printf("frequency-domain dump written to %s\n", out.c_str());
        }
        return 0;
    }

    int cmd_trace(const std::string &config, std::size_t element, std::size_t ue, std::optional<std::size_t> order)
    {
        ribs::ScenarioConfig cfg = load_config(config);
        ribs::validate(cfg);
        const ribs::DropGeometry geo = ribs::place_drop(cfg, ribs::drop_seed(cfg.seed, 0));
        if (element >= geo.ris.size() || ue >= geo.ue_positions.size())
            throw ribs::invalid_input("element or UE index out of range");

        const ribs::Vec3 &tx = geo.ris.element_positions[element];
        const ribs::Vec3 &rx = geo.ue_positions[ue];
        const auto paths =
            ribs::trace_paths(cfg.scene.build(), tx, rx, order.value_or(cfg.rt_max_order), cfg.wavelength());

        std::printf("element %zu at (%.3f, %.3f, %.3f) -> UE %zu at (%.3f, %.3f, %.3f): %zu path(s)\n", element,
                    tx.x(), tx.y(), tx.z(), ue, rx.x(), rx.y(), rx.z(), paths.size());
        for (const auto &p : paths)
        {
            std::printf("order %zu  delay %.9e s  |a| %.6e  arg %+.6f  via", p.order, p.delay, std::abs(p.gain),
                        std::arg(p.gain));
            for (int r : p.reflectors)
                std::printf(" %s", r < 0 ? "ground" : ("facet" + std::to_string(r)).c_str());
            std::printf("\n");
        }
        std::printf("H(f_c) = %.9e %+.9ej\n", ribs::frequency_response(paths, cfg.subcarrier_offset_hz).real(),
                    ribs::frequency_response(paths, cfg.subcarrier_offset_hz).imag());
        return 0;
    }

    int cmd_defaults(const std::string &out)
    {
        const std::string text = ribs::scenario_to_json(ribs::default_scenario()).dump(2) + "\n";
        if (out.empty())
            std::fputs(text.c_str(), stdout);
        else
        {
            std::ofstream os(out);
            if (!(os << text))
                throw std::runtime_error("cannot write " + out);
        }
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Simulation and optimization of reconfigurable intelligent base stations"};
    app.require_subcommand(1);

    std::string config, out, trace_csv, dump_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> drops, n_ris, n_ue, order;
    std::size_t parallel = 1, index = 0, element = 0, ue = 0;
    bool quiet = false;

    auto *campaign = app.add_subcommand("campaign", "run a Monte Carlo campaign");
    campaign->add_option("--config", config, "scenario JSON (defaults when omitted)");
    campaign->add_option("--out", out, "output directory")->required();
    campaign->add_option("--seed", seed, "master seed (overrides the config)");
    campaign->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
    campaign->add_option("--drops", drops, "drop count (overrides the config)")->check(CLI::PositiveNumber);
    campaign->add_flag("--quiet", quiet, "no per-drop progress");

    auto *drop = app.add_subcommand("drop", "run one drop and print the optimizer trace");
    drop->add_option("--config", config, "scenario JSON (defaults when omitted)");
    drop->add_option("--seed", seed, "master seed (overrides the config)");
    drop->add_option("--index", index, "drop index");
    drop->add_option("--trace-csv", trace_csv, "write the convergence trace as CSV");

    auto *imp = app.add_subcommand("import", "validate a channel dump and optionally convert it");
    imp->add_option("dump", dump_path, "channel dump JSON")->required();
    imp->add_option("--n-ris", n_ris, "expected RIS element count");
    imp->add_option("--n-ue", n_ue, "expected UE count");
    imp->add_option("--out", out, "write a frequency-domain dump");

    auto *trace = app.add_subcommand("trace", "print traced paths for one RIS element and UE of drop 0");
    trace->add_option("--config", config, "scenario JSON (defaults when omitted)");
    trace->add_option("--element", element, "RIS element index");
    trace->add_option("--ue", ue, "UE index");
    trace->add_option("--max-order", order, "maximum reflection order");

    auto *defaults = app.add_subcommand("defaults", "print the default scenario JSON");
    defaults->add_option("--out", out, "write to a file instead of stdout");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try
    {
        if (*campaign)
            return cmd_campaign(config, out, seed, parallel, drops, quiet);
        if (*drop)
            return cmd_drop(config, seed, index, trace_csv);
        if (*imp)
            return cmd_import(dump_path, n_ris, n_ue, out);
        if (*trace)
            return cmd_trace(config, element, ue, order);
        if (*defaults)
            return cmd_defaults(out);
    }
    catch (const ribs::scenario_error &e)
    {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_config;
    }
    catch (const ribs::import_error &e)
    {
        std::fprintf(stderr, "import error: %s\n", e.what());
        return exit_config;
    }
    catch (const ribs::invalid_input &e)
    {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_config;
    }
    catch (const ribs::invalid_geometry &e)
    {
        std::fprintf(stderr, "invalid geometry: %s\n", e.what());
        return exit_config;
    }
    catch (const ribs::singular_geometry &e)
    {
        std::fprintf(stderr, "invalid geometry: %s\n", e.what());
        return exit_config;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_failure;
    }
    return 0;
}
