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

#ifndef RIBS_CAMPAIGN_HPP
#define RIBS_CAMPAIGN_HPP

#include "ribs/scenario.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ribs
{
    inline constexpr const char *tool_name = "ribs-sim";
    inline constexpr const char *tool_version = "0.1.0";

    // Seed of drop `index`: splitmix64 of the campaign seed offset by the index. Every sweep
    // point reuses the same drop seeds, so UE placements are shared across the sweep.
    std::uint64_t drop_seed(std::uint64_t campaign_seed, std::size_t index);

    // Independent generator for one purpose inside a drop (placement, large-scale, fading,
    // optimizer start, random baseline).
    enum class Stream : std::uint32_t
    {
        placement = 1,
        large_scale = 2,
        fading = 3,
        optimizer = 4,
        baseline = 5
    };
    rng_t stream_rng(std::uint64_t seed, Stream stream);

    // Channels of one drop before fading is drawn.
    struct DropGeometry
    {
        double distance = 0.0; // BS-RIS center distance, m
        ArrayGeometry bs, ris;
        CMat H;
        std::vector<Vec3> ue_positions;
    };

    // Uniform UE placement in the region, beyond the minimum distance, outside buildings and
    // with at least one traced path from the RIS center (same rule in every channel mode).
    DropGeometry place_drop(const ScenarioConfig &cfg, std::uint64_t seed);

    // Fading realizations of one drop. Statistical mode draws cfg.realizations channels,
    // the deterministic modes return a single one.
    std::vector<LinkState> drop_links(const ScenarioConfig &cfg, const DropGeometry &geo, std::uint64_t seed,
                                      const ChannelSet *imported = nullptr);

    struct DropRecord
    {
        std::size_t index = 0;
        std::uint64_t seed = 0;
        bool ok = true;
        std::string failure;           // cause when !ok
        double distance = 0.0;
        std::vector<Vec3> ue_positions;
        std::size_t realizations = 0;
        double se_random = 0.0;        // mean over realizations, bit/s/Hz
        double se_optimized = 0.0;     // equals se_random in random ris_mode
        double epsilon_opt = 0.0;      // mean over realizations
        std::vector<double> epsilon_per_realization;
        std::vector<TraceRow> trace;   // first realization
        std::size_t boundary_hits = 0;
        std::size_t rescales = 0;
    };

    // Failures inside the optimizer or channel construction produce a record with ok = false.
    DropRecord run_drop(const ScenarioConfig &cfg, std::size_t index, std::uint64_t seed,
                        const ChannelSet *imported = nullptr);

    struct CdfCurve
    {
        std::vector<double> x;
        std::vector<double> optimized;
        std::vector<double> random;
    };

    inline constexpr std::size_t cdf_points = 200;

    // Empirical CDFs of both series on a shared uniform grid spanning their range.
    CdfCurve empirical_cdf(const std::vector<double> &optimized, const std::vector<double> &random,
                           std::size_t points = cdf_points);

    struct PointSummary
    {
        std::size_t successes = 0;
        std::size_t failures = 0;
        double mean_optimized = 0.0, stderr_optimized = 0.0;
        double mean_random = 0.0, stderr_random = 0.0;
        double median_gain = 0.0;          // median of optimized / random
        double fraction_optimized_ge_random = 0.0;
        double fraction_epsilon_above_half = 0.0;
        double mean_epsilon = 0.0;
    };

    struct SweepPoint
    {
        std::string value; // sweep value, "default" without a sweep
        std::vector<DropRecord> drops; // successful and failed, ordered by index
        PointSummary summary;
        CdfCurve cdf;
    };

    struct CampaignResult
    {
        ScenarioConfig config;
        std::string sweep_parameter; // empty without a sweep
        std::vector<SweepPoint> points;
        std::string timestamp; // excluded from reproducibility comparisons
    };

    PointSummary summarize(const std::vector<DropRecord> &drops);

    struct CampaignOptions
    {
        std::size_t workers = 1;
        std::function<void(const std::string &)> progress; // optional
    };

    // Runs every sweep point (or the single configured point). Drops of a point run on a
    // worker pool; results are folded in drop order. Throws campaign_error when every drop
    // of a point fails.
    CampaignResult run_campaign(const ScenarioConfig &cfg, const CampaignOptions &opt = {});

    nlohmann::json campaign_to_json(const CampaignResult &result);

    // Writes campaign.json, cdf.csv and trend.csv into out_dir (created if missing).
    void emit_results(const CampaignResult &result, const std::filesystem::path &out_dir);

    // Reads campaign.json and recomputes the summaries and CDFs from the drop records.
    CampaignResult load_campaign(const std::filesystem::path &path);

} // namespace ribs

#endif
