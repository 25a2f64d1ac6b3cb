/*
   Copyright 2026 eogrid authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "eogrid/catalog.hpp"
#include "eogrid/errors.hpp"
#include "eogrid/grid.hpp"
#include "eogrid/rng.hpp"
#include "eogrid/timeutil.hpp"

namespace eogrid {

/// What a listing reveals about a scene: identity, acquisition time and the
/// coarse cloud estimate from the product's own mask.  Refined values stay
/// hidden until the scene is inspected.
struct scene_candidate {
    std::string scene_id;
    utc_seconds acquired = 0;
    double rough_cloud = 0;
};

/// Revealed by inspecting one scene.
struct scene_inspection {
    double refined_cloud = 0;
    double nodata_fraction = 0;
};

/// Source of candidate scenes.  `list` returns the rough view of everything
/// acquired in [window_start, window_end) over a cell; `inspect` reveals the
/// refined cloud and nodata fractions (nullopt or a thrown exception count
/// as an inspection failure).  Providers that tolerate concurrent inspect
/// calls opt in through parallel_safe().
class scene_provider {
public:
    virtual ~scene_provider() = default;
    virtual std::string source_name() const = 0;
    virtual std::vector<scene_candidate> list(const cell_id& cell, utc_seconds window_start,
                                              utc_seconds window_end) const = 0;
    virtual std::optional<scene_inspection> inspect(const std::string& scene_id) const = 0;
    virtual bool parallel_safe() const { return false; }
};

/// Tunables of the per-cell selection procedure.
struct sampler_config {
    int window_months = 4;
    double accept_cloud = 0.25;    // accept refined cloud strictly below this
    double fallback_cloud = 0.50;  // relaxed ceiling once fallback_after scenes were inspected
    int fallback_after = 50;
    double max_nodata = 0.05;
    utc_seconds availability_start = 0;
    utc_seconds availability_end = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(accept_cloud >= 0) || !(accept_cloud <= fallback_cloud) || !(fallback_cloud <= 1))
            throw invalid_parameter("cloud thresholds must satisfy 0 <= accept <= fallback <= 1");
        if (fallback_after < 1) throw invalid_parameter("fallback_after must be >= 1");
        if (window_months < 1) throw invalid_parameter("window_months must be >= 1");
        if (!(max_nodata >= 0) || !(max_nodata <= 1))
            throw invalid_parameter("max_nodata must be in [0, 1]");
        if (availability_end <= availability_start)
            throw invalid_parameter("availability range is empty");
        if (last_start_day() < first_start_day())
            throw invalid_parameter("availability range shorter than the sampling window");
    }

    /// Feasible window start days (whole UTC days, inclusive bounds).
    std::int64_t first_start_day() const { return first_day_at_or_after(availability_start); }

    std::int64_t last_start_day() const {
        std::int64_t day = availability_end / seconds_per_day;
        while (day >= first_start_day() && window_end_of(day) > availability_end) --day;
        return day;
    }

    /// Window end for a start day: the same calendar day `window_months`
    /// months later, exclusive.
    utc_seconds window_end_of(std::int64_t start_day) const {
        const civil_date end = add_months(civil_from_days(start_day), window_months);
        return days_from_civil(end.year, end.month, end.day) * seconds_per_day;
    }
};

/// One inspected scene, in inspection order.
struct inspection_entry {
    std::string scene_id;
    utc_seconds acquired = 0;
    double rough_cloud = 0;
    std::optional<double> refined_cloud;
    std::optional<double> nodata_fraction;
    bool failed = false;
};

struct selection_result {
    cell_id cell;
    bool selected = false;
    std::optional<std::string> scene_id;
    std::optional<utc_seconds> acquired;
    std::optional<double> refined_cloud;
    std::optional<double> nodata_fraction;
    int scenes_inspected = 0;
    utc_seconds window_start = 0;
    utc_seconds window_end = 0;
    bool fallback_used = false;
    std::vector<inspection_entry> log;
};

/// Picks one scene for a cell.  A window of window_months calendar months is
/// drawn with its start day uniform over the feasible range, using the
/// per-cell substream of the campaign seed.  Candidates inside the window
/// are inspected from least to most rough cloud; the first scene whose
/// refined cloud is below accept_cloud (and nodata within max_nodata) wins.
/// Once fallback_after scenes were inspected without a winner, the least
/// cloudy inspected scene is accepted as soon as it clears fallback_cloud.
/// A cell with no acceptable scene comes back unselected.
inline selection_result select_scene(const cell_id& cell, const scene_provider& provider,
                                     const sampler_config& config) {
    config.validate();
    selection_result result;
    result.cell = cell;

    splitmix64 rng = cell_stream(config.seed, format_cell(cell));
    const std::int64_t first_day = config.first_start_day();
    const std::int64_t span = config.last_start_day() - first_day + 1;
    const std::int64_t start_day = first_day + static_cast<std::int64_t>(rng.below(span));
    result.window_start = start_day * seconds_per_day;
    result.window_end = config.window_end_of(start_day);

    std::vector<scene_candidate> candidates =
        provider.list(cell, result.window_start, result.window_end);
    std::sort(candidates.begin(), candidates.end(),
              [](const scene_candidate& a, const scene_candidate& b) {
                  return std::tie(a.rough_cloud, a.acquired, a.scene_id) <
                         std::tie(b.rough_cloud, b.acquired, b.scene_id);
              });

    const auto accept = [&](const inspection_entry& entry, bool fallback) {
        result.selected = true;
        result.scene_id = entry.scene_id;
        result.acquired = entry.acquired;
        result.refined_cloud = entry.refined_cloud;
        result.nodata_fraction = entry.nodata_fraction;
        result.fallback_used = fallback;
    };

    std::size_t best = SIZE_MAX;  // least refined cloud so far, nodata permitting
    for (const scene_candidate& candidate : candidates) {
        inspection_entry entry{candidate.scene_id, candidate.acquired, candidate.rough_cloud,
                               std::nullopt, std::nullopt, false};
        std::optional<scene_inspection> inspection;
        try {
            inspection = provider.inspect(candidate.scene_id);
        } catch (...) {
            inspection = std::nullopt;
        }
        ++result.scenes_inspected;
        if (!inspection) {
            entry.failed = true;
            result.log.push_back(std::move(entry));
        } else {
            entry.refined_cloud = inspection->refined_cloud;
            entry.nodata_fraction = inspection->nodata_fraction;
            result.log.push_back(std::move(entry));
            const inspection_entry& logged = result.log.back();
            const bool nodata_ok = inspection->nodata_fraction <= config.max_nodata;
            if (nodata_ok && inspection->refined_cloud < config.accept_cloud) {
                accept(logged, false);
                return result;
            }
            if (nodata_ok &&
                (best == SIZE_MAX || inspection->refined_cloud < *result.log[best].refined_cloud))
                best = result.log.size() - 1;
        }
        if (result.scenes_inspected >= config.fallback_after && best != SIZE_MAX &&
            *result.log[best].refined_cloud < config.fallback_cloud) {
            accept(result.log[best], true);
            return result;
        }
    }
    return result;
}

struct campaign_result {
    std::vector<selection_result> results;   // one per input cell, input order
    std::vector<metadata_record> records;    // catalog-ready rows for the selected cells
};

/// Runs select_scene over every cell.  Cells are independent work units with
/// independent RNG substreams, so any thread count produces the sequential
/// result; providers that are not parallel_safe are processed serially.
inline campaign_result run_campaign(const grid_spec& spec, std::span<const cell_id> cells,
                                    const scene_provider& provider, const sampler_config& config,
                                    unsigned threads = 1) {
    config.validate();
    for (const cell_id& cell : cells) cell_to_coords(spec, cell);  // range check up front

    campaign_result campaign;
    campaign.results.resize(cells.size());
    unsigned workers = std::max(1u, threads);
    if (!provider.parallel_safe()) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells.size()));

    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            campaign.results[i] = select_scene(cells[i], provider, config);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
                    campaign.results[i] = select_scene(cells[i], provider, config);
            });
        for (auto& worker : pool) worker.join();
    }

    const std::string source = provider.source_name();
    for (const selection_result& result : campaign.results) {
        if (!result.selected) continue;
        const grid_point anchor = cell_to_coords(spec, result.cell);
        metadata_record rec;
        rec.cell = format_cell(result.cell);
        rec.source = source;
        rec.product_id = *result.scene_id;
        rec.time_start = *result.acquired;
        rec.cloud_fraction = result.refined_cloud;
        rec.nodata_fraction = result.nodata_fraction;
        rec.centre_lat = anchor.lat_deg;
        rec.centre_lon = anchor.lon_deg;
        campaign.records.push_back(std::move(rec));
    }
    return campaign;
}

struct campaign_statistics {
    std::size_t selected_count = 0;
    std::size_t unsampled_count = 0;
    std::optional<double> mean_cloud;
    std::optional<double> median_cloud;    // lower middle for even counts
    std::optional<double> fallback_rate;   // share of selected results
};

inline campaign_statistics campaign_stats(std::span<const selection_result> results) {
    campaign_statistics stats;
    std::vector<double> clouds;
    std::size_t fallbacks = 0;
    for (const selection_result& result : results) {
        if (!result.selected) {
            ++stats.unsampled_count;
            continue;
        }
        ++stats.selected_count;
        clouds.push_back(result.refined_cloud.value_or(0));
        if (result.fallback_used) ++fallbacks;
    }
    if (!clouds.empty()) {
        double sum = 0;
        for (const double c : clouds) sum += c;
        stats.mean_cloud = sum / static_cast<double>(clouds.size());
        std::sort(clouds.begin(), clouds.end());
        stats.median_cloud = clouds[(clouds.size() - 1) / 2];
        stats.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(clouds.size());
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Serialization of results

inline nlohmann::ordered_json result_to_json(const selection_result& result) {
    nlohmann::ordered_json doc;
    doc["cell"] = format_cell(result.cell);
    doc["outcome"] = result.selected ? "selected" : "unsampled";
    if (result.scene_id) doc["scene_id"] = *result.scene_id;
    if (result.acquired) doc["acquired"] = format_utc(*result.acquired);
    if (result.refined_cloud) doc["refined_cloud"] = *result.refined_cloud;
    if (result.nodata_fraction) doc["nodata_fraction"] = *result.nodata_fraction;
    doc["scenes_inspected"] = result.scenes_inspected;
    doc["window_start"] = format_utc(result.window_start);
    doc["window_end"] = format_utc(result.window_end);
    doc["fallback_used"] = result.fallback_used;
    auto& log = doc["log"] = nlohmann::ordered_json::array();
    for (const inspection_entry& entry : result.log) {
        nlohmann::ordered_json line;
        line["scene_id"] = entry.scene_id;
        line["acquired"] = format_utc(entry.acquired);
        line["rough_cloud"] = entry.rough_cloud;
        if (entry.refined_cloud) line["refined_cloud"] = *entry.refined_cloud;
        if (entry.nodata_fraction) line["nodata_fraction"] = *entry.nodata_fraction;
        line["failed"] = entry.failed;
        log.push_back(std::move(line));
    }
    return doc;
}

inline selection_result result_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("cell") || !doc.contains("outcome"))
        throw parse_error("malformed selection result");
    selection_result result;
    result.cell = parse_cell(doc["cell"].get<std::string>());
    result.selected = doc["outcome"].get<std::string>() == "selected";
    if (doc.contains("scene_id")) result.scene_id = doc["scene_id"].get<std::string>();
    if (doc.contains("acquired")) result.acquired = parse_utc(doc["acquired"].get<std::string>());
    if (doc.contains("refined_cloud")) result.refined_cloud = doc["refined_cloud"].get<double>();
    if (doc.contains("nodata_fraction"))
        result.nodata_fraction = doc["nodata_fraction"].get<double>();
    result.scenes_inspected = doc.value("scenes_inspected", 0);
    if (doc.contains("window_start")) result.window_start = parse_utc(doc["window_start"].get<std::string>());
    if (doc.contains("window_end")) result.window_end = parse_utc(doc["window_end"].get<std::string>());
    result.fallback_used = doc.value("fallback_used", false);
    if (doc.contains("log"))
        for (const auto& line : doc["log"]) {
            inspection_entry entry;
            entry.scene_id = line.value("scene_id", "");
            if (line.contains("acquired")) entry.acquired = parse_utc(line["acquired"].get<std::string>());
            entry.rough_cloud = line.value("rough_cloud", 0.0);
            if (line.contains("refined_cloud")) entry.refined_cloud = line["refined_cloud"].get<double>();
            if (line.contains("nodata_fraction"))
                entry.nodata_fraction = line["nodata_fraction"].get<double>();
            entry.failed = line.value("failed", false);
            result.log.push_back(std::move(entry));
        }
    return result;
}

inline void write_results_jsonl(std::span<const selection_result> results, std::ostream& os) {
    for (const selection_result& result : results) os << result_to_json(result).dump() << '\n';
}

inline std::vector<selection_result> read_results_jsonl(std::istream& in) {
    std::vector<selection_result> results;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw parse_error("results line " + std::to_string(row) + ": invalid json");
        results.push_back(result_from_json(doc));
    }
    return results;
}

// ---------------------------------------------------------------------------
// File-backed provider

/// In-memory provider loaded from JSONL lines of
/// {cell, scene_id, acquired, rough_cloud, refined_cloud, nodata_fraction}.
/// Listing exposes only the rough fields; refined values surface through
/// inspect, like a remote archive would behave.
class jsonl_scene_provider final : public scene_provider {
public:
    explicit jsonl_scene_provider(std::string source_name = "synthetic")
        : source_(std::move(source_name)) {}

    static jsonl_scene_provider from_stream(std::istream& in, std::string source_name = "synthetic") {
        jsonl_scene_provider provider(std::move(source_name));
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            const auto fail = [&](const std::string& what) {
                throw parse_error("provider line " + std::to_string(row) + ": " + what);
            };
            const nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
            if (doc.is_discarded() || !doc.is_object()) fail("invalid json");
            for (const char* key :
                 {"cell", "scene_id", "acquired", "rough_cloud", "refined_cloud", "nodata_fraction"})
                if (!doc.contains(key)) fail(std::string("missing '") + key + "'");
            try {
                provider.add(parse_cell(doc["cell"].get<std::string>()),
                             doc["scene_id"].get<std::string>(),
                             parse_utc(doc["acquired"].get<std::string>()),
                             doc["rough_cloud"].get<double>(), doc["refined_cloud"].get<double>(),
                             doc["nodata_fraction"].get<double>());
            } catch (const parse_error& e) {
                fail(e.what());
            } catch (const nlohmann::json::exception&) {
                fail("wrong field type");
            }
        }
        return provider;
    }

    void add(cell_id cell, std::string scene_id, utc_seconds acquired, double rough_cloud,
             double refined_cloud, double nodata_fraction) {
        for (const double fraction : {rough_cloud, refined_cloud, nodata_fraction})
            if (!(fraction >= 0 && fraction <= 1))
                throw parse_error("scene '" + scene_id + "': fraction out of range");
        if (!inspections_.emplace(scene_id, scene_inspection{refined_cloud, nodata_fraction}).second)
            throw parse_error("duplicate scene id '" + scene_id + "'");
        scenes_[cell].push_back({std::move(scene_id), acquired, rough_cloud});
    }

    std::string source_name() const override { return source_; }

    std::vector<scene_candidate> list(const cell_id& cell, utc_seconds window_start,
                                      utc_seconds window_end) const override {
        std::vector<scene_candidate> out;
        const auto it = scenes_.find(cell);
        if (it == scenes_.end()) return out;
        for (const scene_candidate& candidate : it->second)
            if (candidate.acquired >= window_start && candidate.acquired < window_end)
                out.push_back(candidate);
        return out;
    }

    std::optional<scene_inspection> inspect(const std::string& scene_id) const override {
        const auto it = inspections_.find(scene_id);
        if (it == inspections_.end()) return std::nullopt;
        return it->second;
    }

    bool parallel_safe() const override { return true; }

    /// Earliest and latest acquisition over all scenes.
    std::optional<std::pair<utc_seconds, utc_seconds>> time_bounds() const {
        std::optional<std::pair<utc_seconds, utc_seconds>> bounds;
        for (const auto& [cell, candidates] : scenes_)
            for (const scene_candidate& candidate : candidates) {
                if (!bounds)
                    bounds = {candidate.acquired, candidate.acquired};
                else {
                    bounds->first = std::min(bounds->first, candidate.acquired);
                    bounds->second = std::max(bounds->second, candidate.acquired);
                }
            }
        return bounds;
    }

private:
    std::string source_;
    std::map<cell_id, std::vector<scene_candidate>> scenes_;
    std::unordered_map<std::string, scene_inspection> inspections_;
};

}  // namespace eogrid
