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
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "eogrid/errors.hpp"
#include "eogrid/grid.hpp"
#include "eogrid/timeutil.hpp"

namespace eogrid {

/// One indexed sample of some collection.  Only cell, source, product id and
/// start time are mandatory; quality fractions and geometry hints are
/// optional.  Columns the schema does not know are carried through verbatim
/// in `extras`.
struct metadata_record {
    std::string cell;  // canonical cell name
    std::string source;
    std::string product_id;
    utc_seconds time_start = 0;
    std::optional<utc_seconds> time_end;
    std::optional<double> cloud_fraction;
    std::optional<double> nodata_fraction;
    std::optional<std::string> crs_label;
    std::optional<double> centre_lat;
    std::optional<double> centre_lon;
    std::vector<std::pair<std::string, std::string>> extras;  // sorted by key

    bool operator==(const metadata_record&) const = default;
};

/// Canonicalises rec.cell and checks the record invariants; returns a reject
/// reason, or nullopt when the record is acceptable.
inline std::optional<std::string> record_violation(const grid_spec& spec, metadata_record& rec) {
    if (rec.cell.empty()) return "missing cell";
    if (rec.source.empty()) return "missing source";
    if (rec.product_id.empty()) return "missing product_id";
    cell_id cell;
    try {
        cell = parse_cell(rec.cell);
        cell_to_coords(spec, cell);
    } catch (const parse_error&) {
        return "bad cell '" + rec.cell + "'";
    } catch (const cell_out_of_range&) {
        return "cell '" + rec.cell + "' out of range";
    }
    rec.cell = format_cell(cell);
    if (rec.time_end && *rec.time_end < rec.time_start) return "time_end before time_start";
    for (const auto& fraction : {rec.cloud_fraction, rec.nodata_fraction})
        if (fraction && !(*fraction >= 0.0 && *fraction <= 1.0)) return "fraction out of range";
    if (rec.centre_lat.has_value() != rec.centre_lon.has_value()) return "incomplete centre coordinates";
    if (rec.centre_lat) {
        try {
            if (coords_to_cell(spec, *rec.centre_lat, *rec.centre_lon) != cell)
                return "centre does not match cell";
        } catch (const invalid_parameter&) {
            return "bad centre coordinates";
        }
    }
    std::sort(rec.extras.begin(), rec.extras.end());
    return std::nullopt;
}

struct ingest_report {
    std::size_t inserted = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::vector<std::pair<std::size_t, std::string>> rejects;  // (input row, reason)
};

/// Which records a filter keeps.  All parts are optional and combined with
/// AND.  Cloud and nodata ceilings are strict (fraction < ceiling); records
/// missing the fraction pass only when include_unknown is set.  The time
/// window keeps records whose [time_start, time_end] interval overlaps it.
struct filter_predicate {
    std::optional<std::vector<std::string>> sources;
    std::optional<utc_seconds> time_from;
    std::optional<utc_seconds> time_to;
    std::optional<double> max_cloud;
    std::optional<double> max_nodata;
    bool include_unknown = false;
    std::optional<geo_box> bbox;
    std::optional<std::vector<cell_id>> cells;
};

/// Cell-keyed, deterministic in-memory index over metadata records.
/// Iteration order is always (row, col, time_start, product_id, source).
/// Exact duplicates — same cell, source, product id and start time — are
/// absorbed on insert.
class catalog {
public:
    explicit catalog(grid_spec spec) : spec_(spec) {}

    const grid_spec& spec() const noexcept { return spec_; }

    enum class insert_outcome { inserted, duplicate };

    /// Validated insert; throws invalid_parameter when the record breaks a
    /// catalog invariant (use record_violation for a non-throwing check).
    insert_outcome insert(metadata_record rec) {
        if (const auto reason = record_violation(spec_, rec))
            throw invalid_parameter("record rejected: " + *reason);
        return place(std::move(rec));
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t cell_count() const noexcept { return by_cell_.size(); }
    bool empty() const noexcept { return size_ == 0; }
    const std::set<std::string>& sources() const noexcept { return sources_; }

    const std::map<cell_id, std::vector<metadata_record>>& buckets() const noexcept { return by_cell_; }

    const std::vector<metadata_record>* records(cell_id cell) const {
        const auto it = by_cell_.find(cell);
        return it == by_cell_.end() ? nullptr : &it->second;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [cell, records] : by_cell_)
            for (const auto& rec : records) fn(cell, rec);
    }

    /// Immutable filtered snapshot.
    catalog filter(const filter_predicate& pred_in) const {
        filter_predicate pred = pred_in;
        if (pred.time_from && pred.time_to && *pred.time_to < *pred.time_from)
            throw invalid_parameter("time range ends before it starts");
        if (pred.sources) std::sort(pred.sources->begin(), pred.sources->end());
        if (pred.cells) std::sort(pred.cells->begin(), pred.cells->end());
        std::optional<geo_box> box;
        if (pred.bbox) box = detail::normalized_box(*pred.bbox);

        catalog out(spec_);
        for (const auto& [cell, records] : by_cell_) {
            if (pred.cells &&
                !std::binary_search(pred.cells->begin(), pred.cells->end(), cell))
                continue;
            if (box) {
                const grid_point anchor = cell_to_coords(spec_, cell);
                if (!box_contains(*box, anchor.lat_deg, anchor.lon_deg)) continue;
            }
            std::vector<metadata_record> kept;
            for (const auto& rec : records)
                if (matches(rec, pred)) kept.push_back(rec);
            if (!kept.empty()) {
                for (const auto& rec : kept) out.sources_.insert(rec.source);
                out.size_ += kept.size();
                out.by_cell_.emplace(cell, std::move(kept));
            }
        }
        return out;
    }

private:
    static bool record_order(const metadata_record& a, const metadata_record& b) {
        return std::tie(a.time_start, a.product_id, a.source) <
               std::tie(b.time_start, b.product_id, b.source);
    }

    static bool matches(const metadata_record& rec, const filter_predicate& pred) {
        if (pred.sources &&
            !std::binary_search(pred.sources->begin(), pred.sources->end(), rec.source))
            return false;
        if (pred.time_from || pred.time_to) {
            const utc_seconds rec_end = rec.time_end.value_or(rec.time_start);
            if (pred.time_from && rec_end < *pred.time_from) return false;
            if (pred.time_to && rec.time_start > *pred.time_to) return false;
        }
        const auto under = [&](const std::optional<double>& value, double ceiling) {
            if (!value) return pred.include_unknown;
            return *value < ceiling;
        };
        if (pred.max_cloud && !under(rec.cloud_fraction, *pred.max_cloud)) return false;
        if (pred.max_nodata && !under(rec.nodata_fraction, *pred.max_nodata)) return false;
        return true;
    }

    insert_outcome place(metadata_record&& rec) {
        const cell_id cell = parse_cell(rec.cell);
        auto& bucket = by_cell_[cell];
        const auto pos = std::upper_bound(bucket.begin(), bucket.end(), rec, record_order);
        // duplicate key = (cell, source, product_id, time_start); scan the
        // equal-time neighbourhood
        for (auto it = pos; it != bucket.begin();) {
            --it;
            if (it->time_start != rec.time_start) break;
            if (it->product_id == rec.product_id && it->source == rec.source)
                return insert_outcome::duplicate;
        }
        for (auto it = pos; it != bucket.end() && it->time_start == rec.time_start; ++it)
            if (it->product_id == rec.product_id && it->source == rec.source)
                return insert_outcome::duplicate;
        sources_.insert(rec.source);
        bucket.insert(pos, std::move(rec));
        ++size_;
        return insert_outcome::inserted;
    }

    grid_spec spec_;
    std::map<cell_id, std::vector<metadata_record>> by_cell_;
    std::set<std::string> sources_;
    std::size_t size_ = 0;
};

inline void require_same_grid(const catalog& a, const catalog& b) {
    if (!(a.spec() == b.spec()))
        throw grid_mismatch("catalogs use different grids: spacing " +
                            std::to_string(a.spec().spacing_km) + " vs " +
                            std::to_string(b.spec().spacing_km) + " km, radius " +
                            std::to_string(a.spec().earth_radius_km) + " vs " +
                            std::to_string(b.spec().earth_radius_km) + " km");
}

struct cell_join {
    cell_id cell;
    std::vector<metadata_record> a_records;
    std::vector<metadata_record> b_records;
};

/// Inner join on cell: exactly the cells present in both catalogs, with the
/// full record groups of each, in cell order.
inline std::vector<cell_join> join_by_cell(const catalog& a, const catalog& b) {
    require_same_grid(a, b);
    std::vector<cell_join> out;
    auto ia = a.buckets().begin();
    auto ib = b.buckets().begin();
    while (ia != a.buckets().end() && ib != b.buckets().end()) {
        if (ia->first < ib->first) {
            ++ia;
        } else if (ib->first < ia->first) {
            ++ib;
        } else {
            out.push_back({ia->first, ia->second, ib->second});
            ++ia;
            ++ib;
        }
    }
    return out;
}

struct time_pair {
    cell_id cell;
    metadata_record a;
    metadata_record b;
    std::int64_t delta_seconds = 0;  // signed: b.time_start - a.time_start
};

/// For every record of `a` in a cell shared with `b`, the `b` record closest
/// in start time.  Ties prefer the earlier b time, then the smaller
/// product id.
inline std::vector<time_pair> closest_time_pairing(const catalog& a, const catalog& b) {
    require_same_grid(a, b);
    std::vector<time_pair> out;
    for (const auto& join : join_by_cell(a, b)) {
        for (const auto& ref : join.a_records) {
            const metadata_record* best = nullptr;
            std::int64_t best_abs = 0;
            for (const auto& cand : join.b_records) {
                const std::int64_t abs_delta = std::abs(cand.time_start - ref.time_start);
                if (!best || std::tie(abs_delta, cand.time_start, cand.product_id) <
                                 std::tie(best_abs, best->time_start, best->product_id)) {
                    best = &cand;
                    best_abs = abs_delta;
                }
            }
            out.push_back({join.cell, ref, *best, best->time_start - ref.time_start});
        }
    }
    return out;
}

/// Coverage of a set of cells: the patched area (squares of
/// patch_px * gsd_m metres centered on each point, overlaps counted twice)
/// and the non-overlapping area (one nominal D x D tile per cell).
struct coverage_report {
    std::size_t cell_count = 0;
    double area_with_overlap_km2 = 0;
    double area_without_overlap_km2 = 0;
    std::map<int, std::size_t> per_row_cells;
};

inline coverage_report coverage_from_count(std::size_t cell_count, int patch_px, double gsd_m,
                                           double spacing_km) {
    if (patch_px <= 0 || !(gsd_m > 0) || !(spacing_km > 0))
        throw invalid_parameter("patch and spacing parameters must be positive");
    const double side_km = patch_px * gsd_m / 1000.0;
    coverage_report report;
    report.cell_count = cell_count;
    report.area_with_overlap_km2 = static_cast<double>(cell_count) * side_km * side_km;
    report.area_without_overlap_km2 = static_cast<double>(cell_count) * spacing_km * spacing_km;
    return report;
}

inline coverage_report coverage_stats(const catalog& cat, int patch_px, double gsd_m) {
    coverage_report report =
        coverage_from_count(cat.cell_count(), patch_px, gsd_m, cat.spec().spacing_km);
    for (const auto& [cell, records] : cat.buckets()) {
        (void)records;
        ++report.per_row_cells[cell.row];
    }
    return report;
}

/// Dataset volume in gigapixels: samples * patch_px^2 / 1e9 (per band, at
/// the finest resolution).
inline double volume_gigapixels(std::uint64_t sample_count, std::uint64_t patch_px) {
    return static_cast<double>(sample_count) * static_cast<double>(patch_px) *
           static_cast<double>(patch_px) / 1e9;
}

}  // namespace eogrid
