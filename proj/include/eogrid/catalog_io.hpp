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

#include <charconv>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eogrid/catalog.hpp"
#include "eogrid/csv.hpp"
#include "eogrid/grid.hpp"
#include "eogrid/rng.hpp"
#include "eogrid/timeutil.hpp"

namespace eogrid {

/// Shortest decimal form that round-trips the value.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view text) {
    double v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
    return v;
}

namespace detail {

inline const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> columns = {
        "cell",           "source",          "product_id", "time_start", "time_end",
        "cloud_fraction", "nodata_fraction", "crs_label",  "centre_lat", "centre_lon"};
    return columns;
}

struct field_setter {
    metadata_record& rec;
    std::string error;

    // Empty text means "absent" for every optional column.
    void set(const std::string& name, const std::string& value) {
        if (!error.empty()) return;
        if (name == "cell") {
            rec.cell = value;
        } else if (name == "source") {
            rec.source = value;
        } else if (name == "product_id") {
            rec.product_id = value;
        } else if (name == "time_start") {
            if (value.empty()) {
                error = "missing time_start";
                return;
            }
            if (!set_time(value, rec.time_start)) return;
        } else if (name == "time_end") {
            if (value.empty()) return;
            utc_seconds t;
            if (!set_time(value, t)) return;
            rec.time_end = t;
        } else if (name == "cloud_fraction") {
            set_number(value, rec.cloud_fraction);
        } else if (name == "nodata_fraction") {
            set_number(value, rec.nodata_fraction);
        } else if (name == "crs_label") {
            if (!value.empty()) rec.crs_label = value;
        } else if (name == "centre_lat") {
            set_number(value, rec.centre_lat);
        } else if (name == "centre_lon") {
            set_number(value, rec.centre_lon);
        } else if (!value.empty()) {
            rec.extras.emplace_back(name, value);
        }
    }

private:
    bool set_time(const std::string& value, utc_seconds& out) {
        try {
            out = parse_utc(value);
            return true;
        } catch (const parse_error&) {
            error = "bad timestamp '" + value + "'";
            return false;
        }
    }

    void set_number(const std::string& value, std::optional<double>& out) {
        if (value.empty()) return;
        const auto v = parse_double(value);
        if (!v)
            error = "bad number '" + value + "'";
        else
            out = *v;
    }
};

}  // namespace detail

/// Reads the canonical CSV schema
/// cell,source,product_id,time_start,time_end,cloud_fraction,nodata_fraction,
/// crs_label,centre_lat,centre_lon (header mandatory; unknown columns are
/// preserved as opaque extras).  Bad rows are rejected with a reason and the
/// stream continues; exact duplicates are absorbed silently.
inline ingest_report ingest_csv(catalog& cat, std::istream& in) {
    csv_reader reader(in);
    std::vector<std::string> header;
    if (!reader.read_row(header)) throw parse_error("empty CSV input, expected a header row");
    std::set<std::string> seen(header.begin(), header.end());
    for (const char* required : {"cell", "source", "product_id", "time_start"})
        if (!seen.count(required))
            throw parse_error(std::string("CSV header misses required column '") + required + "'");

    ingest_report report;
    std::vector<std::string> fields;
    while (true) {
        try {
            if (!reader.read_row(fields)) break;
        } catch (const parse_error& e) {
            // framing error swallowed the rest of the stream; report, don't throw
            report.rejected++;
            report.rejects.emplace_back(reader.row_number(), e.what());
            break;
        }
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        const std::size_t row = reader.row_number();
        if (fields.size() != header.size()) {
            report.rejected++;
            report.rejects.emplace_back(row, "expected " + std::to_string(header.size()) +
                                                 " fields, found " + std::to_string(fields.size()));
            continue;
        }
        metadata_record rec;
        detail::field_setter setter{rec, {}};
        for (std::size_t i = 0; i < fields.size(); ++i) setter.set(header[i], fields[i]);
        std::string reason = setter.error;
        if (reason.empty())
            if (const auto violation = record_violation(cat.spec(), rec)) reason = *violation;
        if (!reason.empty()) {
            report.rejected++;
            report.rejects.emplace_back(row, reason);
            continue;
        }
        if (cat.insert(std::move(rec)) == catalog::insert_outcome::inserted)
            report.inserted++;
        else
            report.duplicates++;
    }
    return report;
}

/// JSONL ingest: one record object per line, same field names as the CSV
/// schema; unknown keys become extras.
inline ingest_report ingest_jsonl(catalog& cat, std::istream& in) {
    ingest_report report;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto reject = [&](const std::string& reason) {
            report.rejected++;
            report.rejects.emplace_back(row, reason);
        };
        nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            reject("invalid json");
            continue;
        }
        metadata_record rec;
        detail::field_setter setter{rec, {}};
        for (const auto& [key, value] : doc.items()) {
            if (value.is_null()) continue;
            if (value.is_string())
                setter.set(key, value.get<std::string>());
            else
                setter.set(key, value.dump());
        }
        std::string reason = setter.error;
        if (reason.empty())
            if (const auto violation = record_violation(cat.spec(), rec)) reason = *violation;
        if (!reason.empty()) {
            reject(reason);
            continue;
        }
        if (cat.insert(std::move(rec)) == catalog::insert_outcome::inserted)
            report.inserted++;
        else
            report.duplicates++;
    }
    return report;
}

/// Byte-deterministic CSV export: canonical columns followed by the sorted
/// union of extra keys; records in catalog order.
inline void export_csv(const catalog& cat, std::ostream& os) {
    std::set<std::string> extra_keys;
    cat.for_each([&](const cell_id&, const metadata_record& rec) {
        for (const auto& [key, value] : rec.extras) extra_keys.insert(key);
    });
    std::vector<std::string> header = detail::record_columns();
    header.insert(header.end(), extra_keys.begin(), extra_keys.end());
    csv_write_row(os, header);

    std::vector<std::string> fields;
    cat.for_each([&](const cell_id&, const metadata_record& rec) {
        fields.clear();
        fields.push_back(rec.cell);
        fields.push_back(rec.source);
        fields.push_back(rec.product_id);
        fields.push_back(format_utc(rec.time_start));
        fields.push_back(rec.time_end ? format_utc(*rec.time_end) : "");
        fields.push_back(rec.cloud_fraction ? format_double(*rec.cloud_fraction) : "");
        fields.push_back(rec.nodata_fraction ? format_double(*rec.nodata_fraction) : "");
        fields.push_back(rec.crs_label.value_or(""));
        fields.push_back(rec.centre_lat ? format_double(*rec.centre_lat) : "");
        fields.push_back(rec.centre_lon ? format_double(*rec.centre_lon) : "");
        for (const auto& key : extra_keys) {
            const auto it = std::find_if(rec.extras.begin(), rec.extras.end(),
                                         [&](const auto& kv) { return kv.first == key; });
            fields.push_back(it == rec.extras.end() ? "" : it->second);
        }
        csv_write_row(os, fields);
    });
}

inline nlohmann::ordered_json record_to_json(const metadata_record& rec) {
    nlohmann::ordered_json doc;
    doc["cell"] = rec.cell;
    doc["source"] = rec.source;
    doc["product_id"] = rec.product_id;
    doc["time_start"] = format_utc(rec.time_start);
    if (rec.time_end) doc["time_end"] = format_utc(*rec.time_end);
    if (rec.cloud_fraction) doc["cloud_fraction"] = *rec.cloud_fraction;
    if (rec.nodata_fraction) doc["nodata_fraction"] = *rec.nodata_fraction;
    if (rec.crs_label) doc["crs_label"] = *rec.crs_label;
    if (rec.centre_lat) doc["centre_lat"] = *rec.centre_lat;
    if (rec.centre_lon) doc["centre_lon"] = *rec.centre_lon;
    for (const auto& [key, value] : rec.extras) doc[key] = value;
    return doc;
}

inline void export_jsonl(const catalog& cat, std::ostream& os) {
    cat.for_each(
        [&](const cell_id&, const metadata_record& rec) { os << record_to_json(rec).dump() << '\n'; });
}

/// A portable dataset subset: the (cell, source) pairs that reproduce it
/// against any catalog built on the same grid.
struct split_manifest {
    std::string name;
    double spacing_km = default_spacing_km;
    double earth_radius_km = default_earth_radius_km;
    std::vector<std::pair<std::string, std::string>> entries;  // (cell, source)
    std::string created;
};

inline std::uint64_t spec_fingerprint(double spacing_km, double earth_radius_km) {
    return fnv1a64(format_double(spacing_km) + "/" + format_double(earth_radius_km));
}

inline split_manifest export_split(const catalog& cat, std::string name, const filter_predicate& pred,
                                   std::string created) {
    const catalog view = cat.filter(pred);
    split_manifest manifest;
    manifest.name = std::move(name);
    manifest.spacing_km = cat.spec().spacing_km;
    manifest.earth_radius_km = cat.spec().earth_radius_km;
    manifest.created = std::move(created);
    std::set<std::pair<cell_id, std::string>> keys;
    view.for_each(
        [&](const cell_id& cell, const metadata_record& rec) { keys.emplace(cell, rec.source); });
    for (const auto& [cell, source] : keys) manifest.entries.emplace_back(format_cell(cell), source);
    return manifest;
}

struct split_apply_result {
    catalog view;
    std::vector<std::string> warnings;
};

/// Exactly the records whose (cell, source) appear in the manifest.  Entries
/// that match nothing are reported as warnings, never fatal; a manifest from
/// a different grid is refused.
inline split_apply_result apply_split(const catalog& cat, const split_manifest& manifest) {
    if (manifest.spacing_km != cat.spec().spacing_km ||
        manifest.earth_radius_km != cat.spec().earth_radius_km)
        throw grid_mismatch("split manifest fingerprint " +
                            std::to_string(spec_fingerprint(manifest.spacing_km, manifest.earth_radius_km)) +
                            " does not match catalog fingerprint " +
                            std::to_string(spec_fingerprint(cat.spec().spacing_km,
                                                            cat.spec().earth_radius_km)));
    split_apply_result result{catalog(cat.spec()), {}};
    std::set<std::pair<cell_id, std::string>> wanted;
    for (const auto& [cell_text, source] : manifest.entries) {
        cell_id cell;
        try {
            cell = parse_cell(cell_text);
            cell_to_coords(cat.spec(), cell);
        } catch (const error&) {
            result.warnings.push_back("unknown cell '" + cell_text + "'");
            continue;
        }
        if (!wanted.emplace(cell, source).second) continue;
        const auto* bucket = cat.records(cell);
        bool any = false;
        if (bucket)
            for (const auto& rec : *bucket)
                if (rec.source == source) {
                    result.view.insert(rec);
                    any = true;
                }
        if (!any)
            result.warnings.push_back("no records for " + format_cell(cell) + " / " + source);
    }
    return result;
}

inline void write_split(const split_manifest& manifest, std::ostream& os) {
    nlohmann::ordered_json doc;
    doc["name"] = manifest.name;
    doc["spec"] = {{"spacing_km", manifest.spacing_km}, {"earth_radius_km", manifest.earth_radius_km}};
    auto& entries = doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& [cell, source] : manifest.entries)
        entries.push_back({{"cell", cell}, {"source", source}});
    doc["created"] = manifest.created;
    os << doc.dump(2) << '\n';
}

inline split_manifest read_split(std::istream& in) {
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("entries") ||
        !doc["entries"].is_array() || !doc.contains("spec"))
        throw parse_error("malformed split manifest");
    try {
        split_manifest manifest;
        manifest.name = doc.value("name", "");
        manifest.created = doc.value("created", "");
        const auto& spec = doc["spec"];
        if (!spec.contains("spacing_km") || !spec.contains("earth_radius_km"))
            throw parse_error("split manifest misses grid parameters");
        manifest.spacing_km = spec["spacing_km"].get<double>();
        manifest.earth_radius_km = spec["earth_radius_km"].get<double>();
        for (const auto& entry : doc["entries"]) {
            if (!entry.contains("cell") || !entry.contains("source"))
                throw parse_error("split manifest entry misses cell or source");
            manifest.entries.emplace_back(entry["cell"].get<std::string>(),
                                          entry["source"].get<std::string>());
        }
        return manifest;
    } catch (const nlohmann::json::exception&) {
        throw parse_error("malformed split manifest");
    }
}

/// Item-shaped JSON view of one record: id, cell-bounds Polygon geometry,
/// bbox and the common datetime / cloud-cover properties.  A pragmatic
/// subset, not a validated STAC implementation.
inline nlohmann::ordered_json stac_item(const grid_spec& spec, const metadata_record& rec) {
    const cell_id cell = parse_cell(rec.cell);
    const cell_footprint fp = footprint(spec, cell);
    const geo_box& b = fp.nominal_bounds;

    nlohmann::ordered_json item;
    item["type"] = "Feature";
    item["stac_version"] = "1.0.0";
    item["id"] = rec.source + "_" + rec.cell + "_" + rec.product_id;
    item["geometry"] = {{"type", "Polygon"},
                        {"coordinates",
                         {{{b.lon_min, b.lat_min},
                           {b.lon_max, b.lat_min},
                           {b.lon_max, b.lat_max},
                           {b.lon_min, b.lat_max},
                           {b.lon_min, b.lat_min}}}}};
    item["bbox"] = {b.lon_min, b.lat_min, b.lon_max, b.lat_max};
    auto& props = item["properties"];
    if (rec.time_end) {
        props["start_datetime"] = format_utc(rec.time_start);
        props["end_datetime"] = format_utc(*rec.time_end);
    } else {
        props["datetime"] = format_utc(rec.time_start);
    }
    props["grid:cell"] = rec.cell;
    if (rec.cloud_fraction) props["eo:cloud_cover"] = *rec.cloud_fraction * 100.0;
    return item;
}

/// One STAC-shaped item per line, in catalog order.
inline void export_stac_items(const catalog& cat, std::ostream& os) {
    cat.for_each([&](const cell_id&, const metadata_record& rec) {
        os << stac_item(cat.spec(), rec).dump() << '\n';
    });
}

}  // namespace eogrid
