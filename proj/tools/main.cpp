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

// Command line front end.  One binary, verb-noun subcommands; tabular data
// goes to stdout as CSV, records as JSONL, geometry as GeoJSON, diagnostics
// to stderr.  Exit codes: 0 success, 1 domain errors, 2 usage errors.

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eogrid/eogrid.hpp"

namespace {

using nlohmann::ordered_json;

template <class Fn>
void with_input(const std::string& path, Fn&& fn) {
    if (path == "-") {
        fn(std::cin);
        return;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw eogrid::invalid_parameter("cannot open '" + path + "' for reading");
    fn(in);
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw eogrid::invalid_parameter("cannot open '" + path + "' for writing");
    fn(out);
}

std::vector<double> parse_doubles(const std::string& text, std::size_t expected, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto v = eogrid::parse_double(token);
        if (!v) throw eogrid::invalid_parameter(std::string(what) + ": bad number '" + token + "'");
        out.push_back(*v);
    }
    if (expected != 0 && out.size() != expected)
        throw eogrid::invalid_parameter(std::string(what) + ": expected " + std::to_string(expected) +
                                        " comma-separated numbers");
    return out;
}

eogrid::geo_box parse_box(const std::string& text) {
    const auto v = parse_doubles(text, 4, "--bbox lat_min,lat_max,lon_min,lon_max");
    return {v[0], v[1], v[2], v[3]};
}

std::pair<double, double> parse_lat_lon(const std::string& text, const char* what) {
    const auto v = parse_doubles(text, 2, what);
    return {v[0], v[1]};
}

// ---------------------------------------------------------------------------
// catalog file plumbing

enum class record_format { auto_detect, csv, jsonl };

record_format detect_format(const std::string& path, record_format requested) {
    if (requested != record_format::auto_detect) return requested;
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return record_format::csv;
    if (path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0) return record_format::jsonl;
    if (path.size() >= 7 && path.compare(path.size() - 7, 7, ".ndjson") == 0) return record_format::jsonl;
    if (path == "-") throw eogrid::invalid_parameter("cannot auto-detect format of stdin, pass --format");
    throw eogrid::invalid_parameter("cannot auto-detect format of '" + path +
                                    "', pass csv or jsonl explicitly");
}

record_format parse_format(const std::string& name) {
    if (name == "auto") return record_format::auto_detect;
    if (name == "csv") return record_format::csv;
    if (name == "jsonl") return record_format::jsonl;
    throw eogrid::invalid_parameter("unknown format '" + name + "'");
}

void report_ingest(const eogrid::ingest_report& report, const std::string& path, bool quiet) {
    if (quiet) return;
    std::cerr << path << ": " << report.inserted << " inserted, " << report.rejected << " rejected, "
              << report.duplicates << " duplicates\n";
    for (const auto& [row, reason] : report.rejects)
        std::cerr << path << " row " << row << ": " << reason << '\n';
}

eogrid::catalog load_catalog(const eogrid::grid_spec& spec, const std::vector<std::string>& paths,
                             record_format requested, bool quiet) {
    eogrid::catalog cat(spec);
    for (const std::string& path : paths) {
        const record_format format = detect_format(path, requested);
        with_input(path, [&](std::istream& in) {
            const auto report = format == record_format::csv ? eogrid::ingest_csv(cat, in)
                                                             : eogrid::ingest_jsonl(cat, in);
            report_ingest(report, path, quiet);
        });
    }
    return cat;
}

void write_catalog(const eogrid::catalog& cat, const std::string& path, record_format requested) {
    record_format format;
    try {
        format = detect_format(path, requested);
    } catch (const eogrid::invalid_parameter&) {
        format = record_format::csv;  // default for stdout / unknown extensions
    }
    with_output(path, [&](std::ostream& os) {
        if (format == record_format::jsonl)
            eogrid::export_jsonl(cat, os);
        else
            eogrid::export_csv(cat, os);
    });
}

ordered_json record_json(const eogrid::metadata_record& rec) { return eogrid::record_to_json(rec); }

// shared filter flags
struct filter_flags {
    std::string sources, from, to, bbox, cells, cells_file;
    double max_cloud = -1, max_nodata = -1;
    bool include_unknown = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--sources", sources, "Keep only these comma-separated sources");
        cmd->add_option("--from", from, "Keep records overlapping [--from, --to] (ISO-8601 UTC)");
        cmd->add_option("--to", to, "Upper bound of the time window (ISO-8601 UTC)");
        cmd->add_option("--max-cloud", max_cloud, "Keep records with cloud_fraction strictly below");
        cmd->add_option("--max-nodata", max_nodata, "Keep records with nodata_fraction strictly below");
        cmd->add_flag("--include-unknown", include_unknown,
                      "Let records without a fraction pass --max-cloud / --max-nodata");
        cmd->add_option("--bbox", bbox, "lat_min,lat_max,lon_min,lon_max cell filter");
        cmd->add_option("--cells", cells, "Comma-separated cell ids to keep");
        cmd->add_option("--cells-file", cells_file, "File with one cell id per line");
    }

    eogrid::filter_predicate predicate() const {
        eogrid::filter_predicate pred;
        if (!sources.empty()) {
            pred.sources.emplace();
            std::stringstream ss(sources);
            std::string token;
            while (std::getline(ss, token, ',')) pred.sources->push_back(token);
        }
        if (!from.empty()) pred.time_from = eogrid::parse_utc(from);
        if (!to.empty()) pred.time_to = eogrid::parse_utc(to);
        if (max_cloud >= 0) pred.max_cloud = max_cloud;
        if (max_nodata >= 0) pred.max_nodata = max_nodata;
        pred.include_unknown = include_unknown;
        if (!bbox.empty()) pred.bbox = parse_box(bbox);
        std::vector<eogrid::cell_id> cell_list;
        if (!cells.empty()) {
            std::stringstream ss(cells);
            std::string token;
            while (std::getline(ss, token, ',')) cell_list.push_back(eogrid::parse_cell(token));
        }
        if (!cells_file.empty()) {
            with_input(cells_file, [&](std::istream& in) {
                std::string line;
                while (std::getline(in, line)) {
                    if (!line.empty() && line.back() == '\r') line.pop_back();
                    if (line.empty() || line[0] == '#') continue;
                    cell_list.push_back(eogrid::parse_cell(line));
                }
            });
        }
        if (!cell_list.empty()) pred.cells = std::move(cell_list);
        return pred;
    }
};

// Defer the first byte of output until the query validated its arguments,
// so error runs leave stdout empty.
struct lazy_grid_csv {
    std::ostream& os;
    bool started = false;
    void row(const eogrid::grid_point& p) {
        if (!started) {
            eogrid::write_grid_csv_header(os);
            started = true;
        }
        eogrid::write_grid_csv_row(os, p);
    }
    void finish() {
        if (!started) eogrid::write_grid_csv_header(os);
    }
};

struct lazy_geojson {
    std::ostream& os;
    std::optional<eogrid::geojson_writer> writer;
    void point(const eogrid::grid_point& p) {
        if (!writer) writer.emplace(os);
        writer->point(p);
    }
    void finish() {
        if (!writer) writer.emplace(os);
        writer->finish();
    }
};

std::vector<eogrid::cell_id> read_cells_file(const std::string& path) {
    std::vector<eogrid::cell_id> cells;
    with_input(path, [&](std::istream& in) {
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            cells.push_back(eogrid::parse_cell(line));
        }
    });
    return cells;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"eogrid: deterministic global sampling grid, metadata catalog and scene sampler"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string("eogrid ") + eogrid::version);

    double spacing_km = eogrid::default_spacing_km;
    double earth_radius_km = eogrid::default_earth_radius_km;
    bool quiet = false;
    app.add_option("--spacing-km", spacing_km, "Nominal grid spacing in kilometres")
        ->capture_default_str();
    app.add_option("--earth-radius-km", earth_radius_km, "Sphere radius in kilometres")
        ->default_str("6378.137");
    app.add_flag("--quiet", quiet, "Suppress diagnostics on stderr");

    const auto make_spec = [&] { return eogrid::grid_spec::create(spacing_km, earth_radius_km); };
    int exit_status = 0;

    // ----------------------------------------------------------------- cell
    auto* cell = app.add_subcommand("cell", "Encode, decode and describe single grid cells");
    cell->require_subcommand(1);

    {
        auto* encode = cell->add_subcommand("encode", "Cell id owning a coordinate");
        auto lat = std::make_shared<double>(0);
        auto lon = std::make_shared<double>(0);
        encode->add_option("--lat", *lat, "Latitude in degrees")->required();
        encode->add_option("--lon", *lon, "Longitude in degrees")->required();
        encode->callback([&, lat, lon] {
            std::cout << eogrid::format_cell(eogrid::coords_to_cell(make_spec(), *lat, *lon)) << '\n';
        });
    }
    {
        auto* decode = cell->add_subcommand("decode", "Grid point of a cell id");
        auto id = std::make_shared<std::string>();
        decode->add_option("id", *id, "Cell id, e.g. 201U_54L")->required();
        decode->callback([&, id] {
            const auto point = eogrid::cell_to_coords(make_spec(), eogrid::parse_cell(*id));
            eogrid::write_grid_csv_header(std::cout);
            eogrid::write_grid_csv_row(std::cout, point);
        });
    }
    {
        auto* foot = cell->add_subcommand("footprint", "Nominal cell bounds and optional patch square");
        auto id = std::make_shared<std::string>();
        auto px = std::make_shared<int>(0);
        auto gsd = std::make_shared<double>(0);
        auto format = std::make_shared<std::string>("geojson");
        foot->add_option("id", *id, "Cell id")->required();
        foot->add_option("--patch-px", *px, "Patch edge in pixels");
        foot->add_option("--gsd-m", *gsd, "Ground sample distance in metres");
        foot->add_option("--format", *format, "geojson or csv")
            ->check(CLI::IsMember({"geojson", "csv"}))
            ->capture_default_str();
        foot->callback([&, id, px, gsd, format] {
            std::optional<int> patch_px;
            std::optional<double> gsd_m;
            if (*px != 0) patch_px = *px;
            if (*gsd != 0) gsd_m = *gsd;
            const auto fp = eogrid::footprint(make_spec(), eogrid::parse_cell(*id), patch_px, gsd_m);
            if (*format == "csv") {
                std::cout << "kind,lat_min,lat_max,lon_min,lon_max\n";
                const auto row = [&](const char* kind, const eogrid::geo_box& b) {
                    std::cout << kind << ',' << eogrid::format_coord(b.lat_min) << ','
                              << eogrid::format_coord(b.lat_max) << ','
                              << eogrid::format_coord(b.lon_min) << ','
                              << eogrid::format_coord(b.lon_max) << '\n';
                };
                row("nominal", fp.nominal_bounds);
                if (fp.patch_bounds) row("patch", *fp.patch_bounds);
            } else {
                eogrid::geojson_writer writer(std::cout);
                writer.box_polygon(fp.cell, fp.nominal_bounds, "nominal");
                if (fp.patch_bounds) writer.box_polygon(fp.cell, *fp.patch_bounds, "patch");
                writer.finish();
            }
        });
    }

    // ----------------------------------------------------------------- grid
    auto* grid = app.add_subcommand("grid", "Whole-grid queries");
    grid->require_subcommand(1);

    {
        auto* info = grid->add_subcommand("info", "Grid constants as JSON");
        auto row = std::make_shared<int>(INT32_MIN);
        info->add_option("--row", *row, "Also describe this row");
        info->callback([&, row] {
            const auto spec = make_spec();
            ordered_json doc;
            doc["spacing_km"] = spec.spacing_km;
            doc["earth_radius_km"] = spec.earth_radius_km;
            doc["n_rows"] = spec.n_rows;
            doc["lat_spacing_deg"] = spec.lat_spacing_deg;
            doc["row_range"] = {spec.row_min(), spec.row_max()};
            long long total = 0;
            for (int r = spec.row_min(); r <= spec.row_max(); ++r) total += eogrid::num_cols(spec, r);
            doc["total_cells"] = total;
            if (*row != INT32_MIN) {
                ordered_json rj;
                rj["row"] = *row;
                rj["lat_deg"] = eogrid::lat_of_row(spec, *row);
                rj["n_cols"] = eogrid::num_cols(spec, *row);
                rj["lon_spacing_deg"] = eogrid::lon_spacing_deg(spec, *row);
                doc["row_info"] = std::move(rj);
            }
            std::cout << doc.dump(2) << '\n';
        });
    }
    {
        auto* points = grid->add_subcommand("points", "Grid points inside a bounding box");
        auto bbox = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("csv");
        points->add_option("--bbox", *bbox, "lat_min,lat_max,lon_min,lon_max (lon wraps when min > max)")
            ->required();
        points->add_option("--format", *format, "csv or geojson")
            ->check(CLI::IsMember({"csv", "geojson"}))
            ->capture_default_str();
        points->callback([&, bbox, format] {
            const auto spec = make_spec();
            const auto box = parse_box(*bbox);
            if (*format == "csv") {
                lazy_grid_csv out{std::cout};
                eogrid::for_each_cell_in_bbox(spec, box,
                                              [&](const eogrid::grid_point& p) { out.row(p); });
                out.finish();
            } else {
                lazy_geojson out{std::cout, {}};
                eogrid::for_each_cell_in_bbox(spec, box,
                                              [&](const eogrid::grid_point& p) { out.point(p); });
                out.finish();
            }
        });
    }
    {
        auto* radius = grid->add_subcommand("radius", "Grid points within a distance of a center");
        auto center = std::make_shared<std::string>();
        auto km = std::make_shared<double>(0);
        auto format = std::make_shared<std::string>("csv");
        radius->add_option("--center", *center, "lat,lon in degrees")->required();
        radius->add_option("--km", *km, "Search radius in kilometres")->required();
        radius->add_option("--format", *format, "csv or geojson")
            ->check(CLI::IsMember({"csv", "geojson"}))
            ->capture_default_str();
        radius->callback([&, center, km, format] {
            const auto spec = make_spec();
            const auto [lat, lon] = parse_lat_lon(*center, "--center lat,lon");
            if (*format == "csv") {
                lazy_grid_csv out{std::cout};
                eogrid::for_each_cell_in_radius(spec, lat, lon, *km,
                                                [&](const eogrid::grid_point& p) { out.row(p); });
                out.finish();
            } else {
                lazy_geojson out{std::cout, {}};
                eogrid::for_each_cell_in_radius(spec, lat, lon, *km,
                                                [&](const eogrid::grid_point& p) { out.point(p); });
                out.finish();
            }
        });
    }
    {
        auto* distance = grid->add_subcommand("distance", "Great-circle distance between two coordinates");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        distance->add_option("--a", *a, "lat,lon in degrees")->required();
        distance->add_option("--b", *b, "lat,lon in degrees")->required();
        distance->callback([&, a, b] {
            const auto [lat1, lon1] = parse_lat_lon(*a, "--a lat,lon");
            const auto [lat2, lon2] = parse_lat_lon(*b, "--b lat,lon");
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f\n",
                          eogrid::great_circle_km(lat1, lon1, lat2, lon2, earth_radius_km));
            std::cout << buf;
        });
    }
    {
        auto* check = grid->add_subcommand(
            "check-patch", "Check whether a patch size aligns whole pixels across band resolutions");
        auto px = std::make_shared<int>(0);
        auto gsd = std::make_shared<std::string>("10,20,60");
        check->add_option("--px", *px, "Patch edge in pixels at the finest resolution")->required();
        check->add_option("--gsd", *gsd, "Comma-separated ground sample distances in metres")
            ->capture_default_str();
        check->callback([&, px, gsd] {
            const auto gsds = parse_doubles(*gsd, 0, "--gsd");
            const auto report = eogrid::check_patch_alignment(*px, gsds);
            std::cout << "gsd_m,pixels,aligned\n";
            for (const auto& row : report.rows)
                std::cout << eogrid::format_double(row.gsd_m) << ',' << eogrid::format_double(row.pixels)
                          << ',' << (row.integral ? "true" : "false") << '\n';
            if (!quiet)
                std::cerr << "alignment: " << (report.pass ? "pass" : "fail") << '\n';
            if (!report.pass) exit_status = 1;
        });
    }

    // -------------------------------------------------------------- catalog
    auto* cat_cmd = app.add_subcommand("catalog", "Ingest, filter, combine and export metadata");
    cat_cmd->require_subcommand(1);

    {
        auto* ingest = cat_cmd->add_subcommand("ingest", "Validate and normalize metadata files");
        auto inputs = std::make_shared<std::vector<std::string>>();
        auto in_format = std::make_shared<std::string>("auto");
        auto out = std::make_shared<std::string>("-");
        auto out_format = std::make_shared<std::string>("auto");
        ingest->add_option("--in", *inputs, "Input file(s), '-' for stdin")->required();
        ingest->add_option("--in-format", *in_format, "auto, csv or jsonl")->capture_default_str();
        ingest->add_option("--out", *out, "Output file, '-' for stdout")->capture_default_str();
        ingest->add_option("--out-format", *out_format, "auto, csv or jsonl")->capture_default_str();
        ingest->callback([&, inputs, in_format, out, out_format] {
            const auto cat = load_catalog(make_spec(), *inputs, parse_format(*in_format), quiet);
            write_catalog(cat, *out, parse_format(*out_format));
        });
    }
    {
        auto* filter = cat_cmd->add_subcommand("filter", "Subset a catalog by metadata predicates");
        auto in = std::make_shared<std::string>();
        auto in_format = std::make_shared<std::string>("auto");
        auto out = std::make_shared<std::string>("-");
        auto out_format = std::make_shared<std::string>("auto");
        auto flags = std::make_shared<filter_flags>();
        filter->add_option("--in", *in, "Input catalog file")->required();
        filter->add_option("--in-format", *in_format, "auto, csv or jsonl")->capture_default_str();
        filter->add_option("--out", *out, "Output file")->capture_default_str();
        filter->add_option("--out-format", *out_format, "auto, csv or jsonl")->capture_default_str();
        flags->attach(filter);
        filter->callback([&, in, in_format, out, out_format, flags] {
            const auto cat = load_catalog(make_spec(), {*in}, parse_format(*in_format), quiet);
            write_catalog(cat.filter(flags->predicate()), *out, parse_format(*out_format));
        });
    }
    {
        auto* join = cat_cmd->add_subcommand("join", "Inner join of two catalogs on cell");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        join->add_option("--a", *a, "Left catalog file")->required();
        join->add_option("--b", *b, "Right catalog file")->required();
        join->add_option("--out", *out, "Output JSONL file")->capture_default_str();
        join->callback([&, a, b, out] {
            const auto spec = make_spec();
            const auto cat_a = load_catalog(spec, {*a}, record_format::auto_detect, quiet);
            const auto cat_b = load_catalog(spec, {*b}, record_format::auto_detect, quiet);
            const auto joined = eogrid::join_by_cell(cat_a, cat_b);
            with_output(*out, [&](std::ostream& os) {
                for (const auto& row : joined) {
                    ordered_json doc;
                    doc["cell"] = eogrid::format_cell(row.cell);
                    auto& ja = doc["a"] = ordered_json::array();
                    for (const auto& rec : row.a_records) ja.push_back(record_json(rec));
                    auto& jb = doc["b"] = ordered_json::array();
                    for (const auto& rec : row.b_records) jb.push_back(record_json(rec));
                    os << doc.dump() << '\n';
                }
            });
        });
    }
    {
        auto* pair = cat_cmd->add_subcommand(
            "pair", "For each record of --a, the closest-in-time record of --b in the same cell");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        pair->add_option("--a", *a, "Reference catalog file")->required();
        pair->add_option("--b", *b, "Candidate catalog file")->required();
        pair->add_option("--out", *out, "Output JSONL file")->capture_default_str();
        pair->callback([&, a, b, out] {
            const auto spec = make_spec();
            const auto cat_a = load_catalog(spec, {*a}, record_format::auto_detect, quiet);
            const auto cat_b = load_catalog(spec, {*b}, record_format::auto_detect, quiet);
            const auto pairs = eogrid::closest_time_pairing(cat_a, cat_b);
            with_output(*out, [&](std::ostream& os) {
                for (const auto& row : pairs) {
                    ordered_json doc;
                    doc["cell"] = eogrid::format_cell(row.cell);
                    doc["a"] = record_json(row.a);
                    doc["b"] = record_json(row.b);
                    doc["delta_seconds"] = row.delta_seconds;
                    os << doc.dump() << '\n';
                }
            });
        });
    }
    {
        auto* stats = cat_cmd->add_subcommand("stats", "Coverage area and pixel-volume arithmetic");
        auto in = std::make_shared<std::string>();
        auto count = std::make_shared<long long>(-1);
        auto patch_px = std::make_shared<int>(0);
        auto gsd_m = std::make_shared<double>(0);
        stats->add_option("--in", *in, "Catalog file to measure");
        stats->add_option("--count", *count, "Use this sample count instead of a catalog");
        stats->add_option("--patch-px", *patch_px, "Patch edge in pixels")->required();
        stats->add_option("--gsd-m", *gsd_m, "Ground sample distance in metres");
        stats->callback([&, in, count, patch_px, gsd_m] {
            if ((*count >= 0) == !in->empty())
                throw eogrid::invalid_parameter("pass exactly one of --count or --in");
            if (*count >= 0) {
                if (*gsd_m > 0) {
                    const auto report =
                        eogrid::coverage_from_count(static_cast<std::size_t>(*count), *patch_px,
                                                    *gsd_m, spacing_km);
                    ordered_json doc;
                    doc["cell_count"] = report.cell_count;
                    doc["area_with_overlap_km2"] = report.area_with_overlap_km2;
                    doc["area_without_overlap_km2"] = report.area_without_overlap_km2;
                    doc["volume_gigapixels"] = eogrid::volume_gigapixels(
                        static_cast<std::uint64_t>(*count), static_cast<std::uint64_t>(*patch_px));
                    std::cout << doc.dump(2) << '\n';
                } else {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "%.1f\n",
                                  eogrid::volume_gigapixels(static_cast<std::uint64_t>(*count),
                                                            static_cast<std::uint64_t>(*patch_px)));
                    std::cout << buf;
                }
                return;
            }
            if (!(*gsd_m > 0))
                throw eogrid::invalid_parameter("--gsd-m is required with --in");
            const auto cat = load_catalog(make_spec(), {*in}, record_format::auto_detect, quiet);
            const auto report = eogrid::coverage_stats(cat, *patch_px, *gsd_m);
            ordered_json doc;
            doc["record_count"] = cat.size();
            doc["cell_count"] = report.cell_count;
            doc["area_with_overlap_km2"] = report.area_with_overlap_km2;
            doc["area_without_overlap_km2"] = report.area_without_overlap_km2;
            doc["volume_gigapixels"] =
                eogrid::volume_gigapixels(cat.size(), static_cast<std::uint64_t>(*patch_px));
            auto& per_row = doc["per_row_cells"] = ordered_json::object();
            for (const auto& [row, cells] : report.per_row_cells)
                per_row[std::to_string(row)] = cells;
            std::cout << doc.dump(2) << '\n';
        });
    }
    {
        auto* split = cat_cmd->add_subcommand("split", "Export and apply reproducible subset manifests");
        split->require_subcommand(1);
        {
            auto* exp = split->add_subcommand("export", "Write the (cell, source) list of a filtered view");
            auto in = std::make_shared<std::string>();
            auto name = std::make_shared<std::string>();
            auto out = std::make_shared<std::string>("-");
            auto created = std::make_shared<std::string>("");
            auto flags = std::make_shared<filter_flags>();
            exp->add_option("--in", *in, "Input catalog file")->required();
            exp->add_option("--name", *name, "Manifest name")->required();
            exp->add_option("--out", *out, "Manifest file")->capture_default_str();
            exp->add_option("--created", *created, "Timestamp recorded in the manifest");
            flags->attach(exp);
            exp->callback([&, in, name, out, created, flags] {
                const auto cat = load_catalog(make_spec(), {*in}, record_format::auto_detect, quiet);
                const auto manifest = eogrid::export_split(cat, *name, flags->predicate(), *created);
                with_output(*out, [&](std::ostream& os) { eogrid::write_split(manifest, os); });
            });
        }
        {
            auto* apply = split->add_subcommand("apply", "Reproduce the subset a manifest describes");
            auto in = std::make_shared<std::string>();
            auto manifest_path = std::make_shared<std::string>();
            auto out = std::make_shared<std::string>("-");
            auto out_format = std::make_shared<std::string>("auto");
            apply->add_option("--in", *in, "Input catalog file")->required();
            apply->add_option("--manifest", *manifest_path, "Manifest file")->required();
            apply->add_option("--out", *out, "Output file")->capture_default_str();
            apply->add_option("--out-format", *out_format, "auto, csv or jsonl")->capture_default_str();
            apply->callback([&, in, manifest_path, out, out_format] {
                const auto cat = load_catalog(make_spec(), {*in}, record_format::auto_detect, quiet);
                eogrid::split_manifest manifest;
                with_input(*manifest_path,
                           [&](std::istream& is) { manifest = eogrid::read_split(is); });
                auto result = eogrid::apply_split(cat, manifest);
                for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << '\n';
                write_catalog(result.view, *out, parse_format(*out_format));
            });
        }
    }
    {
        auto* stac = cat_cmd->add_subcommand("stac", "Item-shaped JSON export");
        stac->require_subcommand(1);
        auto* exp = stac->add_subcommand("export", "One item per record, JSONL");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        exp->add_option("--in", *in, "Input catalog file")->required();
        exp->add_option("--out", *out, "Output file")->capture_default_str();
        exp->callback([&, in, out] {
            const auto cat = load_catalog(make_spec(), {*in}, record_format::auto_detect, quiet);
            with_output(*out, [&](std::ostream& os) { eogrid::export_stac_items(cat, os); });
        });
    }

    // --------------------------------------------------------------- sample
    auto* sample = app.add_subcommand("sample", "Cloud-driven scene selection campaigns");
    sample->require_subcommand(1);

    const auto print_stats = [](const eogrid::campaign_statistics& stats) {
        ordered_json doc;
        doc["selected_count"] = stats.selected_count;
        doc["unsampled_count"] = stats.unsampled_count;
        if (stats.mean_cloud) doc["mean_cloud"] = *stats.mean_cloud;
        if (stats.median_cloud) doc["median_cloud"] = *stats.median_cloud;
        if (stats.fallback_rate) doc["fallback_rate"] = *stats.fallback_rate;
        std::cout << doc.dump(2) << '\n';
    };

    {
        auto* run = sample->add_subcommand("run", "Select one scene per cell from a provider file");
        auto cells_path = std::make_shared<std::string>();
        auto bbox = std::make_shared<std::string>();
        auto provider_path = std::make_shared<std::string>();
        auto source = std::make_shared<std::string>("synthetic");
        auto seed = std::make_shared<std::uint64_t>(0);
        auto accept = std::make_shared<double>(0.25);
        auto fallback = std::make_shared<double>(0.50);
        auto after = std::make_shared<int>(50);
        auto window_months = std::make_shared<int>(4);
        auto max_nodata = std::make_shared<double>(0.05);
        auto start = std::make_shared<std::string>();
        auto end = std::make_shared<std::string>();
        auto threads = std::make_shared<unsigned>(1);
        auto out = std::make_shared<std::string>("-");
        auto catalog_out = std::make_shared<std::string>();
        auto* cells_opt = run->add_option("--cells", *cells_path, "File with one cell id per line");
        run->add_option("--bbox", *bbox, "Sample every grid point in this box instead of --cells")
            ->excludes(cells_opt);
        run->add_option("--provider", *provider_path, "Scene provider JSONL file")->required();
        run->add_option("--source", *source, "Source label for emitted records")->capture_default_str();
        run->add_option("--seed", *seed, "Campaign seed; all randomness flows from it")
            ->capture_default_str();
        run->add_option("--accept", *accept, "Accept refined cloud strictly below this fraction")
            ->capture_default_str();
        run->add_option("--fallback", *fallback, "Relaxed cloud ceiling once --after scenes were tried")
            ->capture_default_str();
        run->add_option("--after", *after, "Inspections before the fallback ceiling applies")
            ->capture_default_str();
        run->add_option("--window-months", *window_months, "Length of the sampled time window")
            ->capture_default_str();
        run->add_option("--max-nodata", *max_nodata, "Largest acceptable nodata fraction")
            ->capture_default_str();
        run->add_option("--start", *start, "Availability range start (ISO-8601 UTC)");
        run->add_option("--end", *end, "Availability range end (ISO-8601 UTC)");
        run->add_option("--threads", *threads, "Worker threads; results are identical for any count")
            ->capture_default_str();
        run->add_option("--out", *out, "Results JSONL file")->capture_default_str();
        run->add_option("--catalog-out", *catalog_out, "Also write selected scenes as a catalog CSV");
        run->callback([&, cells_path, bbox, provider_path, source, seed, accept, fallback, after,
                       window_months, max_nodata, start, end, threads, out, catalog_out] {
            const auto spec = make_spec();
            if (cells_path->empty() == bbox->empty())
                throw eogrid::invalid_parameter("pass exactly one of --cells or --bbox");
            std::vector<eogrid::cell_id> cells;
            if (!cells_path->empty()) {
                cells = read_cells_file(*cells_path);
            } else {
                eogrid::for_each_cell_in_bbox(spec, parse_box(*bbox), [&](const eogrid::grid_point& p) {
                    cells.push_back(p.cell);
                });
            }
            eogrid::jsonl_scene_provider provider(*source);
            with_input(*provider_path, [&](std::istream& in) {
                provider = eogrid::jsonl_scene_provider::from_stream(in, *source);
            });

            eogrid::sampler_config config;
            config.window_months = *window_months;
            config.accept_cloud = *accept;
            config.fallback_cloud = *fallback;
            config.fallback_after = *after;
            config.max_nodata = *max_nodata;
            config.seed = *seed;
            if (!start->empty() && !end->empty()) {
                config.availability_start = eogrid::parse_utc(*start);
                config.availability_end = eogrid::parse_utc(*end);
            } else if (start->empty() && end->empty()) {
                const auto bounds = provider.time_bounds();
                if (!bounds)
                    throw eogrid::invalid_parameter(
                        "provider has no scenes; pass --start and --end explicitly");
                config.availability_start =
                    (bounds->first / eogrid::seconds_per_day) * eogrid::seconds_per_day;
                config.availability_end = bounds->second + eogrid::seconds_per_day;
                // widen so at least one whole window fits
                config.availability_end =
                    std::max(config.availability_end, config.window_end_of(config.first_start_day()));
            } else {
                throw eogrid::invalid_parameter("--start and --end must be given together");
            }

            const auto campaign = eogrid::run_campaign(spec, cells, provider, config, *threads);
            with_output(*out, [&](std::ostream& os) {
                eogrid::write_results_jsonl(campaign.results, os);
            });
            if (!catalog_out->empty()) {
                eogrid::catalog cat(spec);
                for (const auto& rec : campaign.records) cat.insert(rec);
                with_output(*catalog_out, [&](std::ostream& os) { eogrid::export_csv(cat, os); });
            }
            if (!quiet) {
                const auto stats = eogrid::campaign_stats(campaign.results);
                std::cerr << "selected " << stats.selected_count << " of " << campaign.results.size()
                          << " cells";
                if (stats.fallback_rate) std::cerr << ", fallback rate " << *stats.fallback_rate;
                std::cerr << '\n';
            }
        });
    }
    {
        auto* stats = sample->add_subcommand("stats", "Summarize a results JSONL file");
        auto in = std::make_shared<std::string>("-");
        stats->add_option("results", *in, "Results file from 'sample run'")->capture_default_str();
        stats->callback([&, in] {
            std::vector<eogrid::selection_result> results;
            with_input(*in, [&](std::istream& is) { results = eogrid::read_results_jsonl(is); });
            print_stats(eogrid::campaign_stats(results));
        });
    }
    {
        auto* stats = app.add_subcommand("stats", "Alias of 'sample stats'");
        auto in = std::make_shared<std::string>("-");
        stats->add_option("results", *in, "Results file from 'sample run'")->capture_default_str();
        stats->callback([&, in] {
            std::vector<eogrid::selection_result> results;
            with_input(*in, [&](std::istream& is) { results = eogrid::read_results_jsonl(is); });
            print_stats(eogrid::campaign_stats(results));
        });
    }

    app.add_subcommand("version", "Print the version")->callback([] {
        std::cout << "eogrid " << eogrid::version << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const eogrid::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return exit_status;
}
