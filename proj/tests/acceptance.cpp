// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any of them failed.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eogrid/eogrid.hpp"
#include "oracles.hpp"

using namespace eogrid;

namespace {

int failures = 0;

void criterion(int number, const std::string& title, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %2d  %s%s%s\n", ok ? "PASS" : "FAIL", number, title.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

cell_id random_cell(const grid_spec& spec, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rows(spec.row_min(), spec.row_max());
    const int r = rows(rng);
    const int nc = num_cols(spec, r);
    std::uniform_int_distribution<int> cols(col_min_of(nc), col_max_of(nc));
    return {r, cols(rng)};
}

// --------------------------------------------------------------------- 1..8

bool grid_constants(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const auto spec = grid_spec::create(10.0, 6378.137);
    const long long rows_oracle = oracles::bigdecimal_n_rows(1);
    const long long cols_oracle = oracles::bigdecimal_equator_cols(1);
    const bool ok = spec.n_rows == 2004 && num_cols(spec, 0) == 4008 &&
                    spec.n_rows == rows_oracle && num_cols(spec, 0) == cols_oracle;
    const double elapsed = seconds_since(start);
    std::ostringstream ss;
    ss << "n_rows=" << spec.n_rows << " (oracle " << rows_oracle << "), equator cols "
       << num_cols(spec, 0) << " (oracle " << cols_oracle << "), " << elapsed << " s";
    detail = ss.str();
    return ok && elapsed < 1.0;
}

bool documented_coordinates(std::string& detail) {
    const auto spec = grid_spec::create();
    const oracles::ld_grid oracle(10.0L, 6378.137L);

    const auto example = cell_to_coords(spec, parse_cell("201U_54L"));
    const double lat_err = std::abs(example.lat_deg - static_cast<double>(oracle.lat(201)));
    const double lon_err = std::abs(example.lon_deg - static_cast<double>(oracle.lon(201, -54)));
    const auto south = cell_to_coords(spec, parse_cell("317D_0R"));
    const double south_err = std::abs(south.lat_deg - static_cast<double>(oracle.lat(-317)));

    std::ostringstream ss;
    ss << "201U_54L -> (" << example.lat_deg << ", " << example.lon_deg << "), errors " << lat_err
       << "/" << lon_err << "/" << south_err << " deg";
    detail = ss.str();
    return lat_err <= 1e-9 && lon_err <= 1e-9 && south_err <= 1e-9;
}

bool round_trip(std::string& detail) {
    const auto start = std::chrono::steady_clock::now();
    const auto spec = grid_spec::create();
    std::mt19937_64 rng(2024);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const cell_id cell = random_cell(spec, rng);
        const auto point = cell_to_coords(spec, cell);
        if (coords_to_cell(spec, point.lat_deg, point.lon_deg) != cell) ++bad;
    }
    const double elapsed = seconds_since(start);
    detail = std::to_string(bad) + " failures in 10000 cells, " + std::to_string(elapsed) + " s";
    return bad == 0 && elapsed < 5.0;
}

bool spacing_bounds(std::string& detail) {
    const auto spec = grid_spec::create();
    const double nominal = spec.spacing_km;
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> rows(spec.row_min(), spec.row_max() - 1);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const int r = rows(rng);
        const double meridional = great_circle_km(lat_of_row(spec, r), 0, lat_of_row(spec, r + 1), 0,
                                                  spec.earth_radius_km);
        if (!(meridional > nominal * (1.0 - 1.0 / spec.n_rows) && meridional <= nominal))
            ++violations;
        const int nc = num_cols(spec, r);
        if (nc > 1) {
            const double intra = great_circle_km(lat_of_row(spec, r), 0, lat_of_row(spec, r),
                                                 lon_spacing_deg(spec, r), spec.earth_radius_km);
            if (!(intra <= nominal * (1 + 1e-12))) ++violations;
        }
    }
    detail = std::to_string(violations) + " violations in 1000 rows";
    return violations == 0;
}

bool query_oracle(std::string& detail) {
    const auto spec = grid_spec::create(1000);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(-90, 90);
    std::uniform_real_distribution<double> lon(-180, 180);
    std::uniform_real_distribution<double> radius(0, 6000);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        double a = lat(rng), b = lat(rng);
        if (a > b) std::swap(a, b);
        const geo_box box{a, b, lon(rng), lon(rng)};
        if (!oracles::same_points(cells_in_bbox(spec, box), oracles::bbox_oracle(spec, box)))
            ++mismatches;
    }
    for (int i = 0; i < 1000; ++i) {
        const double la = lat(rng), lo = lon(rng), r = radius(rng);
        if (!oracles::same_points(cells_in_radius(spec, la, lo, r),
                                  oracles::radius_oracle(spec, la, lo, r)))
            ++mismatches;
    }
    detail = std::to_string(mismatches) + " mismatches in 2000 queries";
    return mismatches == 0;
}

bool table_volumes(std::string& detail) {
    struct row {
        std::uint64_t count;
        std::uint64_t patch;
        double printed;
    };
    const row rows[] = {{590326, 120, 8.5},     {122218, 256, 8.0},     {467340, 256, 30.6},
                        {1000000, 265, 70.2},   {2245886, 1068, 2561.7}, {1469955, 1068, 1676.7}};
    std::ostringstream ss;
    bool ok = true;
    for (const auto& r : rows) {
        const double v = volume_gigapixels(r.count, r.patch);
        ok = ok && std::abs(v - r.printed) <= 0.05;
        ss << v << " ";
    }
    detail = ss.str() + "Gpx";
    return ok;
}

bool coverage_area(std::string& detail) {
    const auto report = coverage_from_count(2245886, 1068, 10.0, 10.0);
    std::ostringstream ss;
    ss << report.area_with_overlap_km2 / 1e6 << "M / " << report.area_without_overlap_km2 / 1e6
       << "M km2";
    detail = ss.str();
    const bool with_ok = std::abs(report.area_with_overlap_km2 - 250e6) <= 0.03 * 250e6;
    const bool without_ok = std::abs(report.area_without_overlap_km2 - 225e6) <= 0.01 * 225e6;
    const bool derived_ok = std::abs(report.area_with_overlap_km2 - 256.2e6) < 0.05e6 &&
                            std::abs(report.area_without_overlap_km2 - 224.6e6) < 0.05e6;
    return with_ok && without_ok && derived_ok;
}

bool patch_alignment(std::string& detail) {
    const double bands[] = {10.0, 20.0, 60.0};
    const auto good = check_patch_alignment(1068, bands);
    const auto bad = check_patch_alignment(1000, bands);
    detail = "1068 -> " + std::string(good.pass ? "pass" : "fail") + ", 1000 -> " +
             std::string(bad.pass ? "pass" : "fail");
    return good.pass && !bad.pass;
}

// ----------------------------------------------------------------------- 9

jsonl_scene_provider build_random_provider(std::mt19937_64& rng, const std::vector<cell_id>& cells,
                                           utc_seconds start, utc_seconds end) {
    jsonl_scene_provider provider("acceptance");
    std::uniform_real_distribution<double> uniform(0, 1);
    std::uniform_int_distribution<utc_seconds> when(start, end - 1);
    int id = 0;
    for (const cell_id& cell : cells) {
        const double kind = uniform(rng);
        int count;
        double refined_lo, refined_hi;
        if (kind < 0.25) {  // clear cells
            count = 200;
            refined_lo = 0.0;
            refined_hi = 0.2;
        } else if (kind < 0.5) {  // fallback territory: plenty of scenes, all 0.25..0.45
            count = 700;
            refined_lo = 0.26;
            refined_hi = 0.45;
        } else if (kind < 0.7) {  // hopeless
            count = 80;
            refined_lo = 0.55;
            refined_hi = 1.0;
        } else if (kind < 0.95) {  // mixed
            count = 120;
            refined_lo = 0.0;
            refined_hi = 1.0;
        } else {  // nearly empty
            count = 2;
            refined_lo = 0.0;
            refined_hi = 1.0;
        }
        for (int i = 0; i < count; ++i) {
            const double refined = refined_lo + (refined_hi - refined_lo) * uniform(rng);
            const double rough = std::clamp(refined + 0.3 * (uniform(rng) - 0.5), 0.0, 1.0);
            const double nodata = uniform(rng) < 0.1 ? 0.5 * uniform(rng) : 0.0;
            provider.add(cell, "s" + std::to_string(id++), when(rng), rough, refined, nodata);
        }
    }
    return provider;
}

bool check_soundness(const selection_result& result, const sampler_config& config,
                     std::string& problem) {
    // inspection order must follow rough cloud
    for (std::size_t i = 1; i < result.log.size(); ++i)
        if (result.log[i - 1].rough_cloud > result.log[i].rough_cloud) {
            problem = "log out of rough-cloud order";
            return false;
        }
    if (!result.selected) return true;
    if (!result.refined_cloud || !result.scene_id) {
        problem = "selected result misses fields";
        return false;
    }
    const bool strict = *result.refined_cloud < config.accept_cloud;
    const bool fallback = result.fallback_used && result.scenes_inspected >= config.fallback_after &&
                          *result.refined_cloud < config.fallback_cloud;
    if (!(strict || fallback)) {
        problem = "acceptance invariant violated";
        return false;
    }
    if (result.fallback_used) {
        // fallback must take the least cloudy usable scene inspected so far
        double best = 2.0;
        for (const auto& entry : result.log)
            if (entry.refined_cloud && entry.nodata_fraction &&
                *entry.nodata_fraction <= config.max_nodata)
                best = std::min(best, *entry.refined_cloud);
        if (*result.refined_cloud != best) {
            problem = "fallback did not take the least cloudy inspected scene";
            return false;
        }
    }
    if (result.nodata_fraction && *result.nodata_fraction > config.max_nodata) {
        problem = "selected scene breaks the nodata rule";
        return false;
    }
    return true;
}

bool sampler_soundness(std::string& detail) {
    const auto spec = grid_spec::create();
    std::mt19937_64 rng(99);
    std::set<cell_id> cell_set;
    while (cell_set.size() < 500) cell_set.insert(random_cell(spec, rng));
    const std::vector<cell_id> cells(cell_set.begin(), cell_set.end());

    sampler_config config;
    config.availability_start = parse_utc("2020-01-01");
    config.availability_end = parse_utc("2023-01-01");
    config.seed = 31337;

    const auto provider =
        build_random_provider(rng, cells, config.availability_start, config.availability_end);

    const auto serial = run_campaign(spec, cells, provider, config, 1);
    const auto threaded = run_campaign(spec, cells, provider, config, 8);
    const auto serial_again = run_campaign(spec, cells, provider, config, 1);

    std::ostringstream ser1, ser2, thr;
    write_results_jsonl(serial.results, ser1);
    write_results_jsonl(serial_again.results, ser2);
    write_results_jsonl(threaded.results, thr);
    if (ser1.str() != thr.str() || ser1.str() != ser2.str()) {
        detail = "results differ across runs or worker counts";
        return false;
    }

    std::size_t selected = 0, fallbacks = 0;
    for (const auto& result : serial.results) {
        std::string problem;
        if (!check_soundness(result, config, problem)) {
            detail = format_cell(result.cell) + ": " + problem;
            return false;
        }
        selected += result.selected ? 1 : 0;
        fallbacks += result.fallback_used ? 1 : 0;
    }
    if (fallbacks == 0) {
        detail = "fallback path never exercised";
        return false;
    }

    // a provider where most cells hold a zero-cloud scene must give median 0
    jsonl_scene_provider zeros("zeros");
    std::uniform_int_distribution<utc_seconds> when(config.availability_start,
                                                    config.availability_end - 1);
    std::uniform_real_distribution<double> uniform(0, 1);
    int id = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const bool zero_cell = i % 3 != 2;  // two thirds of the cells
        for (int k = 0; k < 200; ++k) {
            const double refined = zero_cell ? 0.0 : 0.05 + 0.15 * uniform(rng);
            zeros.add(cells[i], "z" + std::to_string(id++), when(rng), refined, refined, 0.0);
        }
    }
    const auto zero_campaign = run_campaign(spec, cells, zeros, config, 8);
    const auto stats = campaign_stats(zero_campaign.results);
    if (!stats.median_cloud || *stats.median_cloud != 0.0) {
        detail = "median cloud is not zero on the zero-majority provider";
        return false;
    }

    std::ostringstream ss;
    ss << selected << "/500 selected, " << fallbacks << " fallbacks, median 0 on zero-majority data";
    detail = ss.str();
    return true;
}

// ---------------------------------------------------------------------- 10

bool catalog_round_trips(std::string& detail) {
    const auto spec = grid_spec::create();
    std::mt19937_64 rng(2468);
    std::uniform_int_distribution<int> sizes(50, 400);

    for (int trial = 0; trial < 100; ++trial) {
        oracles::record_factory factory(spec, 10000 + trial);
        catalog cat(spec);
        const int n = sizes(rng);
        for (int i = 0; i < n; ++i) cat.insert(factory.make());

        // byte-stable CSV and JSONL round trips
        std::ostringstream csv1, jsonl1;
        export_csv(cat, csv1);
        export_jsonl(cat, jsonl1);
        catalog from_csv(spec), from_jsonl(spec);
        std::istringstream csv_in(csv1.str()), jsonl_in(jsonl1.str());
        ingest_csv(from_csv, csv_in);
        ingest_jsonl(from_jsonl, jsonl_in);
        std::ostringstream csv2, jsonl2;
        export_csv(from_csv, csv2);
        export_jsonl(from_jsonl, jsonl2);
        if (csv1.str() != csv2.str() || jsonl1.str() != jsonl2.str()) {
            detail = "trial " + std::to_string(trial) + ": export not byte-stable";
            return false;
        }

        // split round trip reproduces the (cell, source) coverage
        filter_predicate pred;
        if (trial % 2) pred.max_cloud = 0.6;
        if (trial % 3 == 0) pred.sources = {{"S2-L1C"}};
        pred.include_unknown = trial % 4 == 0;
        const auto manifest = export_split(cat, "t", pred, "");
        const auto applied = apply_split(cat, manifest);
        const auto keys_of = [](const catalog& c) {
            std::set<std::pair<std::string, std::string>> keys;
            c.for_each([&](const cell_id&, const metadata_record& rec) {
                keys.emplace(rec.cell, rec.source);
            });
            return keys;
        };
        if (keys_of(applied.view) != keys_of(cat.filter(pred)) || !applied.warnings.empty()) {
            detail = "trial " + std::to_string(trial) + ": split coverage differs";
            return false;
        }

        // join and pairing against exhaustive oracles
        oracles::record_factory other_factory(spec, 20000 + trial);
        catalog other(spec);
        for (int i = 0; i < n / 2 + 5; ++i) other.insert(other_factory.make());

        std::set<cell_id> cells_a, cells_b;
        cat.for_each([&](const cell_id& c, const metadata_record&) { cells_a.insert(c); });
        other.for_each([&](const cell_id& c, const metadata_record&) { cells_b.insert(c); });
        std::set<cell_id> shared;
        for (const auto& c : cells_a)
            if (cells_b.count(c)) shared.insert(c);

        const auto joined = join_by_cell(cat, other);
        if (joined.size() != shared.size()) {
            detail = "trial " + std::to_string(trial) + ": join misses cells";
            return false;
        }
        for (const auto& row : joined)
            if (!shared.count(row.cell) || row.a_records != *cat.records(row.cell) ||
                row.b_records != *other.records(row.cell)) {
                detail = "trial " + std::to_string(trial) + ": join groups differ";
                return false;
            }

        const auto pairs = closest_time_pairing(cat, other);
        std::size_t expected_pairs = 0;
        bool pairing_ok = true;
        cat.for_each([&](const cell_id& cell, const metadata_record& ref) {
            if (!shared.count(cell) || !pairing_ok) return;
            ++expected_pairs;
            const metadata_record* best = nullptr;
            for (const auto& cand : *other.records(cell)) {
                if (!best) {
                    best = &cand;
                    continue;
                }
                const auto da = std::abs(cand.time_start - ref.time_start);
                const auto db = std::abs(best->time_start - ref.time_start);
                if (da < db || (da == db && (cand.time_start < best->time_start ||
                                             (cand.time_start == best->time_start &&
                                              cand.product_id < best->product_id))))
                    best = &cand;
            }
            bool found = false;
            for (const auto& p : pairs)
                if (p.cell == cell && p.a == ref && p.b == *best) found = true;
            pairing_ok = pairing_ok && found;
        });
        if (!pairing_ok || pairs.size() != expected_pairs) {
            detail = "trial " + std::to_string(trial) + ": pairing differs from exhaustive oracle";
            return false;
        }
    }
    detail = "100 randomized catalogs";
    return true;
}

}  // namespace

int main() {
    criterion(1, "grid constants match the arbitrary-precision oracle", grid_constants);
    criterion(2, "documented cell coordinates match a high-precision oracle", documented_coordinates);
    criterion(3, "coordinate round trip is exact for 10000 random cells", round_trip);
    criterion(4, "meridional and intra-row spacing stay within the nominal spacing", spacing_bounds);
    criterion(5, "bbox and radius queries equal exhaustive scans on a coarse grid", query_oracle);
    criterion(6, "pixel-volume arithmetic reproduces the published table", table_volumes);
    criterion(7, "coverage area arithmetic matches the published totals", coverage_area);
    criterion(8, "patch alignment accepts 1068 and rejects 1000", patch_alignment);
    criterion(9, "scene selection is sound, optimal under fallback and reproducible",
              sampler_soundness);
    criterion(10, "catalog exports, splits, joins and pairings round-trip exactly",
              catalog_round_trips);

    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
