#include <catch2/catch.hpp>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "eogrid/grid.hpp"
#include "eogrid/grid_io.hpp"
#include "oracles.hpp"

using namespace eogrid;

namespace {

grid_spec default_spec() { return grid_spec::create(); }

cell_id random_cell(const grid_spec& spec, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rows(spec.row_min(), spec.row_max());
    const int r = rows(rng);
    const int nc = num_cols(spec, r);
    std::uniform_int_distribution<int> cols(col_min_of(nc), col_max_of(nc));
    return {r, cols(rng)};
}

}  // namespace

TEST_CASE("grid spec derives row count and latitude spacing") {
    const auto spec = default_spec();
    CHECK(spec.n_rows == 2004);
    CHECK(spec.lat_spacing_deg == Approx(0.0898204).margin(1e-7));
    CHECK(spec.row_min() == -1002);
    CHECK(spec.row_max() == 1001);
    CHECK(spec.n_rows == oracles::bigdecimal_n_rows(1));

    // consistency identity: n_rows * (pi R / 180) * lat_spacing == pi R
    const double meridian_km_per_deg = pi * spec.earth_radius_km / 180.0;
    CHECK(spec.n_rows * meridian_km_per_deg * spec.lat_spacing_deg ==
          Approx(pi * spec.earth_radius_km).epsilon(1e-12));

    SECTION("coarser spacings") {
        CHECK(grid_spec::create(100).n_rows == 201);
        CHECK(grid_spec::create(100).n_rows == oracles::bigdecimal_n_rows(2));
        CHECK(grid_spec::create(1000).n_rows == 21);
    }
    SECTION("degenerate single-row grid") {
        const auto one = grid_spec::create(pi * 6378.137, 6378.137);
        CHECK(one.n_rows == 1);
        CHECK(one.lat_spacing_deg == 180.0);
        CHECK(one.row_min() == 0);
        CHECK(one.row_max() == 0);
    }
    SECTION("rejects bad parameters") {
        CHECK_THROWS_AS(grid_spec::create(0), invalid_parameter);
        CHECK_THROWS_AS(grid_spec::create(-5), invalid_parameter);
        CHECK_THROWS_AS(grid_spec::create(10, 0), invalid_parameter);
        CHECK_THROWS_AS(grid_spec::create(std::nan("")), invalid_parameter);
        CHECK_THROWS_AS(grid_spec::create(10, std::numeric_limits<double>::infinity()),
                        invalid_parameter);
        CHECK_THROWS_AS(grid_spec::create(1e9), invalid_parameter);  // wider than the sphere
    }
}

TEST_CASE("column counts per row") {
    const auto spec = default_spec();
    CHECK(num_cols(spec, 0) == 4008);
    CHECK(num_cols(spec, 0) == oracles::bigdecimal_equator_cols(1));
    CHECK(num_cols(spec, -1002) == 1);  // south pole row keeps one column
    CHECK(num_cols(spec, 1001) == 7);

    const oracles::ld_grid oracle(10.0L, 6378.137L);
    CHECK(num_cols(spec, 1001) == oracle.ncols(1001));
    CHECK(num_cols(spec, 201) == oracle.ncols(201));

    CHECK(lon_spacing_deg(spec, 0) == Approx(360.0 / 4008).epsilon(1e-15));
    CHECK_THROWS_AS(num_cols(spec, 1002), cell_out_of_range);
    CHECK_THROWS_AS(num_cols(spec, -1003), cell_out_of_range);

    SECTION("non-increasing away from the equator") {
        int prev_north = num_cols(spec, 0);
        int prev_south = num_cols(spec, 0);
        for (int r = 1; r <= spec.row_max(); ++r) {
            const int north = num_cols(spec, r);
            CHECK(north <= prev_north);
            prev_north = north;
        }
        for (int r = -1; r >= spec.row_min(); --r) {
            const int south = num_cols(spec, r);
            CHECK(south <= prev_south);
            prev_south = south;
        }
    }
}

TEST_CASE("cell to coordinates") {
    const auto spec = default_spec();
    const auto origin = cell_to_coords(spec, {0, 0});
    CHECK(origin.lat_deg == 0.0);
    CHECK(origin.lon_deg == 0.0);

    const oracles::ld_grid oracle(10.0L, 6378.137L);
    const auto example = cell_to_coords(spec, parse_cell("201U_54L"));
    CHECK(example.lat_deg == Approx(18.0539).margin(1e-4));
    CHECK(example.lat_deg == Approx(static_cast<double>(oracle.lat(201))).margin(1e-9));
    CHECK(example.lon_deg == Approx(static_cast<double>(oracle.lon(201, -54))).margin(1e-9));

    const auto south = cell_to_coords(spec, parse_cell("317D_0R"));
    CHECK(south.lat_deg == Approx(-28.473).margin(1e-3));
    CHECK(south.lat_deg == Approx(static_cast<double>(oracle.lat(-317))).margin(1e-9));
    CHECK(south.lon_deg == 0.0);

    CHECK_THROWS_AS(cell_to_coords(spec, {2500, 0}), cell_out_of_range);
    CHECK_THROWS_AS(cell_to_coords(spec, {0, 99999}), cell_out_of_range);

    // south pole lands exactly on -90, top row stays below 90
    CHECK(cell_to_coords(spec, {spec.row_min(), 0}).lat_deg == -90.0);
    CHECK(cell_to_coords(spec, {spec.row_max(), 0}).lat_deg < 90.0);
    // westmost column of an even-count row lands exactly on -180
    const int nc0 = num_cols(spec, 0);
    CHECK(cell_to_coords(spec, {0, col_min_of(nc0)}).lon_deg == -180.0);
    CHECK(cell_to_coords(spec, {0, col_max_of(nc0)}).lon_deg < 180.0);
}

TEST_CASE("coordinates to cell") {
    const auto spec = default_spec();
    CHECK(coords_to_cell(spec, 0.0, 0.0) == cell_id{0, 0});
    CHECK(coords_to_cell(spec, 0.05, 0.05) == cell_id{0, 0});
    CHECK(coords_to_cell(spec, -28.473, 0.0) == parse_cell("317D_0R"));

    CHECK_THROWS_AS(coords_to_cell(spec, std::nan(""), 0.0), invalid_parameter);
    CHECK_THROWS_AS(coords_to_cell(spec, 0.0, std::numeric_limits<double>::infinity()),
                    invalid_parameter);
    CHECK_THROWS_AS(coords_to_cell(spec, 91.0, 0.0), invalid_parameter);

    SECTION("edges clamp instead of overflowing") {
        CHECK(coords_to_cell(spec, 90.0, 0.0).row == spec.row_max());
        CHECK(coords_to_cell(spec, -90.0, 0.0).row == spec.row_min());
        CHECK(coords_to_cell(spec, 0.0, 180.0).col == col_min_of(num_cols(spec, 0)));  // wraps
        CHECK(coords_to_cell(spec, 0.0, -180.0).col == col_min_of(num_cols(spec, 0)));
    }

    SECTION("agrees with a brute-force south-west anchor scan") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> lat(-90.0, 90.0);
        std::uniform_real_distribution<double> lon(-540.0, 540.0);
        for (int i = 0; i < 2000; ++i) {
            const double la = lat(rng);
            const double lo = lon(rng);
            CHECK(coords_to_cell(spec, la, lo) == oracles::sw_anchor_oracle(spec, la, lo));
        }
    }
}

TEST_CASE("round trip is exact for random cells") {
    const auto spec = default_spec();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        const cell_id cell = random_cell(spec, rng);
        const auto point = cell_to_coords(spec, cell);
        REQUIRE(coords_to_cell(spec, point.lat_deg, point.lon_deg) == cell);
    }
}

TEST_CASE("cell name parsing and formatting") {
    CHECK(format_cell({0, 0}) == "0U_0R");
    CHECK(format_cell({201, -54}) == "201U_54L");
    CHECK(format_cell({-317, 0}) == "317D_0R");

    CHECK(parse_cell("201U_54L") == cell_id{201, -54});
    CHECK(parse_cell("201U, 54L") == cell_id{201, -54});
    CHECK(parse_cell("201U,54L") == cell_id{201, -54});
    CHECK(parse_cell("317d_0r") == cell_id{-317, 0});
    CHECK(parse_cell("  12D_7L ") == cell_id{-12, -7});
    CHECK(parse_cell("0D_0L") == cell_id{0, 0});

    SECTION("rejects malformed ids naming the offending token") {
        CHECK_THROWS_AS(parse_cell(""), parse_error);
        CHECK_THROWS_AS(parse_cell("201U54L"), parse_error);
        CHECK_THROWS_AS(parse_cell("201X_54L"), parse_error);
        CHECK_THROWS_AS(parse_cell("U_54L"), parse_error);
        CHECK_THROWS_AS(parse_cell("201U_"), parse_error);
        CHECK_THROWS_AS(parse_cell("201U_54L junk"), parse_error);
        CHECK_THROWS_AS(parse_cell("99999999999U_0R"), parse_error);
        CHECK_THROWS_WITH(parse_cell("201Q_54L"), Catch::Contains("Q"));
    }

    SECTION("string round trip on random cells") {
        const auto spec = default_spec();
        std::mt19937_64 rng(13);
        for (int i = 0; i < 10000; ++i) {
            const cell_id cell = random_cell(spec, rng);
            CHECK(parse_cell(format_cell(cell)) == cell);
        }
    }
    SECTION("underscore and comma forms always agree") {
        const auto spec = default_spec();
        std::mt19937_64 rng(19);
        for (int i = 0; i < 1000; ++i) {
            const cell_id cell = random_cell(spec, rng);
            std::string comma = format_cell(cell);
            comma.replace(comma.find('_'), 1, ", ");
            CHECK(parse_cell(comma) == cell);
        }
    }
}

TEST_CASE("great circle distance") {
    CHECK(great_circle_km(0, 0, 0, 0) == 0.0);
    CHECK(great_circle_km(0, 0, 0, 180) == Approx(pi * 6378.137).epsilon(1e-12));

    const auto spec = default_spec();
    const double step = lon_spacing_deg(spec, 0);
    const double neighbour = great_circle_km(0, 0, 0, step);
    CHECK(neighbour <= 10.0);
    CHECK(neighbour >= 10.0 * (1.0 - 1.0 / 4008));

    CHECK(great_circle_km(12.5, 33.25, -7.75, -120.0) ==
          great_circle_km(-7.75, -120.0, 12.5, 33.25));
    CHECK_THROWS_AS(great_circle_km(std::nan(""), 0, 0, 0), invalid_parameter);
}

TEST_CASE("row and column spacing stay within the nominal spacing") {
    const auto spec = default_spec();
    const double meridian = pi * spec.earth_radius_km / spec.n_rows;
    CHECK(meridian <= spec.spacing_km);
    CHECK(meridian > spec.spacing_km * (1.0 - 1.0 / spec.n_rows));

    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> rows(spec.row_min(), spec.row_max() - 1);
    for (int i = 0; i < 500; ++i) {
        const int r = rows(rng);
        const double d = great_circle_km(lat_of_row(spec, r), 0, lat_of_row(spec, r + 1), 0,
                                         spec.earth_radius_km);
        CHECK(d == Approx(meridian).epsilon(1e-9));

        const int nc = num_cols(spec, r);
        const double circumference =
            2.0 * pi * spec.earth_radius_km * std::cos(lat_of_row(spec, r) * pi / 180.0);
        const double arc = circumference / nc;
        CHECK(arc <= spec.spacing_km * (1 + 1e-12));
        if (nc > 1) {
            const double chord = great_circle_km(lat_of_row(spec, r), 0, lat_of_row(spec, r),
                                                 lon_spacing_deg(spec, r), spec.earth_radius_km);
            CHECK(chord <= arc * (1 + 1e-12));
            CHECK(chord <= spec.spacing_km * (1 + 1e-12));
            // great-circle and along-parallel spacing agree tightly at low latitude
            if (std::abs(lat_of_row(spec, r)) < 5.0) CHECK(chord == Approx(arc).epsilon(1e-9));
        }
    }
}

TEST_CASE("every row covers the full longitude range") {
    const auto spec = grid_spec::create(1000);
    for (int r = spec.row_min(); r <= spec.row_max(); ++r) {
        const int nc = num_cols(spec, r);
        CHECK(nc * lon_spacing_deg(spec, r) == Approx(360.0).epsilon(1e-12));
    }
}

TEST_CASE("bounding box queries") {
    const auto spec = default_spec();

    SECTION("full globe streams every grid point") {
        long long expected = 0;
        for (int r = spec.row_min(); r <= spec.row_max(); ++r) expected += num_cols(spec, r);
        CHECK(expected > 5000000);
        CHECK(expected < 5200000);
        long long seen = 0;
        for_each_cell_in_bbox(spec, {-90, 90, -180, 180 - 1e-9}, [&](const grid_point&) { ++seen; });
        CHECK(seen == expected);
    }
    SECTION("box between two rows is empty") {
        const double mid = spec.lat_spacing_deg * 0.5;
        CHECK(cells_in_bbox(spec, {mid - 0.01, mid + 0.01, -180, 180}).empty());
    }
    SECTION("tight box around the origin") {
        const auto points = cells_in_bbox(spec, {-0.05, 0.05, -0.05, 0.05});
        REQUIRE(points.size() == 1);
        CHECK(points[0].cell == cell_id{0, 0});
    }
    SECTION("inverted latitude interval is rejected") {
        CHECK_THROWS_AS(cells_in_bbox(spec, {10, 5, 0, 1}), invalid_parameter);
    }
    SECTION("results are ordered by row then column") {
        const auto points = cells_in_bbox(spec, {-0.5, 0.5, -0.5, 0.5});
        REQUIRE(points.size() > 4);
        for (std::size_t i = 1; i < points.size(); ++i)
            CHECK(points[i - 1].cell < points[i].cell);
    }
}

TEST_CASE("radius queries") {
    const auto spec = default_spec();

    SECTION("zero radius at an anchor") {
        const auto points = cells_in_radius(spec, 0, 0, 0);
        REQUIRE(points.size() == 1);
        CHECK(points[0].cell == cell_id{0, 0});
    }
    SECTION("slightly more than one spacing catches the four neighbours") {
        const auto points = cells_in_radius(spec, 0, 0, 10.001);
        REQUIRE(points.size() == 5);
        std::set<std::string> names;
        for (const auto& p : points) names.insert(format_cell(p.cell));
        CHECK(names == std::set<std::string>{"0U_0R", "0U_1R", "0U_1L", "1U_0R", "1D_0R"});
        CHECK(oracles::same_points(points, oracles::radius_oracle(spec, 0, 0, 10.001)));
    }
    SECTION("near the pole") {
        const auto points = cells_in_radius(spec, 89.99, 0, 50);
        CHECK(oracles::same_points(points, oracles::radius_oracle(spec, 89.99, 0, 50)));
        std::set<int> rows;
        for (const auto& p : points) rows.insert(p.cell.row);
        CHECK(rows.size() == 5);  // the five northernmost rows
        CHECK(*rows.rbegin() == spec.row_max());
    }
    SECTION("negative radius is rejected") {
        CHECK_THROWS_AS(cells_in_radius(spec, 0, 0, -1), invalid_parameter);
    }
}

TEST_CASE("spatial queries match exhaustive scans on a coarse grid") {
    const auto spec = grid_spec::create(1000);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> lat(-90, 90);
    std::uniform_real_distribution<double> lon(-180, 180);
    std::uniform_real_distribution<double> radius(0, 6000);

    for (int i = 0; i < 300; ++i) {
        double a = lat(rng), b = lat(rng);
        if (a > b) std::swap(a, b);
        const geo_box box{a, b, lon(rng), lon(rng)};  // may wrap
        CHECK(oracles::same_points(cells_in_bbox(spec, box), oracles::bbox_oracle(spec, box)));
    }
    for (int i = 0; i < 300; ++i) {
        const double la = lat(rng), lo = lon(rng), r = radius(rng);
        CHECK(oracles::same_points(cells_in_radius(spec, la, lo, r),
                                   oracles::radius_oracle(spec, la, lo, r)));
    }
}

TEST_CASE("footprints") {
    const auto spec = default_spec();

    SECTION("nominal bounds put the grid point on the south-west corner") {
        const auto fp = footprint(spec, {0, 0});
        CHECK(fp.nominal_bounds.lat_min == 0.0);
        CHECK(fp.nominal_bounds.lon_min == 0.0);
        CHECK(fp.nominal_bounds.lat_max == Approx(spec.lat_spacing_deg).epsilon(1e-12));
        CHECK(fp.nominal_bounds.lon_max == Approx(lon_spacing_deg(spec, 0)).epsilon(1e-12));
        CHECK_FALSE(fp.patch_bounds.has_value());
    }
    SECTION("patch squares are centred and sized in kilometres") {
        const auto fp = footprint(spec, {0, 0}, 1068, 10.0);
        CHECK(fp.patch_side_km == Approx(10.68));
        REQUIRE(fp.patch_bounds.has_value());
        const auto& b = *fp.patch_bounds;
        CHECK(b.lat_min == Approx(-b.lat_max));
        CHECK(b.lon_min == Approx(-b.lon_max));
        const double north = great_circle_km(0, 0, b.lat_max, 0, spec.earth_radius_km);
        CHECK(north == Approx(5.34).epsilon(1e-6));
        const double east = great_circle_km(0, 0, 0, b.lon_max, spec.earth_radius_km);
        CHECK(east == Approx(5.34).epsilon(1e-4));
    }
    SECTION("adjacent equatorial patches overlap") {
        const auto left = footprint(spec, {0, 0}, 1068, 10.0);
        const auto right = footprint(spec, {0, 1}, 1068, 10.0);
        CHECK(left.patch_bounds->lon_max > right.patch_bounds->lon_min);
    }
    SECTION("parameter pairing and degenerate rows") {
        CHECK_THROWS_AS(footprint(spec, {0, 0}, 1068, std::nullopt), invalid_parameter);
        CHECK_THROWS_AS(footprint(spec, {0, 0}, std::nullopt, 10.0), invalid_parameter);
        CHECK_THROWS_AS(footprint(spec, {spec.row_min(), 0}, 1068, 10.0), footprint_degenerate);
        // the top row is not a pole row: wide in longitude, but well-defined
        const auto top = footprint(spec, {spec.row_max(), 0}, 1068, 10.0);
        CHECK(top.patch_bounds->lon_max - top.patch_bounds->lon_min > 10.0);
        CHECK(top.patch_bounds->lon_max - top.patch_bounds->lon_min < 180.0);
        CHECK_THROWS_AS(footprint(spec, {5000, 0}), cell_out_of_range);
    }
}

TEST_CASE("patch alignment report") {
    const double bands[] = {10.0, 20.0, 60.0};

    const auto good = check_patch_alignment(1068, bands);
    CHECK(good.pass);
    REQUIRE(good.rows.size() == 3);
    CHECK(good.rows[0].pixels == 1068.0);
    CHECK(good.rows[1].pixels == 534.0);
    CHECK(good.rows[2].pixels == 178.0);

    const auto bad = check_patch_alignment(1000, bands);
    CHECK_FALSE(bad.pass);
    CHECK(bad.rows[0].integral);
    CHECK(bad.rows[1].integral);
    CHECK_FALSE(bad.rows[2].integral);

    const auto minimal = check_patch_alignment(6, bands);
    CHECK(minimal.pass);
    CHECK(minimal.rows[2].pixels == 1.0);

    CHECK_THROWS_AS(check_patch_alignment(0, bands), invalid_parameter);
    CHECK_THROWS_AS(check_patch_alignment(6, std::span<const double>{}), invalid_parameter);
}

TEST_CASE("grid output formats are deterministic") {
    const auto spec = default_spec();
    const auto render = [&] {
        std::ostringstream csv;
        write_grid_csv_header(csv);
        for_each_cell_in_bbox(spec, {-0.5, 0.5, -0.5, 0.5},
                              [&](const grid_point& p) { write_grid_csv_row(csv, p); });
        std::ostringstream geo;
        {
            geojson_writer writer(geo);
            for_each_cell_in_bbox(spec, {-0.5, 0.5, -0.5, 0.5},
                                  [&](const grid_point& p) { writer.point(p); });
            writer.finish();
        }
        return csv.str() + "\x1f" + geo.str();
    };
    const auto first = render();
    CHECK(first == render());
    CHECK(first.find("0U_0R,0,0,0.000000000,0.000000000") != std::string::npos);
}
