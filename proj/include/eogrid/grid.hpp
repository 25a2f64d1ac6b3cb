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
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eogrid/errors.hpp"

namespace eogrid {

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline constexpr double default_spacing_km = 10.0;
inline constexpr double default_earth_radius_km = 6378.137;  // WGS84 equatorial radius

/// A deterministic global set of sampling points built from one nominal
/// spacing in kilometres.  Rows are evenly spaced in latitude; every row
/// carries its own evenly spaced columns, so neighbouring points stay close
/// to the nominal spacing at all latitudes.  Row 0 sits on the equator,
/// column 0 of every row on the prime meridian.
struct grid_spec {
    double spacing_km = default_spacing_km;
    double earth_radius_km = default_earth_radius_km;
    int n_rows = 0;               // ceil(pi * R / D)
    double lat_spacing_deg = 0;   // 180 / n_rows

    static grid_spec create(double spacing_km = default_spacing_km,
                            double earth_radius_km = default_earth_radius_km) {
        if (!std::isfinite(spacing_km) || !std::isfinite(earth_radius_km) || spacing_km <= 0 ||
            earth_radius_km <= 0)
            throw invalid_parameter("grid spacing and radius must be positive finite numbers");
        const double half_circumference = pi * earth_radius_km;
        if (spacing_km > half_circumference)
            throw invalid_parameter("grid spacing exceeds half the sphere circumference");
        const double rows = std::ceil(half_circumference / spacing_km);
        if (!(rows >= 1) || rows > 250e6)
            throw invalid_parameter("grid spacing produces an unusable row count");
        grid_spec spec;
        spec.spacing_km = spacing_km;
        spec.earth_radius_km = earth_radius_km;
        spec.n_rows = static_cast<int>(rows);
        spec.lat_spacing_deg = 180.0 / spec.n_rows;
        return spec;
    }

    int row_min() const noexcept { return -(n_rows / 2); }
    int row_max() const noexcept { return n_rows - n_rows / 2 - 1; }

    bool operator==(const grid_spec&) const = default;
};

/// Signed (row, column) index of one grid point.  Positive rows are north
/// ('U'), negative south ('D'); positive columns east ('R'), negative west
/// ('L').  Canonical text form: "201U_54L".
struct cell_id {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const cell_id&, const cell_id&) = default;
};

struct grid_point {
    cell_id cell;
    double lat_deg = 0;
    double lon_deg = 0;
};

namespace detail {

// Anchor coordinate of index i out of `count` subdivisions of `extent`
// degrees.  The (i * extent) / count form keeps the ends exact: the south
// pole lands on -90 and column -N/2 on -180 with no representation slack.
inline double anchor_deg(std::int64_t index, double extent_deg, std::int64_t count) noexcept {
    return (static_cast<double>(index) * extent_deg) / static_cast<double>(count);
}

// Largest index whose anchor is <= value, with values within 1e-12 degrees
// of an anchor snapped onto it.  The snap absorbs the rounding of
// anchor -> degrees -> anchor round trips.
inline std::int64_t snap_floor_index(double value_deg, double extent_deg, std::int64_t count) noexcept {
    const double q = value_deg * static_cast<double>(count) / extent_deg;
    const double k = std::nearbyint(q);
    if (std::abs(value_deg - anchor_deg(static_cast<std::int64_t>(k), extent_deg, count)) <= 1e-12)
        return static_cast<std::int64_t>(k);
    return static_cast<std::int64_t>(std::floor(q));
}

inline void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw invalid_parameter(std::string(what) + " must be finite");
}

}  // namespace detail

/// Wraps a longitude into [-180, 180).
inline double normalize_lon(double lon_deg) noexcept {
    double x = std::fmod(lon_deg + 180.0, 360.0);
    if (x < 0) x += 360.0;
    return x - 180.0;
}

inline double lat_of_row(const grid_spec& spec, int row) noexcept {
    return detail::anchor_deg(row, 180.0, spec.n_rows);
}

inline void require_row(const grid_spec& spec, int row) {
    if (row < spec.row_min() || row > spec.row_max())
        throw cell_out_of_range("row " + std::to_string(row) + " outside [" +
                                std::to_string(spec.row_min()) + ", " + std::to_string(spec.row_max()) +
                                "]");
}

/// Column count of a row: ceil of the row circumference over the nominal
/// spacing, never less than 1 (pole rows keep a single addressable column).
inline int num_cols(const grid_spec& spec, int row) {
    require_row(spec, row);
    const double lat_rad = lat_of_row(spec, row) * pi / 180.0;
    const double circumference = 2.0 * pi * spec.earth_radius_km * std::cos(lat_rad);
    const double n = std::ceil(circumference / spec.spacing_km);
    if (!(n >= 1)) return 1;
    return static_cast<int>(n);
}

inline double lon_spacing_deg(const grid_spec& spec, int row) { return 360.0 / num_cols(spec, row); }

inline int col_min_of(int n_cols) noexcept { return -(n_cols / 2); }
inline int col_max_of(int n_cols) noexcept { return n_cols - n_cols / 2 - 1; }

inline void require_col(int row, int col, int n_cols) {
    if (col < col_min_of(n_cols) || col > col_max_of(n_cols))
        throw cell_out_of_range("column " + std::to_string(col) + " outside [" +
                                std::to_string(col_min_of(n_cols)) + ", " +
                                std::to_string(col_max_of(n_cols)) + "] in row " + std::to_string(row));
}

inline grid_point cell_to_coords(const grid_spec& spec, cell_id cell) {
    const int nc = num_cols(spec, cell.row);  // validates the row
    require_col(cell.row, cell.col, nc);
    return {cell, lat_of_row(spec, cell.row), detail::anchor_deg(cell.col, 360.0, nc)};
}

/// Cell owning an arbitrary coordinate: the grid point that is its
/// south-west anchor, clamped at the domain edges.  Exact inverse of
/// cell_to_coords for every valid cell.
inline cell_id coords_to_cell(const grid_spec& spec, double lat_deg, double lon_deg) {
    detail::require_finite(lat_deg, "latitude");
    detail::require_finite(lon_deg, "longitude");
    if (lat_deg < -90.0 || lat_deg > 90.0)
        throw invalid_parameter("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
    std::int64_t row = detail::snap_floor_index(lat_deg, 180.0, spec.n_rows);
    row = std::clamp<std::int64_t>(row, spec.row_min(), spec.row_max());
    const int nc = num_cols(spec, static_cast<int>(row));
    const double lon = normalize_lon(lon_deg);
    std::int64_t col = detail::snap_floor_index(lon, 360.0, nc);
    col = std::clamp<std::int64_t>(col, col_min_of(nc), col_max_of(nc));
    return {static_cast<int>(row), static_cast<int>(col)};
}

/// Canonical text form, e.g. "201U_54L"; row 0 renders "0U", column 0 "0R".
inline std::string format_cell(cell_id cell) {
    std::string out = std::to_string(cell.row < 0 ? -static_cast<long long>(cell.row) : cell.row);
    out += cell.row < 0 ? 'D' : 'U';
    out += '_';
    out += std::to_string(cell.col < 0 ? -static_cast<long long>(cell.col) : cell.col);
    out += cell.col < 0 ? 'L' : 'R';
    return out;
}

/// Parses "201U_54L" and the comma form "201U, 54L"; suffixes are
/// case-insensitive.  Purely textual: range checks against a grid_spec
/// happen where the cell is used.
inline cell_id parse_cell(std::string_view text) {
    const auto fail = [&](const std::string& what) -> cell_id {
        throw parse_error("cell id '" + std::string(text) + "': " + what);
    };
    std::string_view s = text;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);

    const auto read_index = [&](std::string_view& rest, char pos_suffix, char neg_suffix,
                                const char* axis) -> int {
        std::size_t n = 0;
        while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9') ++n;
        if (n == 0) fail(std::string("expected ") + axis + " digits at '" + std::string(rest) + "'");
        if (n > 9) fail(std::string(axis) + " index too large");
        long long mag = 0;
        for (std::size_t i = 0; i < n; ++i) mag = mag * 10 + (rest[i] - '0');
        if (n >= rest.size())
            fail(std::string("missing ") + axis + " suffix");
        const char suffix = static_cast<char>(std::toupper(static_cast<unsigned char>(rest[n])));
        rest.remove_prefix(n + 1);
        if (suffix == pos_suffix) return static_cast<int>(mag);
        if (suffix == neg_suffix) return static_cast<int>(-mag);
        fail(std::string("unknown ") + axis + " suffix '" + suffix + "'");
        return 0;
    };

    cell_id cell;
    cell.row = read_index(s, 'U', 'D', "row");
    if (s.empty()) fail("missing column part");
    if (s.front() == '_') {
        s.remove_prefix(1);
    } else if (s.front() == ',') {
        s.remove_prefix(1);
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    } else {
        fail("expected '_' or ',' separator at '" + std::string(s) + "'");
    }
    cell.col = read_index(s, 'R', 'L', "column");
    if (!s.empty()) fail("trailing characters '" + std::string(s) + "'");
    return cell;
}

/// Haversine distance on a sphere of the given radius.
inline double great_circle_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg,
                              double radius_km = default_earth_radius_km) {
    detail::require_finite(lat1_deg, "latitude");
    detail::require_finite(lon1_deg, "longitude");
    detail::require_finite(lat2_deg, "latitude");
    detail::require_finite(lon2_deg, "longitude");
    const double phi1 = lat1_deg * pi / 180.0;
    const double phi2 = lat2_deg * pi / 180.0;
    const double dphi = (lat2_deg - lat1_deg) * pi / 180.0;
    const double dlambda = (lon2_deg - lon1_deg) * pi / 180.0;
    const double sp = std::sin(dphi / 2);
    const double sl = std::sin(dlambda / 2);
    const double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * radius_km * std::asin(std::min(1.0, std::sqrt(a)));
}

/// Latitude interval is closed, longitude half-open; lon_min > lon_max means
/// the box wraps across the antimeridian.
struct geo_box {
    double lat_min = -90;
    double lat_max = 90;
    double lon_min = -180;
    double lon_max = 180;
};

namespace detail {

inline geo_box normalized_box(const geo_box& box) {
    require_finite(box.lat_min, "lat_min");
    require_finite(box.lat_max, "lat_max");
    require_finite(box.lon_min, "lon_min");
    require_finite(box.lon_max, "lon_max");
    if (box.lat_min > box.lat_max) throw invalid_parameter("inverted latitude interval");
    geo_box out = box;
    if (box.lon_max - box.lon_min >= 360.0) {
        out.lon_min = -180.0;
        out.lon_max = 180.0;
    } else {
        out.lon_min = normalize_lon(box.lon_min);
        out.lon_max = box.lon_max == 180.0 ? 180.0 : normalize_lon(box.lon_max);
    }
    return out;
}

inline bool lon_in_box(const geo_box& box, double lon_deg) noexcept {
    if (box.lon_min < box.lon_max) return lon_deg >= box.lon_min && lon_deg < box.lon_max;
    if (box.lon_min > box.lon_max) return lon_deg >= box.lon_min || lon_deg < box.lon_max;
    return false;
}

}  // namespace detail

/// Membership test for an already-normalized box (as produced by the query
/// functions); lon_deg is expected in [-180, 180).
inline bool box_contains(const geo_box& box, double lat_deg, double lon_deg) noexcept {
    return lat_deg >= box.lat_min && lat_deg <= box.lat_max && detail::lon_in_box(box, lon_deg);
}

/// Streams every grid point inside the box, ordered (row asc, col asc),
/// without materializing the grid.  Candidate index ranges carry one unit of
/// slack and each anchor is re-checked against the box, so results match an
/// exhaustive scan exactly.
template <class Fn>
void for_each_cell_in_bbox(const grid_spec& spec, const geo_box& box_in, Fn&& fn) {
    const geo_box box = detail::normalized_box(box_in);
    if (box.lon_min == box.lon_max) return;  // empty half-open interval

    std::int64_t r_lo = static_cast<std::int64_t>(std::floor(box.lat_min * spec.n_rows / 180.0)) - 1;
    std::int64_t r_hi = static_cast<std::int64_t>(std::ceil(box.lat_max * spec.n_rows / 180.0)) + 1;
    r_lo = std::max<std::int64_t>(r_lo, spec.row_min());
    r_hi = std::min<std::int64_t>(r_hi, spec.row_max());

    const bool wraps = box.lon_min > box.lon_max;
    for (std::int64_t r = r_lo; r <= r_hi; ++r) {
        const double lat = lat_of_row(spec, static_cast<int>(r));
        if (lat < box.lat_min || lat > box.lat_max) continue;
        const int nc = num_cols(spec, static_cast<int>(r));
        const auto emit_segment = [&](double seg_lo, double seg_hi) {
            std::int64_t c_lo = static_cast<std::int64_t>(std::floor(seg_lo * nc / 360.0)) - 1;
            std::int64_t c_hi = static_cast<std::int64_t>(std::ceil(seg_hi * nc / 360.0)) + 1;
            c_lo = std::max<std::int64_t>(c_lo, col_min_of(nc));
            c_hi = std::min<std::int64_t>(c_hi, col_max_of(nc));
            for (std::int64_t c = c_lo; c <= c_hi; ++c) {
                const double lon = detail::anchor_deg(c, 360.0, nc);
                if (lon >= seg_lo && lon < seg_hi)
                    fn(grid_point{{static_cast<int>(r), static_cast<int>(c)}, lat, lon});
            }
        };
        if (wraps) {
            emit_segment(-180.0, box.lon_max);  // ascending column order
            emit_segment(box.lon_min, 180.0);
        } else {
            emit_segment(box.lon_min, box.lon_max);
        }
    }
}

inline std::vector<grid_point> cells_in_bbox(const grid_spec& spec, const geo_box& box) {
    std::vector<grid_point> out;
    for_each_cell_in_bbox(spec, box, [&](const grid_point& p) { out.push_back(p); });
    return out;
}

/// Streams every grid point within radius_km of the center (haversine,
/// inclusive), ordered (row asc, col asc).  Rows are pruned by the meridian
/// bound |dlat| * pi * R / 180 <= distance; columns are scanned in full.
template <class Fn>
void for_each_cell_in_radius(const grid_spec& spec, double center_lat_deg, double center_lon_deg,
                             double radius_km, Fn&& fn) {
    detail::require_finite(center_lat_deg, "latitude");
    detail::require_finite(center_lon_deg, "longitude");
    if (!std::isfinite(radius_km) || radius_km < 0) throw invalid_parameter("radius must be >= 0");
    if (center_lat_deg < -90.0 || center_lat_deg > 90.0)
        throw invalid_parameter("latitude outside [-90, 90]");

    const double deg_per_km = 180.0 / (pi * spec.earth_radius_km);
    const double dlat = radius_km * deg_per_km;
    std::int64_t r_lo =
        static_cast<std::int64_t>(std::floor((center_lat_deg - dlat) * spec.n_rows / 180.0)) - 1;
    std::int64_t r_hi =
        static_cast<std::int64_t>(std::ceil((center_lat_deg + dlat) * spec.n_rows / 180.0)) + 1;
    r_lo = std::max<std::int64_t>(r_lo, spec.row_min());
    r_hi = std::min<std::int64_t>(r_hi, spec.row_max());

    for (std::int64_t r = r_lo; r <= r_hi; ++r) {
        const double lat = lat_of_row(spec, static_cast<int>(r));
        const int nc = num_cols(spec, static_cast<int>(r));
        for (int c = col_min_of(nc); c <= col_max_of(nc); ++c) {
            const double lon = detail::anchor_deg(c, 360.0, nc);
            if (great_circle_km(center_lat_deg, center_lon_deg, lat, lon, spec.earth_radius_km) <=
                radius_km)
                fn(grid_point{{static_cast<int>(r), c}, lat, lon});
        }
    }
}

inline std::vector<grid_point> cells_in_radius(const grid_spec& spec, double center_lat_deg,
                                               double center_lon_deg, double radius_km) {
    std::vector<grid_point> out;
    for_each_cell_in_radius(spec, center_lat_deg, center_lon_deg, radius_km,
                            [&](const grid_point& p) { out.push_back(p); });
    return out;
}

/// nominal_bounds is the half-open box between a grid point and its
/// north/east neighbours; the grid point sits on its south-west corner.
/// patch_bounds, when requested, is a square of patch_px * gsd_m metres
/// centered on the grid point, converted to degrees with the local meridian
/// and parallel scales (it deliberately spills into neighbouring cells).
struct cell_footprint {
    cell_id cell;
    geo_box nominal_bounds;
    std::optional<geo_box> patch_bounds;
    double patch_side_km = 0;
};

inline cell_footprint footprint(const grid_spec& spec, cell_id cell,
                                std::optional<int> patch_px = std::nullopt,
                                std::optional<double> gsd_m = std::nullopt) {
    if (patch_px.has_value() != gsd_m.has_value())
        throw invalid_parameter("patch_px and gsd_m must be given together");
    const grid_point anchor = cell_to_coords(spec, cell);
    const int nc = num_cols(spec, cell.row);
    cell_footprint fp;
    fp.cell = cell;
    fp.nominal_bounds = {anchor.lat_deg, detail::anchor_deg(cell.row + 1, 180.0, spec.n_rows),
                         anchor.lon_deg, detail::anchor_deg(cell.col + 1, 360.0, nc)};
    if (patch_px) {
        if (*patch_px <= 0 || !std::isfinite(*gsd_m) || *gsd_m <= 0)
            throw invalid_parameter("patch_px and gsd_m must be positive");
        fp.patch_side_km = *patch_px * *gsd_m / 1000.0;
        const double half_km = fp.patch_side_km / 2.0;
        const double dlat = half_km * 180.0 / (pi * spec.earth_radius_km);
        const double parallel_km_per_deg =
            pi * spec.earth_radius_km * std::cos(anchor.lat_deg * pi / 180.0) / 180.0;
        const double dlon = half_km / parallel_km_per_deg;
        if (!(dlon < 180.0))
            throw footprint_degenerate("patch footprint around " + format_cell(cell) +
                                       " collapses: parallel scale vanishes near the pole");
        fp.patch_bounds = geo_box{anchor.lat_deg - dlat, anchor.lat_deg + dlat, anchor.lon_deg - dlon,
                                  anchor.lon_deg + dlon};
    }
    return fp;
}

/// One line of a patch-size alignment check: how many pixels the patch edge
/// spans at this ground sample distance, and whether that count is whole.
struct alignment_row {
    double gsd_m = 0;
    double pixels = 0;
    bool integral = false;
};

struct alignment_report {
    int patch_px = 0;
    std::vector<alignment_row> rows;
    bool pass = false;
};

/// A patch of patch_px pixels at the finest ground sample distance is
/// aligned when every coarser band covers it with a whole number of pixels.
inline alignment_report check_patch_alignment(int patch_px, std::span<const double> gsd_m) {
    if (patch_px <= 0) throw invalid_parameter("patch_px must be positive");
    if (gsd_m.empty()) throw invalid_parameter("gsd list must not be empty");
    double finest = gsd_m[0];
    for (const double g : gsd_m) {
        if (!std::isfinite(g) || g <= 0) throw invalid_parameter("gsd values must be positive");
        finest = std::min(finest, g);
    }
    alignment_report report;
    report.patch_px = patch_px;
    report.pass = true;
    for (const double g : gsd_m) {
        const double pixels = patch_px * finest / g;
        const bool integral = std::abs(pixels - std::nearbyint(pixels)) < 1e-9;
        report.rows.push_back({g, pixels, integral});
        report.pass = report.pass && integral;
    }
    return report;
}

}  // namespace eogrid
