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

#include <cstdio>
#include <ostream>
#include <string>

#include "eogrid/grid.hpp"

namespace eogrid {

/// Coordinates in grid CSV and GeoJSON output always carry 9 decimals.
inline std::string format_coord(double v) {
    if (v == 0) v = 0;  // avoid "-0.000000000"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

// CSV: header "cell,row,col,lat,lon", LF endings.

inline void write_grid_csv_header(std::ostream& os) { os << "cell,row,col,lat,lon\n"; }

inline void write_grid_csv_row(std::ostream& os, const grid_point& point) {
    os << format_cell(point.cell) << ',' << point.cell.row << ',' << point.cell.col << ','
       << format_coord(point.lat_deg) << ',' << format_coord(point.lon_deg) << '\n';
}

/// Streams a GeoJSON FeatureCollection without buffering the features.
/// Points carry {cell, row, col} properties; polygons additionally a "kind".
class geojson_writer {
public:
    explicit geojson_writer(std::ostream& os) : os_(os) {
        os_ << "{\"type\":\"FeatureCollection\",\"features\":[";
    }

    void point(const grid_point& p) {
        begin_feature();
        os_ << "{\"type\":\"Feature\",\"geometry\":{\"type\":\"Point\",\"coordinates\":["
            << format_coord(p.lon_deg) << ',' << format_coord(p.lat_deg) << "]},"
            << properties(p.cell) << '}';
    }

    void box_polygon(const cell_id& cell, const geo_box& b, const char* kind) {
        begin_feature();
        os_ << "{\"type\":\"Feature\",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[["
            << corner(b.lon_min, b.lat_min) << ',' << corner(b.lon_max, b.lat_min) << ','
            << corner(b.lon_max, b.lat_max) << ',' << corner(b.lon_min, b.lat_max) << ','
            << corner(b.lon_min, b.lat_min) << "]]},"
            << properties(cell, kind) << '}';
    }

    void finish() {
        if (!finished_) {
            os_ << "]}\n";
            finished_ = true;
        }
    }

    ~geojson_writer() { finish(); }

private:
    void begin_feature() { os_ << (first_ ? "\n" : ",\n"), first_ = false; }

    static std::string corner(double lon, double lat) {
        return "[" + format_coord(lon) + "," + format_coord(lat) + "]";
    }

    static std::string properties(const cell_id& cell, const char* kind = nullptr) {
        std::string out = "\"properties\":{\"cell\":\"" + format_cell(cell) +
                          "\",\"row\":" + std::to_string(cell.row) +
                          ",\"col\":" + std::to_string(cell.col);
        if (kind) out += std::string(",\"kind\":\"") + kind + "\"";
        return out + "}";
    }

    std::ostream& os_;
    bool first_ = true;
    bool finished_ = false;
};

}  // namespace eogrid
