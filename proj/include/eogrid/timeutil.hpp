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
#include <cstdio>
#include <string>
#include <string_view>

#include "eogrid/errors.hpp"

namespace eogrid {

/// Seconds since 1970-01-01T00:00:00Z.  All timestamps in the library are UTC
/// with one-second precision; comparisons are integer comparisons.
using utc_seconds = std::int64_t;

inline constexpr std::int64_t seconds_per_day = 86400;

struct civil_date {
    int year = 1970;
    unsigned month = 1;  // 1..12
    unsigned day = 1;    // 1..31
};

// Proleptic Gregorian calendar <-> day count (Howard Hinnant's algorithms).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) noexcept {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr civil_date civil_from_days(std::int64_t z) noexcept {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), m, d};
}

constexpr bool is_leap_year(int y) noexcept {
    return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0);
}

constexpr unsigned last_day_of_month(int y, unsigned m) noexcept {
    constexpr unsigned char lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && is_leap_year(y) ? 29 : lengths[m - 1];
}

/// Calendar-month shift; the day is clamped to the end of the target month
/// (2020-10-31 plus 4 months is 2021-02-28).
constexpr civil_date add_months(civil_date date, int months) noexcept {
    std::int64_t mo = static_cast<std::int64_t>(date.year) * 12 + static_cast<int>(date.month) - 1 + months;
    std::int64_t y = mo / 12;
    int m = static_cast<int>(mo % 12);
    if (m < 0) {
        m += 12;
        --y;
    }
    const unsigned mm = static_cast<unsigned>(m) + 1;
    const unsigned dd = std::min(date.day, last_day_of_month(static_cast<int>(y), mm));
    return {static_cast<int>(y), mm, dd};
}

/// Accepts "YYYY-MM-DD" (midnight) or "YYYY-MM-DDThh:mm:ssZ".
inline utc_seconds parse_utc(std::string_view text) {
    const auto fail = [&]() -> utc_seconds {
        throw parse_error("bad timestamp '" + std::string(text) + "'");
    };
    const auto digits = [&](std::size_t pos, std::size_t len, long long& out) {
        if (pos + len > text.size()) return false;
        long long v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            const char c = text[i];
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
        out = v;
        return true;
    };
    long long y, mo, d;
    if (!digits(0, 4, y) || text.size() < 10 || text[4] != '-' || !digits(5, 2, mo) || text[7] != '-' ||
        !digits(8, 2, d))
        return fail();
    if (mo < 1 || mo > 12 || d < 1 || d > last_day_of_month(static_cast<int>(y), static_cast<unsigned>(mo)))
        return fail();
    long long h = 0, mi = 0, s = 0;
    if (text.size() == 10) {
        // date only
    } else if (text.size() == 20 && text[10] == 'T' && text[13] == ':' && text[16] == ':' && text[19] == 'Z') {
        if (!digits(11, 2, h) || !digits(14, 2, mi) || !digits(17, 2, s)) return fail();
        if (h > 23 || mi > 59 || s > 59) return fail();
    } else {
        return fail();
    }
    const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
    return days * seconds_per_day + h * 3600 + mi * 60 + s;
}

inline std::string format_utc(utc_seconds t) {
    std::int64_t days = t / seconds_per_day;
    std::int64_t rem = t % seconds_per_day;
    if (rem < 0) {
        rem += seconds_per_day;
        --days;
    }
    const civil_date cd = civil_from_days(days);
    char buf[24];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", cd.year, cd.month, cd.day,
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

/// First whole UTC day starting at or after t, as a day count.
constexpr std::int64_t first_day_at_or_after(utc_seconds t) noexcept {
    std::int64_t d = t / seconds_per_day;
    if (d * seconds_per_day < t) ++d;
    return d;
}

}  // namespace eogrid
