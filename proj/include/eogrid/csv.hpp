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

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eogrid/errors.hpp"

namespace eogrid {

// RFC 4180 framing: fields containing separator, quote or newline are quoted,
// embedded quotes doubled.  Records end with a bare LF.

inline void csv_write_field(std::ostream& os, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        os << field;
        return;
    }
    os << '"';
    for (const char c : field) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

inline void csv_write_row(std::ostream& os, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        csv_write_field(os, fields[i]);
    }
    os << '\n';
}

/// Incremental reader; quoted fields may span physical lines.
class csv_reader {
public:
    explicit csv_reader(std::istream& in) : in_(in) {}

    /// Reads one record into `fields`; returns false at end of input.
    bool read_row(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == EOF) return false;
        if (first_) {
            first_ = false;
            // UTF-8 byte order mark
            if (c == 0xEF && in_.peek() == 0xBB) {
                in_.get();
                if (in_.peek() == 0xBF) {
                    in_.get();
                    c = in_.get();
                    if (c == EOF) return false;
                }
            }
        }
        ++row_;
        std::string field;
        bool quoted = false;
        bool at_field_start = true;
        while (true) {
            if (quoted) {
                if (c == EOF) throw parse_error("row " + std::to_string(row_) + ": unterminated quote");
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field += '"';
                    } else {
                        quoted = false;
                        at_field_start = false;
                    }
                } else {
                    field += static_cast<char>(c);
                }
            } else if (c == EOF || c == '\n') {
                break;
            } else if (c == '\r') {
                if (in_.peek() == '\n') in_.get();
                break;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                at_field_start = true;
            } else if (c == '"' && at_field_start) {
                quoted = true;
            } else {
                field += static_cast<char>(c);
                at_field_start = false;
            }
            c = in_.get();
        }
        fields.push_back(std::move(field));
        return true;
    }

    /// 1-based index of the last record returned.
    std::size_t row_number() const noexcept { return row_; }

private:
    std::istream& in_;
    std::size_t row_ = 0;
    bool first_ = true;
};

}  // namespace eogrid
