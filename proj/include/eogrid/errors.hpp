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

#include <stdexcept>

namespace eogrid {

/// Base class of everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A value outside its documented domain (non-finite spacing, negative radius, ...).
struct invalid_parameter : error {
    using error::error;
};

/// A row or column index outside the grid defined by a grid_spec.
struct cell_out_of_range : error {
    using error::error;
};

/// Malformed text input: cell ids, timestamps, CSV/JSONL rows.
struct parse_error : error {
    using error::error;
};

/// Two catalogs or files that were built against different grid parameters.
struct grid_mismatch : error {
    using error::error;
};

/// Footprint request that collapses in degree space (pole rows).
struct footprint_degenerate : error {
    using error::error;
};

}  // namespace eogrid
