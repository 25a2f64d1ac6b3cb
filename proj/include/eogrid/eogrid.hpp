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

#include "eogrid/catalog.hpp"
#include "eogrid/catalog_io.hpp"
#include "eogrid/csv.hpp"
#include "eogrid/errors.hpp"
#include "eogrid/grid.hpp"
#include "eogrid/grid_io.hpp"
#include "eogrid/rng.hpp"
#include "eogrid/sampler.hpp"
#include "eogrid/timeutil.hpp"

namespace eogrid {

inline constexpr const char* version = "0.1.0";

}  // namespace eogrid
