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

#include <cstdint>
#include <string_view>

#include "eogrid/errors.hpp"

namespace eogrid {

/// FNV-1a, 64 bit.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

/// SplitMix64.  The generator is pinned: it is pure 64-bit integer
/// arithmetic, so streams are identical on every platform and compiler.
class splitmix64 {
public:
    constexpr explicit splitmix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased draw from [0, bound) via rejection sampling.
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw invalid_parameter("rng bound must be positive");
        const std::uint64_t max64 = ~0ULL;
        const std::uint64_t rem = (max64 % bound + 1) % bound;  // 2^64 mod bound
        if (rem == 0) return next() % bound;
        const std::uint64_t cutoff = max64 - rem + 1;
        std::uint64_t r = next();
        while (r >= cutoff) r = next();
        return r % bound;
    }

private:
    std::uint64_t state_;
};

/// Independent per-cell substream: SplitMix64 seeded with
/// seed XOR FNV-1a(cell name).  Guarantees that campaign results do not
/// depend on the order or parallelism in which cells are processed.
inline splitmix64 cell_stream(std::uint64_t seed, std::string_view cell_name) noexcept {
    return splitmix64(seed ^ fnv1a64(cell_name));
}

}  // namespace eogrid
