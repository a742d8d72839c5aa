/***************************************************************
 *
 * Copyright (C) 2026, the farmsim developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you
 * may not use this file except in compliance with the License.  You may
 * obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 ***************************************************************/

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace farmsim {

// One stream per subsystem, derived from the scenario seed by a fixed label
// so adding a subsystem never perturbs another's draws.  Distributions are
// hand-rolled on top of mt19937_64 to keep traces bit-identical across
// standard libraries.
class Rng {
  public:
    Rng(std::uint64_t seed, std::string_view label) : gen_(mix(seed, label)) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // modulo with rejection to stay unbiased
        if (n == 0) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

  private:
    static std::uint64_t mix(std::uint64_t seed, std::string_view label) {
        // FNV-1a over the label, then splitmix with the seed
        std::uint64_t h = 1469598103934665603ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
};

} // namespace farmsim
