// Copyright 2026 The qnd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace qnd::rng {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Independent noise streams drawn from the same seed.
enum class Stream : std::uint32_t {
    wiener = 0,
    poisson = 1,
    /// Randomized test inputs (operators, states), never trajectory noise.
    auxiliary = 2,
};

/// Two uniforms in the open interval (0, 1) with 53 random bits each,
/// a pure function of (seed, stream, index).
std::array<double, 2> uniform_pair(std::uint64_t seed, Stream stream, std::uint64_t index);

/// Standard normal via Box–Muller on uniform_pair(seed, stream, index).
double standard_normal(std::uint64_t seed, Stream stream, std::uint64_t index);

/// Unit-mean exponential via -log(U).
double standard_exponential(std::uint64_t seed, Stream stream, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trajectory `index` in an ensemble started from `base`.
std::uint64_t path_seed(std::uint64_t base, std::uint64_t index);

}  // namespace qnd::rng
