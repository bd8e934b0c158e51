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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "qnd/hilbert.hpp"

namespace qnd::textio {

/// Shortest decimal rendering that parses back to the identical double.
std::string format_double(double x);

/// Strict parse of a full token as a double; throws ParseError.
double parse_double(std::string_view token);

// Columnar format shared by operators and states:
//
//   dim=<n>
//   re,im,re,im,...      (one row per matrix row; a state has one pair per row)
void write_operator(std::ostream &out, const Operator &op);
Operator read_operator(std::istream &in);
void write_state(std::ostream &out, const PureState &psi);
PureState read_state(std::istream &in);

void save_operator(const std::filesystem::path &path, const Operator &op);
Operator load_operator(const std::filesystem::path &path);
void save_state(const std::filesystem::path &path, const PureState &psi);
PureState load_state(const std::filesystem::path &path);

/// 64-bit FNV-1a; used to tag outputs with the model/config that produced them.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);

}  // namespace qnd::textio
