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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qnd/hilbert.hpp"
#include "qnd/trajectories.hpp"

namespace qnd {

/// `re`, `imj`, `re+imj` or `re-imj` (also accepts `i` for the imaginary unit).
Complex parse_complex(std::string_view cell);

/// Rows separated by ';', cells by ','.
Matrix parse_matrix_grid(std::string_view text);

/// Flat section.key -> value view of an INI file, with the directory used to
/// resolve `file:` references.
class ConfigTable {
   public:
    static ConfigTable load(const std::filesystem::path &path);
    static ConfigTable parse(std::string_view text, std::filesystem::path base_dir = ".");

    bool has(const std::string &key) const { return values_.count(key) != 0; }
    std::optional<std::string> find(const std::string &key) const;
    /// Throws ParseError naming the key when it is missing.
    const std::string &require(const std::string &key) const;
    void set(const std::string &key, std::string value) { values_[key] = std::move(value); }
    void erase(const std::string &key) { values_.erase(key); }

    double real(const std::string &key) const;
    std::optional<double> real_opt(const std::string &key) const;
    std::uint64_t u64(const std::string &key) const;
    std::optional<std::uint64_t> u64_opt(const std::string &key) const;
    std::vector<double> real_list(const std::string &key) const;
    /// Inline grid or `file:<path>` in the operator text format.
    Operator op(const std::string &key) const;
    /// Inline comma list, `basis:<k>:<dim>`, or `file:<path>` in the state text format.
    PureState state(const std::string &key) const;

    /// FNV-1a over every key except the [output] section, with referenced files inlined.
    std::string hash() const;

    const std::filesystem::path &base_dir() const { return base_dir_; }

   private:
    std::filesystem::path resolve(const std::string &ref) const;

    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

/// Fully resolved run configuration.
struct RunConfig {
    ConfigTable table;
    std::optional<ModelSpec> model;
    SDEConfig sde;
    std::size_t n_paths = 1;
    std::filesystem::path out_dir;
    std::string hash;

    const ModelSpec &require_model() const;
};

struct CliOverrides {
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
};

/// Parses the file, applies overrides, checks the seed is present and that the
/// model (when given) is consistent. Errors name the offending field.
RunConfig load_run_config(const std::filesystem::path &path, const CliOverrides &overrides = {});
RunConfig make_run_config(ConfigTable table, const CliOverrides &overrides = {});

}  // namespace qnd
