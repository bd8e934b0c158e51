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

#include "qnd/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qnd/errors.hpp"
#include "qnd/textio.hpp"

namespace qnd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double finite_double(std::string_view token) {
    const double v = textio::parse_double(token);
    if (!std::isfinite(v)) {
        throw ParseError("non-finite number '" + std::string(token) + "'");
    }
    return v;
}

double unit_or_number(std::string_view token) {
    if (token.empty() || token == "+") {
        return 1.0;
    }
    if (token == "-") {
        return -1.0;
    }
    return finite_double(token);
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename F>
auto with_key(const std::string &key, F &&f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error &e) {
        throw ParseError("config key '" + key + "': " + e.what());
    }
}

}  // namespace

Complex parse_complex(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) {
        throw ParseError("empty matrix cell");
    }
    const char last = cell.back();
    if (last != 'j' && last != 'i') {
        return Complex(finite_double(cell), 0.0);
    }
    const std::string_view body = cell.substr(0, cell.size() - 1);
    // The imaginary part starts at the last sign that is not an exponent sign.
    std::size_t split_at = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split_at = k;
            break;
        }
    }
    if (split_at == std::string_view::npos) {
        return Complex(0.0, unit_or_number(body));
    }
    return Complex(finite_double(body.substr(0, split_at)), unit_or_number(body.substr(split_at)));
}

Matrix parse_matrix_grid(std::string_view text) {
    std::vector<std::vector<Complex>> rows;
    for (std::string_view row : split(text, ';')) {
        if (row.empty()) {
            continue;
        }
        std::vector<Complex> cells;
        for (std::string_view cell : split(row, ',')) {
            cells.push_back(parse_complex(cell));
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) {
        throw ParseError("empty matrix");
    }
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw ParseError("matrix row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                             " cells, expected " + std::to_string(cols));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(i, j) = rows[i][j];
        }
    }
    if (m.rows() != m.cols()) {
        throw DimensionError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected square");
    }
    return m;
}

ConfigTable ConfigTable::load(const std::filesystem::path &path) {
    const std::string text = read_file(path);
    return parse(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

ConfigTable ConfigTable::parse(std::string_view text, std::filesystem::path base_dir) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        throw ParseError("config: " + e.message() + " at line " + std::to_string(e.line()));
    }
    ConfigTable table;
    table.base_dir_ = std::move(base_dir);
    for (const auto &[section, body] : tree) {
        if (body.empty()) {
            table.values_[section] = body.data();
            continue;
        }
        for (const auto &[key, value] : body) {
            table.values_[section + "." + key] = value.data();
        }
    }
    return table;
}

std::optional<std::string> ConfigTable::find(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string &ConfigTable::require(const std::string &key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        const auto dot = key.find('.');
        throw ParseError("config: missing key '" + key.substr(dot + 1) + "' in section [" + key.substr(0, dot) + "]");
    }
    return it->second;
}

double ConfigTable::real(const std::string &key) const {
    const std::string &v = require(key);
    return with_key(key, [&] { return finite_double(trim(v)); });
}

std::optional<double> ConfigTable::real_opt(const std::string &key) const {
    if (!has(key)) {
        return std::nullopt;
    }
    return real(key);
}

std::uint64_t ConfigTable::u64(const std::string &key) const {
    const std::string_view v = trim(require(key));
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw ParseError("config key '" + key + "': '" + std::string(v) + "' is not an unsigned 64-bit integer");
    }
    return out;
}

std::optional<std::uint64_t> ConfigTable::u64_opt(const std::string &key) const {
    if (!has(key)) {
        return std::nullopt;
    }
    return u64(key);
}

std::vector<double> ConfigTable::real_list(const std::string &key) const {
    const std::string &v = require(key);
    return with_key(key, [&] {
        std::vector<double> out;
        for (std::string_view cell : split(v, ',')) {
            out.push_back(finite_double(cell));
        }
        return out;
    });
}

std::filesystem::path ConfigTable::resolve(const std::string &ref) const {
    const std::filesystem::path p(std::string(trim(ref)));
    return p.is_absolute() ? p : base_dir_ / p;
}

Operator ConfigTable::op(const std::string &key) const {
    const std::string &v = require(key);
    return with_key(key, [&] {
        if (v.rfind("file:", 0) == 0) {
            return textio::load_operator(resolve(v.substr(5)));
        }
        return Operator(parse_matrix_grid(v));
    });
}

PureState ConfigTable::state(const std::string &key) const {
    const std::string &v = require(key);
    return with_key(key, [&] {
        if (v.rfind("file:", 0) == 0) {
            return textio::load_state(resolve(v.substr(5)));
        }
        if (v.rfind("basis:", 0) == 0) {
            const auto parts = split(std::string_view(v).substr(6), ':');
            if (parts.size() != 2) {
                throw ParseError("expected basis:<k>:<dim>");
            }
            const double k = finite_double(parts[0]);
            const double dim = finite_double(parts[1]);
            if (k < 0 || dim < 1 || k >= dim || k != std::floor(k) || dim != std::floor(dim)) {
                throw ParseError("basis index out of range");
            }
            return PureState::basis(static_cast<std::size_t>(dim), static_cast<std::size_t>(k));
        }
        const auto cells = split(v, ',');
        Vector amps(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            amps(static_cast<Eigen::Index>(j)) = parse_complex(cells[j]);
        }
        return PureState(std::move(amps));
    });
}

std::string ConfigTable::hash() const {
    std::string canon;
    for (const auto &[key, value] : values_) {
        if (key.rfind("output.", 0) == 0) {
            continue;
        }
        canon += key + "=" + value + "\n";
        if (value.rfind("file:", 0) == 0) {
            canon += read_file(resolve(value.substr(5)));
            canon += "\n";
        }
    }
    return textio::hex64(textio::fnv1a(canon));
}

const ModelSpec &RunConfig::require_model() const {
    if (!model) {
        throw ParseError("config: this command needs a [model] section");
    }
    return *model;
}

RunConfig load_run_config(const std::filesystem::path &path, const CliOverrides &overrides) {
    return make_run_config(ConfigTable::load(path), overrides);
}

RunConfig make_run_config(ConfigTable table, const CliOverrides &overrides) {
    if (overrides.seed) {
        table.set("sde.seed", std::to_string(*overrides.seed));
    }
    if (overrides.paths) {
        table.set("ensemble.n_paths", std::to_string(*overrides.paths));
    }
    if (!table.has("sde.seed")) {
        throw ParseError("config: missing key 'seed' in section [sde] (there is no default seed; pass --seed)");
    }

    RunConfig cfg;
    cfg.sde.seed = table.u64("sde.seed");
    if (auto v = table.real_opt("sde.t_final")) {
        cfg.sde.t_final = *v;
    }
    if (auto v = table.real_opt("sde.dt")) {
        cfg.sde.dt = *v;
    }
    if (auto v = table.find("sde.scheme")) {
        cfg.sde.scheme = with_key("sde.scheme", [&] { return parse_scheme(std::string(trim(*v))); });
    }
    if (auto v = table.u64_opt("sde.record_stride")) {
        if (*v == 0) {
            throw ParseError("config key 'sde.record_stride': must be positive");
        }
        cfg.sde.record_stride = static_cast<std::size_t>(*v);
    }
    if (table.has("sde.t_final") || table.has("sde.dt")) {
        with_key("sde.dt", [&] { return cfg.sde.steps(); });
    }
    if (auto v = table.u64_opt("ensemble.n_paths")) {
        if (*v == 0) {
            throw ParseError("config key 'ensemble.n_paths': must be positive");
        }
        cfg.n_paths = static_cast<std::size_t>(*v);
    }

    constexpr std::array<const char *, 5> model_keys{"model.hbar", "model.H", "model.L", "model.unraveling",
                                                     "model.initial"};
    const bool any_model =
        std::any_of(model_keys.begin(), model_keys.end(), [&](const char *k) { return table.has(k); });
    if (any_model) {
        ModelSpec m;
        m.hbar = table.real("model.hbar");
        if (!(m.hbar > 0.0)) {
            throw ParseError("config key 'model.hbar': must be positive");
        }
        m.l = table.op("model.L");
        m.h = table.has("model.H") ? table.op("model.H") : Operator::zero(m.l.dim());
        m.unraveling = with_key("model.unraveling", [&] {
            return parse_unraveling(std::string(trim(table.require("model.unraveling"))));
        });
        m.initial = table.state("model.initial");
        with_key("model", [&] {
            m.validate();
            return 0;
        });
        cfg.model = std::move(m);
    }

    if (overrides.out) {
        cfg.out_dir = *overrides.out;
    } else if (auto v = table.find("output.dir")) {
        cfg.out_dir = std::string(trim(*v));
    }
    cfg.hash = table.hash();
    cfg.table = std::move(table);
    return cfg;
}

}  // namespace qnd
