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

#include "qnd/textio.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "qnd/errors.hpp"

namespace qnd::textio {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::size_t read_dim_header(std::istream &in) {
    std::string line;
    while (std::getline(in, line)) {
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        if (view.substr(0, 4) != "dim=") {
            throw ParseError("expected 'dim=<n>' header, got '" + std::string(view) + "'");
        }
        std::size_t dim = 0;
        std::string_view digits = view.substr(4);
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || dim == 0) {
            throw ParseError("invalid dimension in header '" + std::string(view) + "'");
        }
        return dim;
    }
    throw ParseError("missing 'dim=<n>' header");
}

std::vector<Complex> read_row(std::istream &in, std::size_t expected) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("unexpected end of input");
    }
    std::vector<double> values;
    std::string_view rest = line;
    while (true) {
        std::size_t comma = rest.find(',');
        values.push_back(parse_double(rest.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(comma + 1);
    }
    if (values.size() != 2 * expected) {
        throw ParseError("row has " + std::to_string(values.size()) + " numbers, expected " +
                         std::to_string(2 * expected));
    }
    std::vector<Complex> row(expected);
    for (std::size_t k = 0; k < expected; ++k) {
        row[k] = Complex(values[2 * k], values[2 * k + 1]);
    }
    return row;
}

void write_pair(std::ostream &out, Complex z) { out << format_double(z.real()) << ',' << format_double(z.imag()); }

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) {
        throw ParseError("failed to format double");
    }
    return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw ParseError("invalid number '" + std::string(token) + "'");
    }
    return value;
}

void write_operator(std::ostream &out, const Operator &op) {
    out << "dim=" << op.dim() << '\n';
    for (std::size_t i = 0; i < op.dim(); ++i) {
        for (std::size_t j = 0; j < op.dim(); ++j) {
            if (j > 0) {
                out << ',';
            }
            write_pair(out, op(i, j));
        }
        out << '\n';
    }
}

Operator read_operator(std::istream &in) {
    std::size_t dim = read_dim_header(in);
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<Complex> row = read_row(in, dim);
        for (std::size_t j = 0; j < dim; ++j) {
            m(i, j) = row[j];
        }
    }
    return Operator(std::move(m));
}

void write_state(std::ostream &out, const PureState &psi) {
    out << "dim=" << psi.dim() << '\n';
    for (std::size_t k = 0; k < psi.dim(); ++k) {
        write_pair(out, psi[k]);
        out << '\n';
    }
}

PureState read_state(std::istream &in) {
    std::size_t dim = read_dim_header(in);
    Vector v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        v(k) = read_row(in, 1)[0];
    }
    return PureState(std::move(v));
}

void save_operator(const std::filesystem::path &path, const Operator &op) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    write_operator(out, op);
}

Operator load_operator(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    return read_operator(in);
}

void save_state(const std::filesystem::path &path, const PureState &psi) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    write_state(out, psi);
}

PureState load_state(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    return read_state(in);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace qnd::textio
