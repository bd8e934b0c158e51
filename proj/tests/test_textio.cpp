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

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qnd/errors.hpp"

using namespace qnd;

TEST(format_double, shortest_round_trip) {
    EXPECT_EQ(textio::format_double(0.1), "0.1");
    EXPECT_EQ(textio::format_double(1.0), "1");
    EXPECT_EQ(textio::format_double(-2.5e-300), "-2.5e-300");
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double x = u(gen) * std::pow(10.0, (k % 40) - 20);
        EXPECT_EQ(textio::parse_double(textio::format_double(x)), x);
    }
}

TEST(parse_double, strict) {
    EXPECT_EQ(textio::parse_double("+1.5"), 1.5);
    EXPECT_THROW(textio::parse_double("1.5x"), ParseError);
    EXPECT_THROW(textio::parse_double(""), ParseError);
    EXPECT_EQ(textio::parse_double(" 1\t"), 1.0);
    EXPECT_THROW(textio::parse_double("1 2"), ParseError);
    EXPECT_THROW(textio::parse_double("++1"), ParseError);
}

TEST(operator_io, round_trip_is_exact) {
    Matrix m(2, 2);
    m << Complex(0.1, -0.2), Complex(1.0 / 3.0, 0.0), Complex(0.0, 1e-17), Complex(-7.25, 2.0);
    const Operator a(m);
    std::stringstream s;
    textio::write_operator(s, a);
    EXPECT_EQ(s.str().substr(0, 6), "dim=2\n");
    const Operator b = textio::read_operator(s);
    EXPECT_EQ(max_abs(a.matrix() - b.matrix()), 0.0);
}

TEST(operator_io, malformed) {
    std::stringstream missing("1,0,0,0\n");
    EXPECT_THROW(textio::read_operator(missing), ParseError);
    std::stringstream short_row("dim=2\n1,0,0,0\n1,0\n");
    EXPECT_THROW(textio::read_operator(short_row), ParseError);
    std::stringstream truncated("dim=2\n1,0,0,0\n");
    EXPECT_THROW(textio::read_operator(truncated), ParseError);
}

TEST(state_io, round_trip_via_file) {
    const PureState psi{Complex(0.6, 0.0), Complex(0.0, 0.8)};
    const auto path = std::filesystem::temp_directory_path() / "qnd_textio_state.txt";
    textio::save_state(path, psi);
    const PureState back = textio::load_state(path);
    EXPECT_EQ(back[0], psi[0]);
    EXPECT_EQ(back[1], psi[1]);
    std::filesystem::remove(path);
}

TEST(fnv1a, known_vectors) {
    // Published FNV-1a 64-bit test vectors.
    EXPECT_EQ(textio::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(textio::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(textio::fnv1a("foobar"), 0x85944171f73967e8ULL);
    EXPECT_EQ(textio::hex64(0xabcULL), "0000000000000abc");
}
