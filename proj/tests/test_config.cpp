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

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "qnd/errors.hpp"

using namespace qnd;

namespace {

const char *kBase = R"(
[model]
hbar = 1
H = 0,0.5;0.5,0
L = 0.5,0;0,-0.5
unraveling = diffusive
initial = basis:0:2

[sde]
t_final = 1
dt = 0.001
seed = 42

[ensemble]
n_paths = 16

[output]
dir = out_a
)";

std::string error_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(parse_complex, forms) {
    EXPECT_EQ(parse_complex("1.5"), Complex(1.5, 0));
    EXPECT_EQ(parse_complex("2j"), Complex(0, 2));
    EXPECT_EQ(parse_complex("-j"), Complex(0, -1));
    EXPECT_EQ(parse_complex("1+2j"), Complex(1, 2));
    EXPECT_EQ(parse_complex("1-2.5j"), Complex(1, -2.5));
    EXPECT_EQ(parse_complex("1e-3+2e+1j"), Complex(1e-3, 20));
    EXPECT_EQ(parse_complex(" -0.5-1e-2i "), Complex(-0.5, -1e-2));
    EXPECT_THROW(parse_complex(""), ParseError);
    EXPECT_THROW(parse_complex("1+2"), ParseError);
    EXPECT_THROW(parse_complex("abc"), ParseError);
}

TEST(parse_matrix_grid, square_only) {
    const Matrix m = parse_matrix_grid("1, 2j; -1+1j, 0");
    ASSERT_EQ(m.rows(), 2);
    EXPECT_EQ(m(0, 1), Complex(0, 2));
    EXPECT_EQ(m(1, 0), Complex(-1, 1));
    EXPECT_THROW(parse_matrix_grid("1,2;3"), ParseError);
    EXPECT_THROW(parse_matrix_grid("1,2"), DimensionError);
}

TEST(config_table, accessors) {
    const ConfigTable t = ConfigTable::parse(kBase);
    EXPECT_EQ(t.real("model.hbar"), 1.0);
    EXPECT_EQ(t.u64("sde.seed"), 42u);
    EXPECT_FALSE(t.real_opt("sde.missing").has_value());
    EXPECT_LE(max_abs(t.op("model.L").matrix() - Operator::diagonal({0.5, -0.5}).matrix()), 0.0);
    EXPECT_EQ(t.state("model.initial")[0], Complex(1.0));
    const std::string msg = error_of([&] { t.require("sde.nope"); });
    EXPECT_NE(msg.find("nope"), std::string::npos);
    EXPECT_NE(msg.find("[sde]"), std::string::npos);
}

TEST(config_table, state_forms) {
    const ConfigTable t = ConfigTable::parse("[s]\na = 0.6, 0.8j\nb = basis:2:3\nc = basis:3:3\n");
    EXPECT_EQ(t.state("s.a")[1], Complex(0, 0.8));
    EXPECT_EQ(t.state("s.b")[2], Complex(1.0));
    EXPECT_THROW(t.state("s.c"), Error);
}

TEST(config_table, file_references) {
    const auto dir = std::filesystem::temp_directory_path() / "qnd_config_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "l.txt") << "dim=2\n0.5,0,0,0\n0,0,-0.5,0\n";
        std::ofstream(dir / "xi.txt") << "dim=2\n1,0\n0,0\n";
        std::ofstream(dir / "run.ini") << "[model]\nhbar=1\nL=file:l.txt\nunraveling=counting\ninitial=file:xi.txt\n"
                                          "[sde]\nseed=1\n";
    }
    const RunConfig cfg = load_run_config(dir / "run.ini");
    ASSERT_TRUE(cfg.model.has_value());
    EXPECT_EQ(cfg.model->unraveling, Unraveling::counting);
    EXPECT_LE(max_abs(cfg.model->l.matrix() - Operator::diagonal({0.5, -0.5}).matrix()), 0.0);
    EXPECT_LE(max_abs(cfg.model->h.matrix()), 0.0);

    // The hash follows the content of referenced files.
    const std::string before = cfg.hash;
    std::ofstream(dir / "l.txt") << "dim=2\n0.25,0,0,0\n0,0,-0.5,0\n";
    EXPECT_NE(load_run_config(dir / "run.ini").hash, before);
    std::filesystem::remove_all(dir);
}

TEST(run_config, seed_is_mandatory) {
    ConfigTable t = ConfigTable::parse(kBase);
    t.erase("sde.seed");
    const std::string msg = error_of([&] { make_run_config(t); });
    EXPECT_NE(msg.find("seed"), std::string::npos);
    CliOverrides o;
    o.seed = 5;
    EXPECT_EQ(make_run_config(t, o).sde.seed, 5u);
}

TEST(run_config, overrides_and_hash) {
    const ConfigTable t = ConfigTable::parse(kBase);
    const RunConfig a = make_run_config(t);
    EXPECT_EQ(a.n_paths, 16u);
    EXPECT_EQ(a.out_dir, "out_a");
    EXPECT_EQ(a.sde.steps(), 1000u);

    CliOverrides out;
    out.out = "elsewhere";
    const RunConfig b = make_run_config(t, out);
    EXPECT_EQ(b.out_dir, "elsewhere");
    EXPECT_EQ(a.hash, b.hash);

    CliOverrides seed;
    seed.seed = 43;
    EXPECT_NE(make_run_config(t, seed).hash, a.hash);
    CliOverrides paths;
    paths.paths = 3;
    const RunConfig c = make_run_config(t, paths);
    EXPECT_EQ(c.n_paths, 3u);
    EXPECT_NE(c.hash, a.hash);
}

TEST(run_config, diagnostics_name_the_key) {
    ConfigTable t = ConfigTable::parse(kBase);
    t.set("model.L", "1,2;3");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("model.L"), std::string::npos);

    t = ConfigTable::parse(kBase);
    t.set("sde.dt", "0.3");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("sde.dt"), std::string::npos);

    t = ConfigTable::parse(kBase);
    t.set("model.unraveling", "jumpy");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("model.unraveling"), std::string::npos);

    t = ConfigTable::parse(kBase);
    t.erase("model.L");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("L"), std::string::npos);

    t = ConfigTable::parse(kBase);
    t.set("model.initial", "1, 1");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("model"), std::string::npos);

    t = ConfigTable::parse(kBase);
    t.set("sde.seed", "-4");
    EXPECT_NE(error_of([&] { make_run_config(t); }).find("sde.seed"), std::string::npos);
}

TEST(run_config, model_optional) {
    const RunConfig cfg = make_run_config(ConfigTable::parse("[sde]\nseed=3\n"));
    EXPECT_FALSE(cfg.model.has_value());
    EXPECT_THROW(cfg.require_model(), ParseError);
}
