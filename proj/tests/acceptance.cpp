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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qnd/errors.hpp"
#include "qnd/hilbert.hpp"
#include "qnd/instruments.hpp"
#include "qnd/kernels.hpp"
#include "qnd/rng.hpp"
#include "qnd/shiftmodel.hpp"
#include "qnd/statistics.hpp"
#include "qnd/textio.hpp"
#include "qnd/trajectories.hpp"

using namespace qnd;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const double kSqrtHalf = 1.0 / std::sqrt(2.0);

struct Outcome {
    bool pass;
    std::string detail;
};

int g_failures = 0;

void criterion(int id, const char *name, const std::function<Outcome()> &body) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception &e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s criterion %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) {
        ++g_failures;
    }
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) { return textio::format_double(x); }

ModelSpec make_model(Operator h, Operator l, PureState xi, Unraveling u) {
    ModelSpec m;
    m.h = std::move(h);
    m.l = std::move(l);
    m.initial = std::move(xi);
    m.unraveling = u;
    return m;
}

SDEConfig sde(double t, double dt, std::uint64_t seed, std::size_t stride = 1) {
    SDEConfig c;
    c.t_final = t;
    c.dt = dt;
    c.seed = seed;
    c.record_stride = stride;
    return c;
}

// Portable randomness for the randomized criteria: counter-based normals.
struct Normals {
    std::uint64_t seed;
    std::uint64_t next = 0;
    double operator()() { return rng::standard_normal(seed, rng::Stream::auxiliary, next++); }
};

Matrix random_matrix(Normals &n, std::size_t dim) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double re = n();
            m(i, j) = Complex(re, n());
        }
    }
    return m;
}

Matrix random_unitary(Normals &n, std::size_t dim) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, dim));
    return qr.householderQ() * Matrix::Identity(dim, dim);
}

Operator projector(const Matrix &u, unsigned mask) {
    Vector d(u.rows());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        d(k) = (mask >> k) & 1u ? 1.0 : 0.0;
    }
    const Matrix p = u * d.asDiagonal() * u.adjoint();
    return Operator(0.5 * (p + p.adjoint()));
}

PureState random_state(Normals &n, std::size_t dim) {
    Vector v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const double re = n();
        v(j) = Complex(re, n());
    }
    return PureState(v).normalized();
}

Outcome counting_oracle_equality() {
    const ModelSpec m = make_model(Operator::zero(2), Operator::diagonal({0.5, 1.5}), PureState{kSqrtHalf, kSqrtHalf},
                                   Unraveling::counting);
    const auto start = Clock::now();
    const double err = counting_oracle_error(m, sde(2.0, 1e-3, 1), 200);
    const double secs = seconds_since(start);
    return {err <= 1e-12 && secs <= 10.0,
            "max amplitude error " + fmt(err) + " (bound 1e-12), runtime " + fmt(secs) + " s (bound 10)"};
}

Outcome diffusive_convergence_order() {
    const ModelSpec m = make_model(Operator::zero(2), Operator::diagonal({0.0, 1.0}), PureState{kSqrtHalf, kSqrtHalf},
                                   Unraveling::diffusive);
    const std::vector<double> dts{4e-3, 2e-3, 1e-3};
    const auto start = Clock::now();
    const ConvergenceReport rep = diffusive_convergence(m, 1.0, dts, 7, 100);
    const double secs = seconds_since(start);
    std::string errs;
    for (std::size_t k = 0; k < rep.dts.size(); ++k) {
        errs += (k ? ", " : "") + fmt(rep.dts[k]) + ":" + fmt(rep.errors[k]);
    }
    // The bound equals the true strong order, so the fitted slope straddles it across seeds.
    // Report the spread over other seeds alongside the pinned one.
    int reached = 0;
    double mean_order = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double order = diffusive_convergence(m, 1.0, dts, seed, 100).order;
        reached += order >= 0.5 ? 1 : 0;
        mean_order += order / 20.0;
    }
    return {rep.monotone && rep.order >= 0.5 && secs <= 30.0,
            "errors {" + errs + "}, monotone " + (rep.monotone ? "yes" : "no") + ", order " + fmt(rep.order) +
                " (bound >= 0.5), runtime " + fmt(secs) + " s (bound 30); seeds 1-20: " + std::to_string(reached) +
                "/20 reach 0.5, mean order " + fmt(mean_order)};
}

Outcome instrument_completeness() {
    const Instrument g = gaussian_instrument(Operator::diagonal({0, 1}), 1.0, 1.0);
    const Instrument c = counting_instrument(Operator::diagonal({0.5, 1.5}), 2.0);
    return {g.completeness_defect() <= 1e-6 && c.completeness_defect() <= 1e-10,
            "gaussian defect " + fmt(g.completeness_defect()) + " (bound 1e-6), counting defect " +
                fmt(c.completeness_defect()) + " (bound 1e-10)"};
}

Outcome unsharpness_law() {
    // R = sqrt(hbar) (L + L†) = diag(0, 1); xi = |1> has eigenvalue x = 1.
    const ModelSpec m = make_model(Operator::zero(2), Operator::diagonal({0.0, 0.5}), PureState::basis(2, 1),
                                   Unraveling::diffusive);
    const auto start = Clock::now();
    const EnsembleSummary s = ensemble_summary(simulate_ensemble(m, sde(1.0, 1e-3, 11, 1000), 100000));
    const double secs = seconds_since(start);
    const double x = 1.0, target_var = m.hbar / 1.0;
    const double z = std::abs(s.moments.mean - x) / s.moments.std_error;
    const double rel = std::abs(s.moments.variance - target_var) / target_var;
    return {z <= 3.0 && rel <= 0.05 && secs <= 60.0,
            "mean " + fmt(s.moments.mean) + " is " + fmt(z) + " standard errors from 1 (bound 3), variance " +
                fmt(s.moments.variance) + " relative error " + fmt(rel) + " (bound 0.05), effective paths " +
                fmt(s.moments.effective_n) + ", runtime " + fmt(secs) + " s (bound 60)"};
}

Outcome convolution_law() {
    // R = diag(0, 1), equal superposition.
    const ModelSpec m = make_model(Operator::zero(2), Operator::diagonal({0.0, 0.5}), PureState{kSqrtHalf, kSqrtHalf},
                                   Unraveling::diffusive);
    const EnsembleSummary s = ensemble_summary(simulate_ensemble(m, sde(1.0, 1e-3, 12, 1000), 100000));
    const OutputLawReport rep = output_law_check(s, m, 1.0);
    return {rep.cdf_sup_error <= 0.02, "CDF sup error " + fmt(rep.cdf_sup_error) + " (bound 0.02), effective paths " +
                                           fmt(s.moments.effective_n)};
}

Outcome poisson_law() {
    // L = diag(l) with l^2 = 0.8 on the occupied level, t = 5: l^2 t = 4.
    const double l = std::sqrt(0.8);
    const ModelSpec m =
        make_model(Operator::zero(2), Operator::diagonal({l, 0.3}), PureState::basis(2, 0), Unraveling::counting);
    const EnsembleSummary s = ensemble_summary(simulate_ensemble(m, sde(5.0, 1e-2, 13, 500), 100000));
    const OutputLawReport rep = output_law_check(s, m, 5.0);
    return {rep.cdf_sup_error <= 0.01 && std::abs(rep.mean_expected - 4.0) <= 1e-9,
            "CDF sup error vs Poisson(" + fmt(rep.mean_expected) + ") " + fmt(rep.cdf_sup_error) +
                " (bound 0.01), effective paths " + fmt(s.moments.effective_n)};
}

Outcome mixture_law() {
    const std::vector<double> times{0.25, 0.5, 1.0};
    const ModelSpec diffusive = make_model(Operator(pauli_x().matrix() * 0.5), Operator::diagonal({0.5, -0.5}),
                                           PureState::basis(2, 0), Unraveling::diffusive);
    const ModelSpec counting = make_model(Operator::zero(2), Operator::diagonal({0.5, 1.5}),
                                          PureState{kSqrtHalf, kSqrtHalf}, Unraveling::counting);
    bool pass = true;
    std::string detail;
    for (const ModelSpec *m : {&diffusive, &counting}) {
        const EnsembleSummary s = ensemble_summary(simulate_ensemble(*m, sde(1.0, 1e-3, 14, 250), 10000));
        const std::vector<double> d = mixture_distances(s, *m, 1e-4);
        detail += std::string(detail.empty() ? "" : "; ") + unraveling_name(m->unraveling) + " distances";
        std::size_t seen = 0;
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            for (double t : times) {
                if (std::abs(s.times[k] - t) < 1e-12) {
                    detail += " t=" + fmt(t) + ":" + fmt(d[k]);
                    pass = pass && d[k] <= 0.02;
                    ++seen;
                }
            }
        }
        pass = pass && seen == times.size();
    }
    return {pass, detail + " (bound 0.02)"};
}

Outcome nondemolition() {
    const DilatedModel m = build_dilation(Operator::diagonal({0, 1}), CoarseGraining({{-0.5, 0.5}, {0.5, 1.5}}), 8);
    const double unitarity = unitarity_defect(m);
    Normals n{8};
    double hcomm = 0.0;
    for (int k = 0; k < 20; ++k) {
        hcomm = std::max(hcomm, nondemolition_check(m, Operator(random_matrix(n, 2))).hcomm);
    }
    const double icomm = nondemolition_check(m, pauli_x()).icomm;
    std::vector<double> p;
    for (int k = 0; k < 64; ++k) {
        p.push_back(-std::acos(-1.0) + 2.0 * std::acos(-1.0) * k / 63.0);
    }
    const double chi = characteristic_match(m, PureState{kSqrtHalf, kSqrtHalf}, p);
    return {unitarity <= 1e-10 && hcomm <= 1e-12 && icomm >= 1e-3 && chi <= 1e-10,
            "unitarity defect " + fmt(unitarity) + " (bound 1e-10), max hcomm " + fmt(hcomm) +
                " (bound 1e-12), icomm for sigma_x " + fmt(icomm) + " (bound >= 1e-3), characteristic error " +
                fmt(chi) + " (bound 1e-10)"};
}

Outcome bayes_boundary() {
    const std::size_t dim = 4;
    Normals n{9};
    int false_rejects = 0, out_of_range = 0, false_accepts = 0;
    for (int k = 0; k < 100; ++k) {
        const Matrix u = random_unitary(n, dim);
        const unsigned mo = 1u + static_cast<unsigned>(k % 15);
        const unsigned mp = 1u + static_cast<unsigned>((7 * k + 3) % 15);
        try {
            const double v = bayes_conditional(projector(u, mo), projector(u, mp), random_state(n, dim));
            out_of_range += (v >= 0.0 && v <= 1.0) ? 0 : 1;
        } catch (const Error &) {
            ++false_rejects;
        }
    }
    int drawn = 0;
    while (drawn < 100) {
        const Operator o = projector(random_unitary(n, dim), 0b0011u);
        const Operator p = projector(random_unitary(n, dim), 0b0001u);
        if (max_abs(commutator(o, p).matrix()) <= 1e-3) {
            continue;
        }
        ++drawn;
        try {
            bayes_conditional(o, p, random_state(n, dim));
            ++false_accepts;
        } catch (const NondemolitionError &) {
        }
    }
    return {false_rejects == 0 && out_of_range == 0 && false_accepts == 0,
            "commuting: " + std::to_string(false_rejects) + " rejected, " + std::to_string(out_of_range) +
                " outside [0,1]; noncommuting: " + std::to_string(false_accepts) + " accepted (bound 0 each)"};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<fs::path> files_under(const fs::path &root) {
    std::vector<fs::path> out;
    for (const auto &e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out.push_back(fs::relative(e.path(), root));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / "qnd_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string model = "[model]\nhbar = 1\nH = 0,0.5;0.5,0\nL = 0.5,0;0,-0.5\nunraveling = diffusive\n"
                              "initial = basis:0:2\n[sde]\nt_final = 0.5\ndt = 0.001\n[ensemble]\nn_paths = 200\n";
    const std::string oracle = "[model]\nhbar = 1\nL = 0,0;0,1\nunraveling = diffusive\n"
                               "initial = 0.7071067811865476,0.7071067811865476\n[sde]\nt_final = 0.5\ndt = 0.001\n"
                               "[ensemble]\nn_paths = 20\n";
    const std::vector<std::pair<std::string, std::string>> runs{
        {"instrument-table", "[instrument]\nkind = gaussian\nt = 1\nhbar = 1\noperator = 0,0;0,1\nstate = 0.6,0.8\n"},
        {"simulate", model},
        {"shift-check", "[shift]\nR = 0,0;0,1\npointer_size = 8\ncells = -0.5:0.5, 0.5:1.5\n"},
        {"ensemble-stats", model + "[stats]\ntimes = 0.25, 0.5\nrho_tolerance = 1\n"},
        {"oracle-compare", oracle + "[oracle]\nmin_order = 0\n"},
    };
    int identical = 0, compared = 0;
    std::string detail;
    for (const auto &[cmd, text] : runs) {
        const fs::path cfg = dir / (cmd + ".ini");
        std::ofstream(cfg) << text;
        std::vector<std::vector<fs::path>> listings;
        for (const char *tag : {"a", "b"}) {
            const fs::path out = dir / (cmd + "_" + tag);
            const std::string line = std::string(QND_CLI_PATH) + " " + cmd + " --config " + cfg.string() + " --out " +
                                     out.string() + " --seed 2026 > /dev/null 2>&1";
            const int status = std::system(line.c_str());
            if (status != 0) {
                return {false, cmd + " exited with status " + std::to_string(status)};
            }
            listings.push_back(files_under(out));
        }
        bool same = listings[0] == listings[1] && !listings[0].empty();
        for (const fs::path &f : listings[0]) {
            same = same && slurp(dir / (cmd + "_a") / f) == slurp(dir / (cmd + "_b") / f);
            ++compared;
        }
        identical += same ? 1 : 0;
        detail += cmd + (same ? " identical" : " DIFFERS") + "; ";
    }
    fs::remove_all(dir);
    return {identical == static_cast<int>(runs.size()),
            detail + std::to_string(compared) + " files compared"};
}

}  // namespace

int main() {
    std::printf("qnd acceptance suite, kernels: %s\n", kernels::isa_name(kernels::active_kernels().isa));
    criterion(1, "counting oracle equality", counting_oracle_equality);
    criterion(2, "diffusive convergence", diffusive_convergence_order);
    criterion(3, "instrument completeness", instrument_completeness);
    criterion(4, "unsharpness law", unsharpness_law);
    criterion(5, "convolution law", convolution_law);
    criterion(6, "poisson law", poisson_law);
    criterion(7, "mixture law", mixture_law);
    criterion(8, "nondemolition", nondemolition);
    criterion(9, "bayes existence boundary", bayes_boundary);
    criterion(10, "determinism", determinism);
    std::printf("%d of 10 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
