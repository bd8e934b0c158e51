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

#include "qnd/trajectories.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "qnd/errors.hpp"
#include "qnd/rng.hpp"

using namespace qnd;

namespace {

const double kSqrtHalf = 1.0 / std::sqrt(2.0);

ModelSpec diffusive_model(Operator h, Operator l, PureState xi) {
    ModelSpec m;
    m.h = std::move(h);
    m.l = std::move(l);
    m.initial = std::move(xi);
    m.unraveling = Unraveling::diffusive;
    return m;
}

ModelSpec counting_model(Operator l, PureState xi) {
    const std::size_t dim = l.dim();
    ModelSpec m = diffusive_model(Operator::zero(dim), std::move(l), std::move(xi));
    m.unraveling = Unraveling::counting;
    return m;
}

SDEConfig config(double t, double dt, std::uint64_t seed, Scheme scheme = Scheme::euler_maruyama) {
    SDEConfig c;
    c.t_final = t;
    c.dt = dt;
    c.seed = seed;
    c.scheme = scheme;
    return c;
}

double vec_err(const Vector &a, const Vector &b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(model, validation_and_derived_operators) {
    ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.5, -0.5}), PureState::basis(2, 0));
    m.hbar = 4.0;
    EXPECT_NO_THROW(m.validate());
    EXPECT_LE(max_abs(m.r().matrix() - Operator::diagonal({2.0, -2.0}).matrix()), 1e-15);
    const Matrix k = m.k().matrix();
    EXPECT_NEAR(k(0, 1).imag(), 0.25, 1e-15);
    EXPECT_NEAR(k(0, 0).real(), 0.125, 1e-15);

    ModelSpec bad = m;
    bad.initial = PureState{1.0, 1.0};
    EXPECT_THROW(bad.validate(), PreconditionError);
    bad = m;
    bad.hbar = 0.0;
    EXPECT_THROW(bad.validate(), PreconditionError);
    bad = m;
    bad.l = Operator::identity(3);
    EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(model, hash_sensitive_to_content) {
    const ModelSpec a = diffusive_model(Operator::zero(2), pauli_z(), PureState::basis(2, 0));
    ModelSpec b = a;
    EXPECT_EQ(a.hash(), b.hash());
    b.hbar = 2.0;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(sde_config, steps_must_divide) {
    EXPECT_EQ(config(1.0, 1e-3, 0).steps(), 1000u);
    EXPECT_THROW(config(1.0, 0.3, 0).steps(), PreconditionError);
    EXPECT_THROW(config(1.0, 0.0, 0).steps(), PreconditionError);
}

TEST(names, round_trip) {
    EXPECT_EQ(parse_unraveling(unraveling_name(Unraveling::counting)), Unraveling::counting);
    EXPECT_EQ(parse_scheme(scheme_name(Scheme::exact_piecewise)), Scheme::exact_piecewise);
    EXPECT_THROW(parse_scheme("rk4"), ParseError);
}

TEST(noise, wiener_moments) {
    SDEConfig c = config(100.0, 1e-4, 5);
    const std::vector<double> dw = wiener_path(c);
    ASSERT_EQ(dw.size(), 1000000u);
    double sum = 0.0, sum2 = 0.0;
    for (double x : dw) {
        sum += x;
        sum2 += x * x;
    }
    const double n = static_cast<double>(dw.size());
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_LE(std::abs(mean), 5.0 * std::sqrt(c.dt / n));
    EXPECT_LE(std::abs(var / c.dt - 1.0), 5.0 * std::sqrt(2.0 / n));
}

TEST(noise, poisson_count_mean) {
    double sum = 0.0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
        SDEConfig c = config(2.0, 1e-3, rng::path_seed(9, i));
        const std::vector<double> jumps = poisson_path(c);
        for (std::size_t k = 1; k < jumps.size(); ++k) {
            ASSERT_GT(jumps[k], jumps[k - 1]);
        }
        if (!jumps.empty()) {
            ASSERT_LE(jumps.back(), 2.0);
        }
        sum += static_cast<double>(jumps.size());
    }
    EXPECT_LE(std::abs(sum / n - 2.0), 5.0 * std::sqrt(2.0 / n));
}

TEST(diffusive, no_coupling_is_constant) {
    const PureState xi{0.6, Complex(0.0, 0.8)};
    const TrajectoryRecord rec =
        integrate_diffusive(diffusive_model(Operator::zero(2), Operator::zero(2), xi), config(1.0, 1e-2, 3));
    ASSERT_EQ(rec.times.size(), 101u);
    for (const Vector &chi : rec.chi) {
        EXPECT_EQ(vec_err(chi, xi.amplitudes()), 0.0);
    }
    EXPECT_DOUBLE_EQ(rec.times.back(), 1.0);
}

TEST(diffusive, hamiltonian_only_exact_scheme) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::zero(2), PureState::basis(2, 0));
    const TrajectoryRecord rec = integrate_diffusive(m, config(1.0, 1e-2, 3, Scheme::exact_piecewise));
    for (std::size_t k = 0; k < rec.times.size(); k += 10) {
        const double t = rec.times[k];
        EXPECT_LE(vec_err(rec.chi[k], Vector{{std::cos(t), Complex(0.0, -std::sin(t))}}), 1e-12);
    }
}

TEST(diffusive, hamiltonian_only_euler_first_order) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::zero(2), PureState::basis(2, 0));
    const TrajectoryRecord rec = integrate_diffusive(m, config(1.0, 1e-4, 3));
    EXPECT_LE(vec_err(rec.chi.back(), Vector{{std::cos(1.0), Complex(0.0, -std::sin(1.0))}}), 1e-3);
}

TEST(diffusive, exact_scheme_matches_oracle) {
    const ModelSpec m =
        diffusive_model(Operator::zero(2), Operator::diagonal({0.0, 1.0}), PureState{kSqrtHalf, kSqrtHalf});
    const TrajectoryRecord rec = integrate_diffusive(m, config(1.0, 1e-2, 4, Scheme::exact_piecewise));
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
        const double w = rec.w_or_n[k], t = rec.times[k];
        // exp(w L - t L^2) xi, by hand for L = diag(0, 1).
        const Vector expect{{kSqrtHalf, kSqrtHalf * std::exp(w - t)}};
        EXPECT_LE(vec_err(rec.chi[k], expect), 1e-12 * (1.0 + expect.norm()));
        EXPECT_LE(vec_err(rec.chi[k], diffusive_oracle(m, w, t).amplitudes()), 1e-12 * (1.0 + expect.norm()));
    }
}

TEST(diffusive, exact_scheme_regime) {
    const ModelSpec m = diffusive_model(pauli_x(), pauli_z(), PureState::basis(2, 0));
    EXPECT_THROW(integrate_diffusive(m, config(1.0, 1e-2, 1, Scheme::exact_piecewise)), RegimeError);
    EXPECT_THROW(diffusive_oracle(m, 0.1, 1.0), RegimeError);
}

TEST(diffusive, euler_close_to_oracle) {
    const ModelSpec m =
        diffusive_model(Operator::zero(2), Operator::diagonal({0.0, 1.0}), PureState{kSqrtHalf, kSqrtHalf});
    const TrajectoryRecord rec = integrate_diffusive(m, config(1.0, 1e-5, 8));
    EXPECT_LE(vec_err(rec.chi.back(), diffusive_oracle(m, rec.w_or_n.back(), 1.0).amplitudes()), 0.05);
}

TEST(diffusive, deterministic) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.5, -0.5}), PureState::basis(2, 0));
    const TrajectoryRecord a = integrate_diffusive(m, config(1.0, 1e-3, 42));
    const TrajectoryRecord b = integrate_diffusive(m, config(1.0, 1e-3, 42));
    ASSERT_EQ(a.chi.size(), b.chi.size());
    for (std::size_t k = 0; k < a.chi.size(); ++k) {
        ASSERT_EQ(vec_err(a.chi[k], b.chi[k]), 0.0);
    }
    const TrajectoryRecord c = integrate_diffusive(m, config(1.0, 1e-3, 43));
    EXPECT_NE(a.w_or_n.back(), c.w_or_n.back());
}

TEST(diffusive, scalar_and_avx2_records_identical) {
    const kernels::KernelTable *avx = kernels::avx2_kernels();
    if (avx == nullptr || !kernels::cpu_supports(kernels::Isa::avx2)) {
        GTEST_SKIP() << "no AVX2";
    }
    const ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.5, -0.5}), PureState::basis(2, 0));
    SDEConfig c = config(1.0, 1e-3, 17);
    const std::vector<double> dw = wiener_path(c);
    const TrajectoryRecord a = integrate_diffusive(m, c, dw, kernels::scalar_kernels());
    const TrajectoryRecord b = integrate_diffusive(m, c, dw, *avx);
    for (std::size_t k = 0; k < a.chi.size(); ++k) {
        ASSERT_EQ(vec_err(a.chi[k], b.chi[k]), 0.0);
    }
}

TEST(diffusive, ensemble_matches_single_paths) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.5, -0.5}), PureState::basis(2, 0));
    SDEConfig c = config(0.5, 1e-3, 99);
    c.record_stride = 50;
    const std::vector<TrajectoryRecord> ens = simulate_ensemble(m, c, 70);
    ASSERT_EQ(ens.size(), 70u);
    for (std::size_t i : {0u, 1u, 63u, 64u, 69u}) {
        SDEConfig ci = c;
        ci.seed = rng::path_seed(c.seed, i);
        const TrajectoryRecord one = integrate_diffusive(m, ci);
        ASSERT_EQ(one.times, ens[i].times);
        EXPECT_EQ(ens[i].seed, ci.seed);
        for (std::size_t k = 0; k < one.chi.size(); ++k) {
            ASSERT_EQ(vec_err(one.chi[k], ens[i].chi[k]), 0.0);
        }
        EXPECT_EQ(one.w_or_n, ens[i].w_or_n);
    }
}

TEST(diffusive, weights_are_martingale) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.0, 1.0}), PureState{0.6, 0.8});
    SDEConfig c = config(1.0, 1e-3, 5);
    c.record_stride = 1000;
    const std::size_t n = 4000;
    const auto ens = simulate_ensemble(m, c, n);
    double sum = 0.0, sum2 = 0.0;
    for (const auto &rec : ens) {
        EXPECT_EQ(rec.weight.front(), 1.0);
        sum += rec.weight.back();
        sum2 += rec.weight.back() * rec.weight.back();
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - 1.0), 5.0 * se);
}

TEST(diffusive, blowup_reported) {
    const ModelSpec m = diffusive_model(Operator::zero(1), Operator(Matrix::Constant(1, 1, 50.0)),
                                        PureState::basis(1, 0));
    try {
        integrate_diffusive(m, config(1.0, 1e-2, 1));
        FAIL() << "expected NumericalError";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("reduce dt"), std::string::npos);
    }
    EXPECT_TRUE(stability_warning(m, config(1.0, 1e-2, 1)).has_value());
    EXPECT_FALSE(stability_warning(m, config(1.0, 1e-6, 1)).has_value());
}

TEST(counting, identity_never_changes_state) {
    const PureState xi{0.6, 0.8};
    const TrajectoryRecord rec = integrate_counting(counting_model(Operator::identity(2), xi), config(3.0, 1e-2, 6));
    for (const Vector &chi : rec.chi) {
        EXPECT_LE(vec_err(chi, xi.amplitudes()), 1e-15);
    }
    EXPECT_EQ(rec.w_or_n.back(), static_cast<double>(rec.jump_times.size()));
}

TEST(counting, record_follows_jump_pattern) {
    const ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState{kSqrtHalf, kSqrtHalf});
    const SDEConfig c = config(2.0, 1e-3, 12);
    const TrajectoryRecord rec = integrate_counting(m, c);
    EXPECT_EQ(rec.jump_times, poisson_path(c));
    for (std::size_t k = 0; k < rec.times.size(); k += 100) {
        const double t = rec.times[k];
        std::size_t n = 0;
        for (double j : rec.jump_times) {
            n += j <= t ? 1 : 0;
        }
        EXPECT_EQ(rec.w_or_n[k], static_cast<double>(n));
        // L^n exp((t/2)(1 - L^2)) xi, by hand.
        const Vector expect{{kSqrtHalf * std::pow(0.5, n) * std::exp(0.5 * t * 0.75),
                             kSqrtHalf * std::pow(1.5, n) * std::exp(-0.5 * t * 1.25)}};
        EXPECT_LE(vec_err(rec.chi[k], expect), 1e-12 * (1.0 + expect.norm()));
    }
}

TEST(counting, oracle_without_jumps) {
    const ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState::basis(2, 1));
    const PureState chi = counting_oracle(m, 0, 2.0);
    EXPECT_NEAR(chi[1].real(), std::exp(-1.25), 1e-15);
    EXPECT_EQ(chi[0], Complex(0.0));
}

TEST(counting, oracle_error_small) {
    const ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState{kSqrtHalf, kSqrtHalf});
    EXPECT_LE(counting_oracle_error(m, config(2.0, 1e-2, 3), 50), 1e-12);
}

TEST(counting, oracle_regime) {
    ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState::basis(2, 0));
    m.h = pauli_x();
    EXPECT_THROW(counting_oracle(m, 1, 1.0), RegimeError);
}

TEST(counting, weights_are_martingale) {
    const ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState{0.6, 0.8});
    SDEConfig c = config(1.0, 1e-2, 8);
    const std::size_t n = 20000;
    const auto ens = simulate_ensemble(m, c, n);
    double sum = 0.0, sum2 = 0.0;
    for (const auto &rec : ens) {
        sum += rec.weight.back();
        sum2 += rec.weight.back() * rec.weight.back();
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - 1.0), 5.0 * se);
}

TEST(record, normalize_and_weight) {
    const ModelSpec m = counting_model(Operator::diagonal({0.5, 1.5}), PureState{kSqrtHalf, kSqrtHalf});
    const TrajectoryRecord rec = integrate_counting(m, config(1.0, 1e-2, 2));
    const NormalizedPath p = normalize_and_weight(rec);
    for (std::size_t k = 0; k < p.states.size(); ++k) {
        EXPECT_NEAR(p.states[k].norm(), 1.0, 1e-14);
        EXPECT_NEAR(p.weights[k], rec.chi[k].squaredNorm(), 1e-15 * p.weights[k]);
    }
}

TEST(record, write_read_round_trip) {
    const ModelSpec m = diffusive_model(pauli_x(), Operator::diagonal({0.5, -0.5}), PureState::basis(2, 0));
    SDEConfig c = config(0.1, 1e-3, 77);
    c.record_stride = 10;
    const TrajectoryRecord rec = integrate_diffusive(m, c);
    std::stringstream ss;
    write_record(ss, rec, 2);
    const std::string text = ss.str();
    EXPECT_NE(text.find("seed=77"), std::string::npos);
    const TrajectoryRecord back = read_record(ss);
    EXPECT_EQ(back.seed, rec.seed);
    EXPECT_EQ(back.model_hash, rec.model_hash);
    EXPECT_EQ(back.dt, rec.dt);
    EXPECT_EQ(back.times, rec.times);
    EXPECT_EQ(back.w_or_n, rec.w_or_n);
    for (std::size_t k = 0; k < rec.chi.size(); ++k) {
        EXPECT_EQ(vec_err(back.chi[k], rec.chi[k]), 0.0);
    }
    std::stringstream again;
    write_record(again, back, 2);
    EXPECT_EQ(again.str(), text);
}

TEST(convergence, euler_strong_order) {
    const ModelSpec m =
        diffusive_model(Operator::zero(2), Operator::diagonal({0.0, 1.0}), PureState{kSqrtHalf, kSqrtHalf});
    const std::vector<double> dts{4e-3, 2e-3, 1e-3};
    const ConvergenceReport rep = diffusive_convergence(m, 1.0, dts, 7, 50);
    ASSERT_EQ(rep.errors.size(), 3u);
    EXPECT_GT(rep.order, 0.3);
    EXPECT_LT(rep.order, 1.2);
    EXPECT_LT(rep.errors.back(), rep.errors.front());
}
