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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnd/hilbert.hpp"
#include "qnd/kernels.hpp"

namespace qnd {

enum class Unraveling { diffusive, counting };
enum class Scheme { euler_maruyama, exact_piecewise };

const char *unraveling_name(Unraveling u);
const char *scheme_name(Scheme s);
Unraveling parse_unraveling(const std::string &text);
Scheme parse_scheme(const std::string &text);

/// Object model of a filtering problem.
///
/// K = (i/hbar) H + L†L / 2 drives the linear equations and R = sqrt(hbar) (L + L†)
/// is the observable read by the diffusive output.
struct ModelSpec {
    double hbar = 1.0;
    Operator h = Operator::zero(1);
    Operator l = Operator::zero(1);
    Unraveling unraveling = Unraveling::diffusive;
    PureState initial = PureState::basis(1, 0);

    std::size_t dim() const { return initial.dim(); }
    /// Throws PreconditionError / DimensionError when the model is inconsistent.
    void validate() const;
    Operator k() const;
    Operator r() const;
    /// FNV-1a over a canonical text rendering.
    std::uint64_t hash() const;
};

struct SDEConfig {
    double t_final = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler_maruyama;
    /// Record every `record_stride` steps; the final time is always recorded.
    std::size_t record_stride = 1;
    /// Keep per-step Wiener increments in the record.
    bool store_increments = false;

    /// t_final / dt, checked to be an integer within one part in 1e9.
    std::size_t steps() const;
};

/// One path of the linear filtering equation under the reference measure.
struct TrajectoryRecord {
    Unraveling unraveling = Unraveling::diffusive;
    std::uint64_t seed = 0;
    std::uint64_t model_hash = 0;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Vector> chi;        // unnormalized chi_t
    std::vector<double> weight;     // g_t = |chi_t|^2
    std::vector<double> w_or_n;     // cumulative w_t (diffusive) or n_t (counting)
    std::vector<double> output;     // q_t = sqrt(hbar) w_t, or n_t
    std::vector<double> increments; // per-step dw when requested
    std::vector<double> jump_times; // counting only
};

/// Norm above which a diffusive path is declared unstable.
inline constexpr double kBlowupNorm = 1e12;
/// Norms below this cannot be renormalized.
inline constexpr double kVanishingNorm = 1e-150;

/// Wiener increments dw_k = sqrt(dt) N_k keyed by (seed, k).
std::vector<double> wiener_path(const SDEConfig &config);

/// Jump times of a unit-rate Poisson process on [0, t_final].
std::vector<double> poisson_path(const SDEConfig &config);

/// Single diffusive path with noise drawn from config.seed.
TrajectoryRecord integrate_diffusive(const ModelSpec &model, const SDEConfig &config);
/// Single diffusive path over explicit increments, one per step, on a chosen kernel table.
TrajectoryRecord integrate_diffusive(const ModelSpec &model, const SDEConfig &config,
                                     std::span<const double> increments, const kernels::KernelTable &table);

/// exp(w L - t L^2) xi. Valid only for H = 0 and Hermitian L; RegimeError otherwise.
PureState diffusive_oracle(const ModelSpec &model, double w_t, double t);

/// L^n exp((t/2)(I - L^2)) xi. Valid only for H = 0 and Hermitian L.
PureState counting_oracle(const ModelSpec &model, std::size_t n_t, double t);

/// Exact event-driven counting path with jumps from config.seed.
TrajectoryRecord integrate_counting(const ModelSpec &model, const SDEConfig &config);

/// Paths 0..n_paths-1 with seeds path_seed(config.seed, i). Diffusive Euler–Maruyama
/// paths run in SoA batches; the result is bit-identical to running each path alone.
std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec &model, const SDEConfig &config,
                                                std::size_t n_paths, const kernels::KernelTable *table = nullptr);

struct NormalizedPath {
    std::vector<PureState> states;  // phase-gauged unit vectors
    std::vector<double> weights;
};

NormalizedPath normalize_and_weight(const TrajectoryRecord &rec);

/// Columnar text: `#` header with model hash, seed and dt, then t, w_or_n, g, re/im of chi.
void write_record(std::ostream &out, const TrajectoryRecord &rec, std::size_t dim);
/// Reads a record written by write_record (chi, weights and outputs only).
TrajectoryRecord read_record(std::istream &in);

/// Set when dt |L|^2 exceeds 0.1, where explicit stepping may become unreliable.
std::optional<std::string> stability_warning(const ModelSpec &model, const SDEConfig &config);

struct ConvergenceReport {
    std::vector<double> dts;
    std::vector<double> errors;  // mean over paths of the max-over-grid error
    double order = 0.0;          // least-squares slope of log error against log dt
    bool monotone = false;       // errors strictly decrease with dt
};

/// Strong error of Euler–Maruyama against the closed form with shared noise.
/// Coarse increments are sums of the finest ones, so every dt must divide the others' lcm
/// back to the smallest dt.
ConvergenceReport diffusive_convergence(const ModelSpec &model, double t_final, std::span<const double> dts,
                                        std::uint64_t seed, std::size_t n_paths);

/// Max amplitude error of integrate_counting against an independent evaluation of the
/// closed form, over every recorded time of every path.
double counting_oracle_error(const ModelSpec &model, const SDEConfig &config, std::size_t n_paths);

}  // namespace qnd
