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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qnd/hilbert.hpp"
#include "qnd/trajectories.hpp"

namespace qnd {

/// RK4 solution of the Lindblad equation
///   d rho / dt = -(i/hbar)[H, rho] + L rho L† - (L†L rho + rho L†L) / 2
/// from |xi><xi| at each time in t_grid (ascending, >= 0), with steps no larger than `step`.
std::vector<DensityMatrix> master_equation_oracle(const ModelSpec &model, std::span<const double> t_grid,
                                                  double step);

struct Histogram {
    std::vector<double> edges;  // size bins + 1
    std::vector<double> mass;   // normalized weighted mass per bin
};

struct WeightedMoments {
    double mean = 0.0;
    double variance = 0.0;    // sum w (y - mean)^2 / sum w
    double std_error = 0.0;   // sqrt(sum w^2 (y - mean)^2) / sum w
    double effective_n = 0.0; // (sum w)^2 / sum w^2
};

WeightedMoments weighted_moments(std::span<const double> values, std::span<const double> weights);

/// Weighted quantile by the inverse empirical CDF.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

/// Weighted histogram on fixed edges; samples outside are clamped to the end bins.
Histogram weighted_histogram(std::span<const double> values, std::span<const double> weights,
                             std::vector<double> edges);

/// Freedman–Diaconis edges (weighted interquartile range) over the sample range.
std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::span<const double> weights);

/// Unit-width bins centred on the integers 0..max.
std::vector<double> integer_edges(std::span<const double> values);

struct EnsembleSummary {
    Unraveling unraveling = Unraveling::diffusive;
    std::uint64_t model_hash = 0;
    std::size_t n_paths = 0;
    std::vector<double> times;
    std::vector<DensityMatrix> rho_hat;  // sum g |phi><phi| / sum g at each time
    double output_time = 0.0;
    std::vector<double> outputs;         // y = q_t / t, or n_t, at output_time
    std::vector<double> output_weights;  // g at output_time
    Histogram histogram;
    WeightedMoments moments;
};

/// Aggregates records in ascending index order. Throws PreconditionError on mixed
/// models or time grids. The output law is read at the last recorded time.
EnsembleSummary ensemble_summary(const std::vector<TrajectoryRecord> &records,
                                 std::optional<std::size_t> bins = std::nullopt);

/// Trace distance of each rho_hat to the oracle at the same times.
std::vector<double> mixture_distances(const EnsembleSummary &summary, const ModelSpec &model, double oracle_step);

struct HistRow {
    double bin;          // bin centre
    double empirical;    // weighted mass
    double theoretical;  // law mass; NaN when the law does not apply
};

struct OutputLawReport {
    double cdf_sup_error = 0.0;
    double mean = 0.0;
    double mean_expected = 0.0;
    double std_error = 0.0;
    double variance = 0.0;
    double variance_expected = 0.0;
    std::vector<HistRow> rows;
};

/// Mixture of normals: sum_k p_k Phi((y - x_k) / sqrt(hbar / t)) over the spectrum of R.
double diffusive_output_cdf(const EigenDecomposition &r_eig, const Vector &xi, double hbar, double t, double y);

/// Diffusive output against the Gaussian convolution law, counting against
/// P(n) = |G(t, n) xi|^2 nu_n. The diffusive law is exact for Hermitian L with [H, L] = 0.
OutputLawReport output_law_check(const EnsembleSummary &summary, const ModelSpec &model, double t);

void write_rho_compare(std::ostream &out, std::span<const double> times, std::span<const double> distances,
                       const std::string &config_hash);
void write_output_hist(std::ostream &out, const OutputLawReport &report, Unraveling unraveling,
                       const std::string &config_hash);

}  // namespace qnd
