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

#include "qnd/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "qnd/errors.hpp"
#include "qnd/instruments.hpp"
#include "qnd/textio.hpp"

namespace qnd {

namespace {

constexpr std::size_t kMaxBins = 10000;

std::vector<std::size_t> sorted_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

double total_weight(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    if (!(total > 0.0)) {
        throw NumericalError("ensemble weights sum to zero");
    }
    return total;
}

void check_samples(std::span<const double> values, std::span<const double> weights) {
    if (values.empty() || values.size() != weights.size()) {
        throw DimensionError("weighted statistics need one weight per sample");
    }
}

// Sup over the sorted samples of |F_emp - F|, checking both sides of every jump
// against the matching one-sided limit of the law.
template <typename Cdf, typename CdfLeft>
double cdf_sup_error(std::span<const double> values, std::span<const double> weights, Cdf &&cdf,
                     CdfLeft &&cdf_left) {
    const std::vector<std::size_t> order = sorted_order(values);
    const double total = total_weight(weights);
    double cum = 0.0;
    double worst = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double y = values[order[i]];
        const double before = cum / total;
        while (i < order.size() && values[order[i]] == y) {
            cum += weights[order[i]];
            ++i;
        }
        worst = std::max({worst, std::abs(before - cdf_left(y)), std::abs(cum / total - cdf(y))});
    }
    return worst;
}

void write_header(std::ostream &out, const char *what, const std::string &config_hash, const char *units,
                  const char *columns) {
    out << "# qnd " << what << " config=" << config_hash << "\n";
    out << "# units: " << units << "\n";
    out << "# columns: " << columns << "\n";
}

}  // namespace

std::vector<DensityMatrix> master_equation_oracle(const ModelSpec &model, std::span<const double> t_grid,
                                                  double step) {
    model.validate();
    if (!(step > 0.0)) {
        throw PreconditionError("master_equation_oracle needs a positive step");
    }
    const Matrix &h = model.h.matrix();
    const Matrix &l = model.l.matrix();
    const Matrix ld = l.adjoint();
    const Matrix m = ld * l;
    const Complex mi(0.0, -1.0 / model.hbar);
    auto rhs = [&](const Matrix &rho) -> Matrix {
        return mi * (h * rho - rho * h) + l * rho * ld - 0.5 * (m * rho + rho * m);
    };

    const Vector &xi = model.initial.amplitudes();
    Matrix rho = xi * xi.adjoint();
    double now = 0.0;
    std::vector<DensityMatrix> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t < now) {
            throw PreconditionError("master_equation_oracle needs ascending non-negative times");
        }
        const double span = t - now;
        if (span > 0.0) {
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / step - 1e-9)));
            const double dt = span / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                const Matrix k1 = rhs(rho);
                const Matrix k2 = rhs(rho + (0.5 * dt) * k1);
                const Matrix k3 = rhs(rho + (0.5 * dt) * k2);
                const Matrix k4 = rhs(rho + dt * k3);
                rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            rho = (0.5 * (rho + rho.adjoint())).eval();
            now = t;
        }
        out.emplace_back(rho);
    }
    return out;
}

WeightedMoments weighted_moments(std::span<const double> values, std::span<const double> weights) {
    check_samples(values, weights);
    const double total = total_weight(weights);
    double mean = 0.0;
    double w2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        mean += weights[i] * values[i];
        w2 += weights[i] * weights[i];
    }
    mean /= total;
    double var = 0.0;
    double se2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - mean;
        var += weights[i] * d * d;
        se2 += weights[i] * weights[i] * d * d;
    }
    return WeightedMoments{mean, var / total, std::sqrt(se2) / total, total * total / w2};
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
    check_samples(values, weights);
    const std::vector<std::size_t> order = sorted_order(values);
    const double target = q * total_weight(weights);
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += weights[i];
        if (cum >= target) {
            return values[i];
        }
    }
    return values[order.back()];
}

Histogram weighted_histogram(std::span<const double> values, std::span<const double> weights,
                             std::vector<double> edges) {
    check_samples(values, weights);
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
        throw PreconditionError("histogram edges must be ascending with at least one bin");
    }
    const double total = total_weight(weights);
    Histogram hist{std::move(edges), {}};
    const std::size_t bins = hist.edges.size() - 1;
    hist.mass.assign(bins, 0.0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto it = std::upper_bound(hist.edges.begin(), hist.edges.end(), values[i]);
        std::size_t b = it == hist.edges.begin() ? 0 : static_cast<std::size_t>(it - hist.edges.begin()) - 1;
        b = std::min(b, bins - 1);
        hist.mass[b] += weights[i];
    }
    for (double &m : hist.mass) {
        m /= total;
    }
    return hist;
}

std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::span<const double> weights) {
    check_samples(values, weights);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double iqr = weighted_quantile(values, weights, 0.75) - weighted_quantile(values, weights, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
    if (!(hi > lo) || !(width > 0.0)) {
        return {lo - 0.5, hi + 0.5};
    }
    const auto bins = static_cast<std::size_t>(std::clamp(std::ceil((hi - lo) / width), 1.0,
                                                          static_cast<double>(kMaxBins)));
    std::vector<double> edges(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        edges[b] = b == bins ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    return edges;
}

std::vector<double> integer_edges(std::span<const double> values) {
    const double hi = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    const auto top = static_cast<std::size_t>(std::max(0.0, hi));
    std::vector<double> edges(top + 2);
    for (std::size_t n = 0; n < edges.size(); ++n) {
        edges[n] = static_cast<double>(n) - 0.5;
    }
    return edges;
}

EnsembleSummary ensemble_summary(const std::vector<TrajectoryRecord> &records, std::optional<std::size_t> bins) {
    if (records.empty()) {
        throw PreconditionError("ensemble_summary needs at least one record");
    }
    const TrajectoryRecord &first = records.front();
    if (first.times.empty()) {
        throw PreconditionError("ensemble_summary: records have no samples");
    }
    for (const auto &rec : records) {
        if (rec.model_hash != first.model_hash || rec.unraveling != first.unraveling) {
            throw PreconditionError("ensemble_summary: records come from different models");
        }
        if (rec.times != first.times) {
            throw PreconditionError("ensemble_summary: records use different time grids");
        }
    }

    EnsembleSummary s;
    s.unraveling = first.unraveling;
    s.model_hash = first.model_hash;
    s.n_paths = records.size();
    s.times = first.times;
    const Eigen::Index dim = first.chi.front().size();
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        Matrix acc = Matrix::Zero(dim, dim);
        double total = 0.0;
        for (const auto &rec : records) {
            acc += rec.chi[k] * rec.chi[k].adjoint();
            total += rec.weight[k];
        }
        if (!(total > 0.0)) {
            throw NumericalError("ensemble weights vanish at t = " + textio::format_double(s.times[k]));
        }
        acc /= total;
        s.rho_hat.emplace_back(0.5 * (acc + acc.adjoint()));
    }

    const std::size_t last = s.times.size() - 1;
    s.output_time = s.times[last];
    const bool diffusive = s.unraveling == Unraveling::diffusive;
    if (diffusive && !(s.output_time > 0.0)) {
        throw PreconditionError("ensemble_summary: the diffusive output y = q_t / t needs t > 0");
    }
    for (const auto &rec : records) {
        s.outputs.push_back(diffusive ? rec.output[last] / s.output_time : rec.output[last]);
        s.output_weights.push_back(rec.weight[last]);
    }

    std::vector<double> edges;
    if (!diffusive) {
        edges = integer_edges(s.outputs);
    } else if (bins) {
        const auto [lo_it, hi_it] = std::minmax_element(s.outputs.begin(), s.outputs.end());
        const std::size_t nb = std::max<std::size_t>(1, *bins);
        const double lo = *lo_it;
        const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
        for (std::size_t b = 0; b <= nb; ++b) {
            edges.push_back(b == nb ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(nb));
        }
    } else {
        edges = freedman_diaconis_edges(s.outputs, s.output_weights);
    }
    s.histogram = weighted_histogram(s.outputs, s.output_weights, std::move(edges));
    s.moments = weighted_moments(s.outputs, s.output_weights);
    return s;
}

std::vector<double> mixture_distances(const EnsembleSummary &summary, const ModelSpec &model, double oracle_step) {
    if (summary.model_hash != model.hash()) {
        throw PreconditionError("mixture_distances: summary was produced by a different model");
    }
    const std::vector<DensityMatrix> oracle = master_equation_oracle(model, summary.times, oracle_step);
    std::vector<double> out;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        out.push_back(trace_distance(summary.rho_hat[k], oracle[k]));
    }
    return out;
}

double diffusive_output_cdf(const EigenDecomposition &r_eig, const Vector &xi, double hbar, double t, double y) {
    const Eigen::VectorXd p = (r_eig.vectors.adjoint() * xi).cwiseAbs2();
    const double sigma = std::sqrt(hbar / t);
    double f = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        f += p(k) * 0.5 * std::erfc(-(y - r_eig.values(k)) / (sigma * std::sqrt(2.0)));
    }
    return f;
}

OutputLawReport output_law_check(const EnsembleSummary &summary, const ModelSpec &model, double t) {
    if (std::abs(t - summary.output_time) > 1e-9 * std::max(1.0, t)) {
        throw PreconditionError("output_law_check: the summary holds outputs at t = " +
                                textio::format_double(summary.output_time) + ", not " + textio::format_double(t));
    }
    OutputLawReport report;
    report.mean = summary.moments.mean;
    report.std_error = summary.moments.std_error;
    report.variance = summary.moments.variance;
    const Vector &xi = model.initial.amplitudes();
    const Histogram &hist = summary.histogram;

    if (summary.unraveling == Unraveling::diffusive) {
        if (!model.l.is_hermitian() || max_abs(commutator(model.h, model.l).matrix()) > kHermitianTol) {
            throw RegimeError("output_law_check: the convolution law needs Hermitian L with [H, L] = 0");
        }
        const EigenDecomposition r_eig = herm_eig(model.r());
        const Eigen::VectorXd p = (r_eig.vectors.adjoint() * xi).cwiseAbs2();
        double m1 = 0.0, m2 = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) {
            m1 += p(k) * r_eig.values(k);
            m2 += p(k) * r_eig.values(k) * r_eig.values(k);
        }
        report.mean_expected = m1;
        report.variance_expected = m2 - m1 * m1 + model.hbar / t;
        auto cdf = [&](double y) { return diffusive_output_cdf(r_eig, xi, model.hbar, t, y); };
        report.cdf_sup_error = cdf_sup_error(summary.outputs, summary.output_weights, cdf, cdf);
        for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
            report.rows.push_back({0.5 * (hist.edges[b] + hist.edges[b + 1]), hist.mass[b],
                                   cdf(hist.edges[b + 1]) - cdf(hist.edges[b])});
        }
        return report;
    }

    const double n_seen = *std::max_element(summary.outputs.begin(), summary.outputs.end());
    const std::size_t n_max = std::max(default_counting_cutoff(model.l, t), static_cast<std::size_t>(n_seen));
    const Instrument instr = counting_instrument(model.l, t, n_max);
    const std::vector<double> probs = outcome_probabilities(instr, model.initial);
    std::vector<double> cdf_table(probs.size());
    double m1 = 0.0, m2 = 0.0, acc = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) {
        acc += probs[n];
        cdf_table[n] = acc;
        m1 += probs[n] * static_cast<double>(n);
        m2 += probs[n] * static_cast<double>(n) * static_cast<double>(n);
    }
    report.mean_expected = m1;
    report.variance_expected = m2 - m1 * m1;
    auto cdf = [&](double n) {
        if (n < 0.0) {
            return 0.0;
        }
        const auto idx = std::min(static_cast<std::size_t>(n), cdf_table.size() - 1);
        return cdf_table[idx];
    };
    auto cdf_left = [&](double n) { return cdf(n - 1.0); };
    report.cdf_sup_error = cdf_sup_error(summary.outputs, summary.output_weights, cdf, cdf_left);
    for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
        report.rows.push_back({static_cast<double>(b), hist.mass[b], b < probs.size() ? probs[b] : 0.0});
    }
    return report;
}

void write_rho_compare(std::ostream &out, std::span<const double> times, std::span<const double> distances,
                       const std::string &config_hash) {
    if (times.size() != distances.size()) {
        throw DimensionError("write_rho_compare: one distance per time");
    }
    write_header(out, "rho_compare", config_hash, "t [time], trace_distance [dimensionless]", "t,trace_distance");
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << textio::format_double(times[k]) << "," << textio::format_double(distances[k]) << "\n";
    }
}

void write_output_hist(std::ostream &out, const OutputLawReport &report, Unraveling unraveling,
                       const std::string &config_hash) {
    const char *units = unraveling == Unraveling::diffusive
                            ? "bin [output y, centre of bin], empirical [probability], theoretical [probability]"
                            : "bin [count n], empirical [probability], theoretical [probability]";
    write_header(out, "output_hist", config_hash, units, "bin,empirical,theoretical");
    for (const HistRow &row : report.rows) {
        out << textio::format_double(row.bin) << "," << textio::format_double(row.empirical) << ","
            << (std::isnan(row.theoretical) ? std::string() : textio::format_double(row.theoretical)) << "\n";
    }
}

}  // namespace qnd
