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

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "qnd/errors.hpp"
#include "qnd/rng.hpp"
#include "qnd/textio.hpp"

namespace qnd {

namespace {

constexpr std::size_t kBatchLanes = 64;
constexpr double kZeroHamiltonian = 1e-12;

void require_closed_form_regime(const ModelSpec &model, const char *who) {
    if (max_abs(model.h.matrix()) > kZeroHamiltonian) {
        throw RegimeError(std::string(who) + ": the closed form needs H = 0");
    }
    if (!model.l.is_hermitian()) {
        throw RegimeError(std::string(who) + ": the closed form needs a Hermitian L");
    }
}

// Step indices at which a path is recorded: multiples of the stride plus the last step.
std::vector<std::size_t> record_steps(std::size_t steps, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= steps; k += stride) {
        out.push_back(k);
    }
    if (out.back() != steps) {
        out.push_back(steps);
    }
    return out;
}

double step_time(const SDEConfig &config, std::size_t k, std::size_t steps) {
    return k == steps ? config.t_final : static_cast<double>(k) * config.dt;
}

TrajectoryRecord empty_record(const ModelSpec &model, const SDEConfig &config, std::uint64_t seed) {
    TrajectoryRecord rec;
    rec.unraveling = model.unraveling;
    rec.seed = seed;
    rec.model_hash = model.hash();
    rec.dt = config.dt;
    return rec;
}

void push_sample(TrajectoryRecord &rec, double t, Vector chi, double w_or_n, double output_scale) {
    rec.times.push_back(t);
    rec.weight.push_back(chi.squaredNorm());
    rec.chi.push_back(std::move(chi));
    rec.w_or_n.push_back(w_or_n);
    rec.output.push_back(output_scale * w_or_n);
}

[[noreturn]] void throw_blowup(std::uint64_t seed, double t, const SDEConfig &config) {
    throw NumericalError("diffusive path with seed " + std::to_string(seed) + " blew up at t = " +
                         textio::format_double(t) + " (dt = " + textio::format_double(config.dt) +
                         "); reduce dt");
}

// Euler–Maruyama over a batch of lanes. noise(k, dw) fills dw[0..lanes) for step k.
template <typename Noise>
void em_batch(const ModelSpec &model, const SDEConfig &config, const kernels::KernelTable &table,
              std::span<TrajectoryRecord> recs, Noise &&noise) {
    const std::size_t dim = model.dim();
    const std::size_t lanes = recs.size();
    const std::size_t steps = config.steps();
    const std::vector<std::size_t> rec_steps = record_steps(steps, config.record_stride);
    const double sqrt_hbar = std::sqrt(model.hbar);

    const Matrix a = Matrix::Identity(dim, dim) - model.k().matrix() * config.dt;
    const kernels::PlanarMatrix pa = kernels::PlanarMatrix::from(a);
    const kernels::PlanarMatrix pb = kernels::PlanarMatrix::from(model.l.matrix());

    kernels::StateBatch x(dim, lanes);
    kernels::StateBatch y(dim, lanes);
    for (std::size_t p = 0; p < lanes; ++p) {
        x.set_lane(p, model.initial.amplitudes());
    }
    std::vector<double> dw(lanes, 0.0);
    std::vector<double> w(lanes, 0.0);
    std::vector<double> n2(lanes, 0.0);

    auto record = [&](std::size_t k) {
        const double t = step_time(config, k, steps);
        for (std::size_t p = 0; p < lanes; ++p) {
            push_sample(recs[p], t, x.lane(p), w[p], sqrt_hbar);
        }
    };

    std::size_t next = 0;
    if (rec_steps[next] == 0) {
        record(0);
        ++next;
    }
    for (std::size_t k = 0; k < steps; ++k) {
        noise(k, dw.data());
        kernels::em_step(table, pa, pb, dw.data(), x, y);
        std::swap(x, y);
        kernels::norm2(table, x, n2.data());
        for (std::size_t p = 0; p < lanes; ++p) {
            w[p] = w[p] + dw[p];
            if (!(n2[p] <= kBlowupNorm * kBlowupNorm)) {
                throw_blowup(recs[p].seed, step_time(config, k + 1, steps), config);
            }
            if (config.store_increments) {
                recs[p].increments.push_back(dw[p]);
            }
        }
        if (next < rec_steps.size() && rec_steps[next] == k + 1) {
            record(k + 1);
            ++next;
        }
    }
}

// exp(-iHt/hbar) exp(w L - t L^2) xi for Hermitian L commuting with H.
TrajectoryRecord diffusive_exact_path(const ModelSpec &model, const SDEConfig &config, std::uint64_t seed,
                                      std::span<const double> increments) {
    if (!model.l.is_hermitian()) {
        throw RegimeError("exact_piecewise diffusive scheme needs a Hermitian L");
    }
    if (max_abs(commutator(model.h, model.l).matrix()) > kHermitianTol) {
        throw RegimeError("exact_piecewise diffusive scheme needs [H, L] = 0");
    }
    const std::size_t steps = config.steps();
    const std::vector<std::size_t> rec_steps = record_steps(steps, config.record_stride);
    const EigenDecomposition l_eig = herm_eig(model.l);
    const EigenDecomposition h_eig = herm_eig(model.h);
    const Vector c0 = l_eig.vectors.adjoint() * model.initial.amplitudes();
    const double sqrt_hbar = std::sqrt(model.hbar);

    TrajectoryRecord rec = empty_record(model, config, seed);
    auto record = [&](std::size_t k, double w) {
        const double t = step_time(config, k, steps);
        Vector c = c0;
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            const double lam = l_eig.values(j);
            c(j) *= std::exp(w * lam - t * lam * lam);
        }
        const Operator u = functional_calculus(
            h_eig, [&](double e) { return std::exp(Complex(0.0, -e * t / model.hbar)); });
        push_sample(rec, t, u.matrix() * (l_eig.vectors * c), w, sqrt_hbar);
    };

    double w = 0.0;
    std::size_t next = 0;
    if (rec_steps[next] == 0) {
        record(0, w);
        ++next;
    }
    for (std::size_t k = 0; k < steps; ++k) {
        w = w + increments[k];
        if (config.store_increments) {
            rec.increments.push_back(increments[k]);
        }
        if (next < rec_steps.size() && rec_steps[next] == k + 1) {
            record(k + 1, w);
            ++next;
        }
    }
    return rec;
}

TrajectoryRecord diffusive_path(const ModelSpec &model, const SDEConfig &config,
                                const kernels::KernelTable &table) {
    if (config.scheme == Scheme::exact_piecewise) {
        const std::vector<double> incs = wiener_path(config);
        return diffusive_exact_path(model, config, config.seed, incs);
    }
    std::vector<TrajectoryRecord> recs{empty_record(model, config, config.seed)};
    const double sqrt_dt = std::sqrt(config.dt);
    em_batch(model, config, table, recs, [&](std::size_t k, double *dw) {
        dw[0] = sqrt_dt * rng::standard_normal(config.seed, rng::Stream::wiener, k);
    });
    return std::move(recs.front());
}

std::string format_u64(std::uint64_t v) { return std::to_string(v); }

}  // namespace

const char *unraveling_name(Unraveling u) { return u == Unraveling::diffusive ? "diffusive" : "counting"; }

const char *scheme_name(Scheme s) { return s == Scheme::euler_maruyama ? "euler_maruyama" : "exact_piecewise"; }

Unraveling parse_unraveling(const std::string &text) {
    if (text == "diffusive") {
        return Unraveling::diffusive;
    }
    if (text == "counting") {
        return Unraveling::counting;
    }
    throw ParseError("unknown unraveling '" + text + "' (expected diffusive or counting)");
}

Scheme parse_scheme(const std::string &text) {
    if (text == "euler_maruyama") {
        return Scheme::euler_maruyama;
    }
    if (text == "exact_piecewise") {
        return Scheme::exact_piecewise;
    }
    throw ParseError("unknown scheme '" + text + "' (expected euler_maruyama or exact_piecewise)");
}

void ModelSpec::validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) {
        throw PreconditionError("hbar must be positive and finite");
    }
    if (h.dim() != dim() || l.dim() != dim()) {
        throw DimensionError("model: H is " + std::to_string(h.dim()) + "-dimensional, L is " +
                             std::to_string(l.dim()) + "-dimensional, initial state is " +
                             std::to_string(dim()) + "-dimensional");
    }
    if (!h.is_hermitian()) {
        throw PreconditionError("model: H is not Hermitian (defect " +
                                textio::format_double(h.hermiticity_defect()) + ")");
    }
    if (unraveling == Unraveling::counting && !l.is_hermitian()) {
        throw PreconditionError("model: the counting unraveling needs a Hermitian L");
    }
    if (!initial.is_normalized(1e-10)) {
        throw PreconditionError("model: initial state is not normalized (norm " +
                                textio::format_double(initial.norm()) + ")");
    }
}

Operator ModelSpec::k() const {
    return Complex(0.0, 1.0 / hbar) * h + Complex(0.5) * (l.adjoint() * l);
}

Operator ModelSpec::r() const { return Complex(std::sqrt(hbar)) * (l + l.adjoint()); }

std::uint64_t ModelSpec::hash() const {
    std::ostringstream out;
    out << "hbar=" << textio::format_double(hbar) << "\nunraveling=" << unraveling_name(unraveling) << "\n";
    textio::write_operator(out, h);
    textio::write_operator(out, l);
    textio::write_state(out, initial);
    return textio::fnv1a(out.str());
}

std::size_t SDEConfig::steps() const {
    if (!(t_final > 0.0) || !(dt > 0.0) || !std::isfinite(t_final) || !std::isfinite(dt)) {
        throw PreconditionError("t_final and dt must be positive and finite");
    }
    if (record_stride == 0) {
        throw PreconditionError("record_stride must be positive");
    }
    const double ratio = t_final / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n * dt - t_final) > 1e-9 * t_final) {
        throw PreconditionError("dt = " + textio::format_double(dt) + " does not divide t_final = " +
                                textio::format_double(t_final));
    }
    return static_cast<std::size_t>(n);
}

std::vector<double> wiener_path(const SDEConfig &config) {
    const std::size_t steps = config.steps();
    const double sqrt_dt = std::sqrt(config.dt);
    std::vector<double> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        out[k] = sqrt_dt * rng::standard_normal(config.seed, rng::Stream::wiener, k);
    }
    return out;
}

std::vector<double> poisson_path(const SDEConfig &config) {
    std::vector<double> jumps;
    if (!(config.t_final > 0.0)) {
        return jumps;
    }
    double t = 0.0;
    for (std::uint64_t k = 0;; ++k) {
        t += rng::standard_exponential(config.seed, rng::Stream::poisson, k);
        if (t > config.t_final) {
            break;
        }
        jumps.push_back(t);
    }
    return jumps;
}

TrajectoryRecord integrate_diffusive(const ModelSpec &model, const SDEConfig &config) {
    model.validate();
    if (model.unraveling != Unraveling::diffusive) {
        throw PreconditionError("integrate_diffusive needs a diffusive model");
    }
    return diffusive_path(model, config, kernels::active_kernels());
}

TrajectoryRecord integrate_diffusive(const ModelSpec &model, const SDEConfig &config,
                                     std::span<const double> increments, const kernels::KernelTable &table) {
    model.validate();
    if (model.unraveling != Unraveling::diffusive) {
        throw PreconditionError("integrate_diffusive needs a diffusive model");
    }
    const std::size_t steps = config.steps();
    if (increments.size() != steps) {
        throw DimensionError("integrate_diffusive: " + std::to_string(increments.size()) + " increments for " +
                             std::to_string(steps) + " steps");
    }
    if (config.scheme == Scheme::exact_piecewise) {
        return diffusive_exact_path(model, config, config.seed, increments);
    }
    std::vector<TrajectoryRecord> recs{empty_record(model, config, config.seed)};
    em_batch(model, config, table, recs, [&](std::size_t k, double *dw) { dw[0] = increments[k]; });
    return std::move(recs.front());
}

PureState diffusive_oracle(const ModelSpec &model, double w_t, double t) {
    require_closed_form_regime(model, "diffusive_oracle");
    const EigenDecomposition eig = herm_eig(model.l);
    const Operator g = functional_calculus(eig, [&](double lam) { return std::exp(w_t * lam - t * lam * lam); });
    return g * model.initial;
}

PureState counting_oracle(const ModelSpec &model, std::size_t n_t, double t) {
    require_closed_form_regime(model, "counting_oracle");
    const EigenDecomposition eig = herm_eig(model.l);
    const Operator g = functional_calculus(eig, [&](double lam) {
        return std::pow(lam, static_cast<double>(n_t)) * std::exp(0.5 * t * (1.0 - lam * lam));
    });
    return g * model.initial;
}

TrajectoryRecord integrate_counting(const ModelSpec &model, const SDEConfig &config) {
    model.validate();
    if (model.unraveling != Unraveling::counting) {
        throw PreconditionError("integrate_counting needs a counting model");
    }
    require_closed_form_regime(model, "integrate_counting");

    const std::size_t steps = config.steps();
    const std::vector<std::size_t> rec_steps = record_steps(steps, config.record_stride);
    const EigenDecomposition eig = herm_eig(model.l);
    const Eigen::Index dim = eig.values.size();
    Vector c = eig.vectors.adjoint() * model.initial.amplitudes();

    TrajectoryRecord rec = empty_record(model, config, config.seed);
    rec.jump_times = poisson_path(config);

    // Work in the eigenbasis of L, where the drift and the jump are diagonal.
    double now = 0.0;
    auto drift_to = [&](double t) {
        const double span = t - now;
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double lam = eig.values(j);
            c(j) *= std::exp(0.5 * span * (1.0 - lam * lam));
        }
        now = t;
    };

    std::size_t n = 0;
    std::size_t next_jump = 0;
    for (std::size_t k : rec_steps) {
        const double t = step_time(config, k, steps);
        while (next_jump < rec.jump_times.size() && rec.jump_times[next_jump] <= t) {
            drift_to(rec.jump_times[next_jump]);
            for (Eigen::Index j = 0; j < dim; ++j) {
                c(j) *= eig.values(j);
            }
            ++n;
            ++next_jump;
        }
        drift_to(t);
        push_sample(rec, t, eig.vectors * c, static_cast<double>(n), 1.0);
    }
    return rec;
}

std::vector<TrajectoryRecord> simulate_ensemble(const ModelSpec &model, const SDEConfig &config,
                                                std::size_t n_paths, const kernels::KernelTable *table) {
    model.validate();
    const kernels::KernelTable &k = table != nullptr ? *table : kernels::active_kernels();
    std::vector<TrajectoryRecord> out;
    out.reserve(n_paths);
    auto path_config = [&](std::size_t i) {
        SDEConfig c = config;
        c.seed = rng::path_seed(config.seed, i);
        return c;
    };

    if (model.unraveling == Unraveling::counting) {
        for (std::size_t i = 0; i < n_paths; ++i) {
            out.push_back(integrate_counting(model, path_config(i)));
        }
        return out;
    }
    if (config.scheme == Scheme::exact_piecewise) {
        for (std::size_t i = 0; i < n_paths; ++i) {
            out.push_back(diffusive_path(model, path_config(i), k));
        }
        return out;
    }

    const double sqrt_dt = std::sqrt(config.dt);
    for (std::size_t first = 0; first < n_paths; first += kBatchLanes) {
        const std::size_t lanes = std::min(kBatchLanes, n_paths - first);
        std::vector<TrajectoryRecord> batch;
        std::vector<std::uint64_t> seeds;
        for (std::size_t p = 0; p < lanes; ++p) {
            seeds.push_back(rng::path_seed(config.seed, first + p));
            batch.push_back(empty_record(model, config, seeds.back()));
        }
        em_batch(model, config, k, batch, [&](std::size_t step, double *dw) {
            for (std::size_t p = 0; p < lanes; ++p) {
                dw[p] = sqrt_dt * rng::standard_normal(seeds[p], rng::Stream::wiener, step);
            }
        });
        for (auto &rec : batch) {
            out.push_back(std::move(rec));
        }
    }
    return out;
}

NormalizedPath normalize_and_weight(const TrajectoryRecord &rec) {
    NormalizedPath out;
    out.states.reserve(rec.chi.size());
    out.weights.reserve(rec.chi.size());
    for (std::size_t i = 0; i < rec.chi.size(); ++i) {
        const double n2 = rec.chi[i].squaredNorm();
        if (!(std::sqrt(n2) >= kVanishingNorm)) {
            throw NumericalError("vanishing norm at t = " + textio::format_double(rec.times[i]) +
                                 "; the path cannot be renormalized");
        }
        out.states.push_back(PureState(rec.chi[i]).normalized_gauge());
        out.weights.push_back(n2);
    }
    return out;
}

void write_record(std::ostream &out, const TrajectoryRecord &rec, std::size_t dim) {
    const bool diffusive = rec.unraveling == Unraveling::diffusive;
    out << "# qnd trajectory unraveling=" << unraveling_name(rec.unraveling)
        << " model=" << textio::hex64(rec.model_hash) << " seed=" << format_u64(rec.seed)
        << " dt=" << textio::format_double(rec.dt) << " dim=" << dim << "\n";
    out << "# units: t [time], " << (diffusive ? "w [sqrt(time)]" : "n [count]")
        << ", g [dimensionless], chi [amplitude]\n";
    out << "# columns: t," << (diffusive ? "w" : "n") << ",g";
    for (std::size_t j = 1; j <= dim; ++j) {
        out << ",re(chi_" << j << "),im(chi_" << j << ")";
    }
    out << "\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        out << textio::format_double(rec.times[i]) << "," << textio::format_double(rec.w_or_n[i]) << ","
            << textio::format_double(rec.weight[i]);
        for (std::size_t j = 0; j < dim; ++j) {
            out << "," << textio::format_double(rec.chi[i](j).real()) << ","
                << textio::format_double(rec.chi[i](j).imag());
        }
        out << "\n";
    }
}

TrajectoryRecord read_record(std::istream &in) {
    TrajectoryRecord rec;
    bool have_header = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("# qnd trajectory ", 0) != 0) {
                continue;
            }
            std::istringstream fields(line.substr(17));
            std::string kv;
            while (fields >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw ParseError("trajectory header: malformed field '" + kv + "'");
                }
                const std::string key = kv.substr(0, eq);
                const std::string value = kv.substr(eq + 1);
                if (key == "unraveling") {
                    rec.unraveling = parse_unraveling(value);
                } else if (key == "model") {
                    rec.model_hash = std::stoull(value, nullptr, 16);
                } else if (key == "seed") {
                    rec.seed = std::stoull(value);
                } else if (key == "dt") {
                    rec.dt = textio::parse_double(value);
                }
            }
            have_header = true;
            continue;
        }
        if (!have_header) {
            throw ParseError("trajectory file: data before the header");
        }
        std::vector<double> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto comma = line.find(',', start);
            const auto end = comma == std::string::npos ? line.size() : comma;
            cells.push_back(textio::parse_double(std::string_view(line).substr(start, end - start)));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (cells.size() < 5 || (cells.size() - 3) % 2 != 0) {
            throw ParseError("trajectory file: row with " + std::to_string(cells.size()) + " cells");
        }
        Vector chi((cells.size() - 3) / 2);
        for (Eigen::Index j = 0; j < chi.size(); ++j) {
            chi(j) = Complex(cells[3 + 2 * j], cells[4 + 2 * j]);
        }
        rec.times.push_back(cells[0]);
        rec.w_or_n.push_back(cells[1]);
        rec.weight.push_back(cells[2]);
        rec.chi.push_back(std::move(chi));
    }
    if (!have_header) {
        throw ParseError("trajectory file: missing header");
    }
    return rec;
}

std::optional<std::string> stability_warning(const ModelSpec &model, const SDEConfig &config) {
    const Operator ll = model.l.adjoint() * model.l;
    const double norm2 = herm_eig(Operator(0.5 * (ll.matrix() + ll.matrix().adjoint()))).values.maxCoeff();
    const double stiffness = config.dt * norm2;
    if (stiffness > 0.1) {
        return "dt |L|^2 = " + textio::format_double(stiffness) +
               " exceeds 0.1; explicit stepping may be inaccurate or unstable";
    }
    return std::nullopt;
}

ConvergenceReport diffusive_convergence(const ModelSpec &model, double t_final, std::span<const double> dts,
                                        std::uint64_t seed, std::size_t n_paths) {
    require_closed_form_regime(model, "diffusive_convergence");
    if (dts.size() < 2 || n_paths == 0) {
        throw PreconditionError("diffusive_convergence needs at least two step sizes and one path");
    }
    ModelSpec m = model;
    m.unraveling = Unraveling::diffusive;
    std::vector<double> sorted(dts.begin(), dts.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double dt_min = sorted.back();
    std::vector<std::size_t> factors;
    for (double dt : sorted) {
        const double f = std::round(dt / dt_min);
        if (f < 1.0 || std::abs(f * dt_min - dt) > 1e-9 * dt) {
            throw PreconditionError("diffusive_convergence: dt = " + textio::format_double(dt) +
                                    " is not a multiple of " + textio::format_double(dt_min));
        }
        factors.push_back(static_cast<std::size_t>(f));
    }

    const EigenDecomposition eig = herm_eig(m.l);
    const Vector c0 = eig.vectors.adjoint() * m.initial.amplitudes();
    auto oracle = [&](double w, double t) {
        Vector c = c0;
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            const double lam = eig.values(j);
            c(j) *= std::exp(w * lam - t * lam * lam);
        }
        return Vector(eig.vectors * c);
    };

    const kernels::KernelTable &table = kernels::active_kernels();
    ConvergenceReport report;
    report.dts = sorted;
    report.errors.assign(sorted.size(), 0.0);
    for (std::size_t i = 0; i < n_paths; ++i) {
        SDEConfig fine{t_final, dt_min, rng::path_seed(seed, i), Scheme::euler_maruyama, 1, false};
        const std::vector<double> fine_incs = wiener_path(fine);
        for (std::size_t d = 0; d < sorted.size(); ++d) {
            SDEConfig coarse = fine;
            coarse.dt = sorted[d];
            const std::size_t steps = coarse.steps();
            std::vector<double> incs(steps, 0.0);
            for (std::size_t k = 0; k < steps; ++k) {
                double acc = 0.0;
                for (std::size_t j = 0; j < factors[d]; ++j) {
                    acc = acc + fine_incs[k * factors[d] + j];
                }
                incs[k] = acc;
            }
            const TrajectoryRecord rec = integrate_diffusive(m, coarse, incs, table);
            double worst = 0.0;
            for (std::size_t r = 0; r < rec.times.size(); ++r) {
                worst = std::max(worst, (rec.chi[r] - oracle(rec.w_or_n[r], rec.times[r])).norm());
            }
            report.errors[d] += worst;
        }
    }
    for (double &e : report.errors) {
        e /= static_cast<double>(n_paths);
    }

    // Least-squares slope in log-log coordinates.
    const double n = static_cast<double>(sorted.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t d = 0; d < sorted.size(); ++d) {
        const double lx = std::log(sorted[d]);
        const double ly = std::log(report.errors[d]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    report.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report.monotone = true;
    for (std::size_t d = 1; d < sorted.size(); ++d) {
        report.monotone = report.monotone && report.errors[d] < report.errors[d - 1];
    }
    return report;
}

double counting_oracle_error(const ModelSpec &model, const SDEConfig &config, std::size_t n_paths) {
    ModelSpec m = model;
    m.unraveling = Unraveling::counting;
    require_closed_form_regime(m, "counting_oracle_error");
    const Matrix l = m.l.matrix();
    const Matrix l2 = l * l;
    const Eigen::Index dim = l.rows();
    const Matrix id = Matrix::Identity(dim, dim);

    // Evaluated with general-purpose matrix functions, not the eigenbasis used by the integrator.
    std::map<double, Matrix> drift_cache;
    std::vector<Matrix> powers{id};
    double worst = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        SDEConfig c = config;
        c.seed = rng::path_seed(config.seed, i);
        const TrajectoryRecord rec = integrate_counting(m, c);
        for (std::size_t r = 0; r < rec.times.size(); ++r) {
            const double t = rec.times[r];
            auto it = drift_cache.find(t);
            if (it == drift_cache.end()) {
                const Matrix arg = (0.5 * t) * (id - l2);
                it = drift_cache.emplace(t, arg.exp()).first;
            }
            const auto n = static_cast<std::size_t>(rec.w_or_n[r]);
            while (powers.size() <= n) {
                powers.push_back(powers.back() * l);
            }
            const Vector expected = powers[n] * (it->second * m.initial.amplitudes());
            worst = std::max(worst, (rec.chi[r] - expected).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

}  // namespace qnd
