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

#include "qnd/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>

#include "qnd/errors.hpp"
#include "qnd/textio.hpp"

namespace qnd {

OutcomeSpace::OutcomeSpace(Kind kind, std::vector<double> values, std::vector<double> reference,
                           std::vector<double> quadrature)
    : kind_(kind), values_(std::move(values)), reference_(std::move(reference)), quadrature_(std::move(quadrature)) {}

OutcomeSpace OutcomeSpace::discrete(std::vector<double> labels, std::vector<double> weights) {
    if (labels.empty() || labels.size() != weights.size()) {
        throw PreconditionError("discrete outcome space needs one weight per label");
    }
    for (double w : weights) {
        if (!(w > 0.0)) {
            throw PreconditionError("discrete reference weights must be strictly positive");
        }
    }
    std::vector<double> quadrature = weights;
    return OutcomeSpace(Kind::discrete, std::move(labels), std::move(weights), std::move(quadrature));
}

OutcomeSpace OutcomeSpace::grid(double y_min, double y_max, std::size_t n_points,
                                const std::function<double(double)> &density) {
    if (n_points < 2 || !(y_max > y_min)) {
        throw PreconditionError("grid needs n_points >= 2 and y_max > y_min");
    }
    const double h = (y_max - y_min) / static_cast<double>(n_points - 1);
    std::vector<double> values(n_points), reference(n_points), quadrature(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        values[i] = (i + 1 == n_points) ? y_max : y_min + h * static_cast<double>(i);
        reference[i] = density ? density(values[i]) : 1.0;
        if (!(reference[i] >= 0.0)) {
            throw PreconditionError("reference density must be non-negative");
        }
        const double trapezoid = (i == 0 || i + 1 == n_points) ? 0.5 * h : h;
        quadrature[i] = trapezoid * reference[i];
    }
    return OutcomeSpace(Kind::grid, std::move(values), std::move(reference), std::move(quadrature));
}

std::optional<std::size_t> OutcomeSpace::index_of(double y, double tol) const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (std::abs(values_[i] - y) <= tol) {
            return i;
        }
    }
    return std::nullopt;
}

double completeness_defect(const OutcomeSpace &space, const std::vector<Operator> &reductions) {
    if (reductions.size() != space.size() || reductions.empty()) {
        throw DimensionError("instrument needs exactly one reduction per outcome");
    }
    const std::size_t dim = reductions.front().dim();
    Matrix total = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < reductions.size(); ++i) {
        if (reductions[i].dim() != dim) {
            throw DimensionError("instrument reductions have inconsistent dimensions");
        }
        const Matrix &g = reductions[i].matrix();
        total += space.quadrature_weight(i) * (g.adjoint() * g);
    }
    return max_abs(total - Matrix::Identity(dim, dim));
}

Instrument::Instrument(OutcomeSpace space, std::vector<Operator> reductions, double tolerance,
                       ReductionFn reduction_fn)
    : space_(std::move(space)),
      reductions_(std::move(reductions)),
      reduction_fn_(std::move(reduction_fn)),
      tolerance_(tolerance),
      completeness_defect_(qnd::completeness_defect(space_, reductions_)) {
    if (!(completeness_defect_ <= tolerance_)) {
        throw CompletenessError("instrument completeness defect " + textio::format_double(completeness_defect_) +
                                    " exceeds tolerance " + textio::format_double(tolerance_),
                                completeness_defect_);
    }
}

Instrument::Instrument(OutcomeSpace space, std::vector<Operator> reductions, ReductionFn reduction_fn)
    : Instrument(space, std::move(reductions),
                 space.kind() == OutcomeSpace::Kind::grid ? kGridCompletenessTol : kDiscreteCompletenessTol,
                 std::move(reduction_fn)) {}

Operator Instrument::reduction_at(double y) const {
    if (reduction_fn_) {
        return reduction_fn_(y);
    }
    if (auto idx = space_.index_of(y)) {
        return reductions_[*idx];
    }
    throw PreconditionError("outcome " + textio::format_double(y) + " is not in the outcome space");
}

std::vector<Operator> effects(const Instrument &instr) {
    std::vector<Operator> out;
    out.reserve(instr.size());
    for (const Operator &g : instr.reductions()) {
        out.push_back(Operator::hermitian(0.5 * (g.matrix().adjoint() * g.matrix() +
                                                 (g.matrix().adjoint() * g.matrix()).adjoint())));
    }
    return out;
}

namespace {

PosteriorResult condition(const Operator &g, const PureState &xi, double outcome) {
    if (!xi.is_normalized()) {
        throw PreconditionError("posterior requires a normalized input state");
    }
    PureState chi = g * xi;
    const double density = chi.norm2();
    if (!(density > kZeroLikelihood)) {
        throw ZeroLikelihoodError("outcome has zero likelihood (g = " + textio::format_double(density) + ")");
    }
    return PosteriorResult{outcome, chi.normalized_gauge(), density};
}

}  // namespace

PosteriorResult posterior(const Instrument &instr, const PureState &xi, std::size_t outcome_index) {
    if (outcome_index >= instr.size()) {
        throw PreconditionError("outcome index out of range");
    }
    return condition(instr.reduction(outcome_index), xi, instr.space().value(outcome_index));
}

PosteriorResult posterior_at(const Instrument &instr, const PureState &xi, double y) {
    return condition(instr.reduction_at(y), xi, y);
}

std::vector<double> outcome_densities(const Instrument &instr, const PureState &xi) {
    std::vector<double> out;
    out.reserve(instr.size());
    for (const Operator &g : instr.reductions()) {
        out.push_back((g * xi).norm2());
    }
    return out;
}

std::vector<double> outcome_probabilities(const Instrument &instr, const PureState &xi) {
    std::vector<double> out = outcome_densities(instr, xi);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] *= instr.space().quadrature_weight(i);
    }
    return out;
}

namespace {

void require_orthoprojector(const Operator &p, const char *name) {
    const double herm = p.hermiticity_defect();
    const double idem = max_abs(p.matrix() * p.matrix() - p.matrix());
    if (herm > kHermitianTol || idem > kHermitianTol) {
        throw PreconditionError(std::string(name) + " is not an orthoprojector");
    }
}

}  // namespace

double bayes_conditional(const Operator &o, const Operator &p, const PureState &psi) {
    if (o.dim() != p.dim() || o.dim() != psi.dim()) {
        throw DimensionError("bayes_conditional operands have different dimensions");
    }
    require_orthoprojector(o, "O");
    require_orthoprojector(p, "P");
    const double p_mass = inner(psi, p * psi).real();
    if (!(p_mass > kZeroLikelihood)) {
        throw ZeroLikelihoodError("conditioning event has zero probability");
    }
    const double defect = max_abs(commutator(o, p).matrix());
    if (defect > kHermitianTol) {
        throw NondemolitionError("no conditional probability: nondemolition violated (|[O,P]| = " +
                                 textio::format_double(defect) + ")");
    }
    double value = inner(psi, o * (p * psi)).real() / p_mass;
    constexpr double kSlack = 1e-12;
    if (value < -kSlack || value > 1.0 + kSlack) {
        throw NumericalError("conditional probability outside [0, 1]: " + textio::format_double(value));
    }
    return std::clamp(value, 0.0, 1.0);
}

OutcomeSpace default_gaussian_grid(const Operator &r, double t, double hbar) {
    if (!(t > 0.0) || !(hbar > 0.0)) {
        throw PreconditionError("gaussian instrument needs t > 0 and hbar > 0");
    }
    const EigenDecomposition eig = herm_eig(r);
    const double sigma = std::sqrt(hbar / t);
    const double lo = eig.values.minCoeff() - 6.0 * sigma;
    const double hi = eig.values.maxCoeff() + 6.0 * sigma;
    return OutcomeSpace::grid(lo, hi, 2048);
}

Instrument gaussian_instrument(const Operator &r, double t, double hbar, const std::optional<OutcomeSpace> &space) {
    if (!r.is_hermitian()) {
        throw PreconditionError("gaussian instrument requires a Hermitian R");
    }
    OutcomeSpace grid = space ? *space : default_gaussian_grid(r, t, hbar);
    const double h = 2.0 * std::numbers::pi * hbar;
    const double prefactor = std::pow(t / h, 0.25);
    const double rate = std::numbers::pi * t / (2.0 * h);
    auto eig = std::make_shared<const EigenDecomposition>(herm_eig(r));
    Instrument::ReductionFn fn = [eig, prefactor, rate](double y) {
        return Operator::hermitian(
            functional_calculus(*eig, [&](double x) { return prefactor * std::exp(-rate * (y - x) * (y - x)); })
                .matrix());
    };
    std::vector<Operator> reductions;
    reductions.reserve(grid.size());
    for (double y : grid.values()) {
        reductions.push_back(fn(y));
    }
    return Instrument(std::move(grid), std::move(reductions), kGridCompletenessTol, std::move(fn));
}

double poisson_weight(double t, std::size_t n) {
    if (t == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    const double k = static_cast<double>(n);
    return std::exp(-t + k * std::log(t) - std::lgamma(k + 1.0));
}

namespace {

double max_abs_eigenvalue(const Operator &l) {
    const EigenDecomposition eig = herm_eig(l);
    return eig.values.cwiseAbs().maxCoeff();
}

// Truncated completeness defect of the counting family, evaluated on the spectrum:
// for eigenvalue l the truncated sum is the Poisson(l^2 t) CDF at n_max.
double counting_defect_on_spectrum(const Eigen::VectorXd &spectrum, double t, std::size_t n_max) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
        const double mean = spectrum(k) * spectrum(k) * t;
        double cdf = 0.0;
        for (std::size_t n = 0; n <= n_max; ++n) {
            cdf += poisson_weight(mean, n);
        }
        worst = std::max(worst, std::abs(1.0 - cdf));
    }
    return worst;
}

}  // namespace

std::size_t default_counting_cutoff(const Operator &l, double t) {
    const double lmax = max_abs_eigenvalue(l);
    const double lambda = t * lmax * lmax;
    return static_cast<std::size_t>(std::ceil(lambda + 10.0 * std::sqrt(lambda) + 20.0));
}

std::size_t minimal_counting_cutoff(const Operator &l, double t) {
    const EigenDecomposition eig = herm_eig(l);
    std::size_t n = 0;
    while (counting_defect_on_spectrum(eig.values, t, n) > kDiscreteCompletenessTol) {
        ++n;
    }
    return n;
}

Instrument counting_instrument(const Operator &l, double t, std::optional<std::size_t> n_max) {
    if (!l.is_hermitian()) {
        throw PreconditionError("counting instrument requires a Hermitian L");
    }
    if (!(t >= 0.0)) {
        throw PreconditionError("counting instrument needs t >= 0");
    }
    const EigenDecomposition eig = herm_eig(l);
    // With t = 0 the reference measure is the point mass at n = 0.
    const std::size_t cutoff = t == 0.0 ? 0 : n_max.value_or(default_counting_cutoff(l, t));
    std::vector<double> labels, weights;
    std::vector<Operator> reductions;
    for (std::size_t n = 0; n <= cutoff; ++n) {
        labels.push_back(static_cast<double>(n));
        weights.push_back(poisson_weight(t, n));
        const double k = static_cast<double>(n);
        reductions.push_back(Operator::hermitian(
            functional_calculus(eig, [&](double x) { return std::pow(x, k) * std::exp(0.5 * t * (1.0 - x * x)); })
                .matrix()));
    }
    OutcomeSpace space = OutcomeSpace::discrete(std::move(labels), std::move(weights));
    try {
        return Instrument(std::move(space), std::move(reductions), kDiscreteCompletenessTol);
    } catch (const CompletenessError &err) {
        throw CompletenessError("counting instrument tail defect " + textio::format_double(err.defect()) +
                                    " exceeds tolerance with n_max = " + std::to_string(cutoff) +
                                    "; minimal sufficient n_max is " + std::to_string(minimal_counting_cutoff(l, t)),
                                err.defect());
    }
}

DensityMatrix apriori_state(const Instrument &instr, const PureState &xi) {
    if (!xi.is_normalized()) {
        throw PreconditionError("apriori_state requires a normalized input state");
    }
    Matrix sigma = Matrix::Zero(instr.dim(), instr.dim());
    for (std::size_t i = 0; i < instr.size(); ++i) {
        const Vector chi = instr.reduction(i).matrix() * xi.amplitudes();
        sigma += instr.space().quadrature_weight(i) * (chi * chi.adjoint());
    }
    return DensityMatrix(std::move(sigma));
}

namespace {

std::string operator_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "G_%06zu.op", i);
    return buf;
}

}  // namespace

void export_instrument(const Instrument &instr, const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    std::ofstream table(dir / "instrument.txt");
    if (!table) {
        throw ParseError("cannot write " + (dir / "instrument.txt").string());
    }
    const bool grid = instr.space().kind() == OutcomeSpace::Kind::grid;
    table << "# kind=" << (grid ? "grid" : "discrete") << " outcomes=" << instr.size() << " dim=" << instr.dim()
          << " tolerance=" << textio::format_double(instr.tolerance())
          << " completeness_defect=" << textio::format_double(instr.completeness_defect()) << '\n';
    table << "# nu is the quadrature weight of each outcome: sum_i G_i^dag G_i nu_i = I\n";
    table << "y,nu,G\n";
    for (std::size_t i = 0; i < instr.size(); ++i) {
        const std::string name = operator_file_name(i);
        table << textio::format_double(instr.space().value(i)) << ','
              << textio::format_double(instr.space().quadrature_weight(i)) << ',' << name << '\n';
        textio::save_operator(dir / name, instr.reduction(i));
    }
}

Instrument import_instrument(const std::filesystem::path &dir) {
    std::ifstream table(dir / "instrument.txt");
    if (!table) {
        throw ParseError("cannot open " + (dir / "instrument.txt").string());
    }
    double tolerance = kDiscreteCompletenessTol;
    std::vector<double> labels, weights;
    std::vector<Operator> reductions;
    std::string line;
    while (std::getline(table, line)) {
        if (line.empty() || line == "y,nu,G") {
            continue;
        }
        if (line.front() == '#') {
            const auto pos = line.find("tolerance=");
            if (pos != std::string::npos) {
                const auto end = line.find(' ', pos);
                tolerance = textio::parse_double(line.substr(pos + 10, end - pos - 10));
            }
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError("malformed instrument row '" + line + "'");
        }
        labels.push_back(textio::parse_double(line.substr(0, c1)));
        weights.push_back(textio::parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
        reductions.push_back(textio::load_operator(dir / line.substr(c2 + 1)));
    }
    return Instrument(OutcomeSpace::discrete(std::move(labels), std::move(weights)), std::move(reductions), tolerance);
}

}  // namespace qnd
