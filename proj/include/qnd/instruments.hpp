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
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "qnd/hilbert.hpp"

namespace qnd {

/// Completeness tolerances: exact sums vs trapezoidal quadrature.
inline constexpr double kDiscreteCompletenessTol = 1e-10;
inline constexpr double kGridCompletenessTol = 1e-6;
/// Outcomes with likelihood at or below this have no posterior.
inline constexpr double kZeroLikelihood = 1e-14;

/// Outcome labels together with the reference measure nu.
///
/// Discrete spaces carry a strictly positive weight per label. Grid spaces are
/// uniform on [y_min, y_max] with reference density f (Lebesgue by default);
/// integrals over them use the trapezoidal rule.
class OutcomeSpace {
   public:
    enum class Kind { discrete, grid };

    static OutcomeSpace discrete(std::vector<double> labels, std::vector<double> weights);
    static OutcomeSpace grid(double y_min, double y_max, std::size_t n_points,
                             const std::function<double(double)> &density = {});

    Kind kind() const { return kind_; }
    std::size_t size() const { return values_.size(); }
    double value(std::size_t i) const { return values_.at(i); }
    const std::vector<double> &values() const { return values_; }
    /// nu_i for discrete outcomes, f(y_i) on a grid.
    double reference_weight(std::size_t i) const { return reference_.at(i); }
    /// nu_i for discrete outcomes, trapezoid weight times f(y_i) on a grid.
    double quadrature_weight(std::size_t i) const { return quadrature_.at(i); }
    const std::vector<double> &quadrature_weights() const { return quadrature_; }

    /// Index of the outcome equal to y within tol, if any.
    std::optional<std::size_t> index_of(double y, double tol = 1e-12) const;

   private:
    OutcomeSpace(Kind kind, std::vector<double> values, std::vector<double> reference,
                 std::vector<double> quadrature);

    Kind kind_;
    std::vector<double> values_;
    std::vector<double> reference_;
    std::vector<double> quadrature_;
};

/// max |sum_i G_i† G_i w_i - I| over the outcome quadrature.
double completeness_defect(const OutcomeSpace &space, const std::vector<Operator> &reductions);

/// A family of reduction operators G(y) over an outcome space.
class Instrument {
   public:
    /// Evaluates G(y) anywhere on the real line, for continuous families.
    using ReductionFn = std::function<Operator(double)>;

    /// Throws CompletenessError when the defect exceeds `tolerance`.
    Instrument(OutcomeSpace space, std::vector<Operator> reductions, double tolerance,
               ReductionFn reduction_fn = {});
    /// Tolerance chosen by the kind of the outcome space.
    Instrument(OutcomeSpace space, std::vector<Operator> reductions, ReductionFn reduction_fn = {});

    const OutcomeSpace &space() const { return space_; }
    std::size_t dim() const { return reductions_.front().dim(); }
    std::size_t size() const { return reductions_.size(); }
    const std::vector<Operator> &reductions() const { return reductions_; }
    const Operator &reduction(std::size_t i) const { return reductions_.at(i); }
    /// G(y) off the stored outcomes; requires a reduction function or an exact outcome match.
    Operator reduction_at(double y) const;

    double completeness_defect() const { return completeness_defect_; }
    double tolerance() const { return tolerance_; }

   private:
    OutcomeSpace space_;
    std::vector<Operator> reductions_;
    ReductionFn reduction_fn_;
    double tolerance_;
    double completeness_defect_;
};

struct PosteriorResult {
    double outcome;
    PureState posterior;  // normalized, first significant amplitude real positive
    double density;       // g_xi(y) = |G(y) xi|^2 with respect to nu
};

/// E(y) = G(y)† G(y) for every stored outcome.
std::vector<Operator> effects(const Instrument &instr);

PosteriorResult posterior(const Instrument &instr, const PureState &xi, std::size_t outcome_index);
PosteriorResult posterior_at(const Instrument &instr, const PureState &xi, double y);

/// g_xi(y_i) for every stored outcome.
std::vector<double> outcome_densities(const Instrument &instr, const PureState &xi);
/// g_xi(y_i) times the quadrature weight; sums to 1 up to the completeness defect.
std::vector<double> outcome_probabilities(const Instrument &instr, const PureState &xi);

/// Conditional probability <psi, O P psi> / <psi, P psi> of the orthoprojector O
/// given the event P. Exists only when [O, P] = 0; otherwise NondemolitionError.
double bayes_conditional(const Operator &o, const Operator &p, const PureState &psi);

/// The default grid for a Gaussian instrument: six standard deviations
/// sqrt(hbar / t) beyond the extreme eigenvalues of R, 2048 points.
OutcomeSpace default_gaussian_grid(const Operator &r, double t, double hbar);

/// Unsharp measurement of R over duration t:
/// G(y) = (t/h)^(1/4) exp(-(pi t / 2h) (y - R)^2), h = 2 pi hbar.
Instrument gaussian_instrument(const Operator &r, double t, double hbar,
                               const std::optional<OutcomeSpace> &space = std::nullopt);

/// e^{-t} t^n / n!
double poisson_weight(double t, std::size_t n);

/// ceil(lambda + 10 sqrt(lambda) + 20) with lambda = t max|eig(L)|^2.
std::size_t default_counting_cutoff(const Operator &l, double t);

/// Smallest cutoff whose truncated completeness defect is within kDiscreteCompletenessTol.
std::size_t minimal_counting_cutoff(const Operator &l, double t);

/// Counting measurement: outcomes n = 0..n_max with Poisson reference weights and
/// G(t, n) = L^n exp((t/2)(1 - L^2)). L must be Hermitian.
Instrument counting_instrument(const Operator &l, double t, std::optional<std::size_t> n_max = std::nullopt);

/// Outcome-averaged state sum_i G_i |xi><xi| G_i† w_i.
DensityMatrix apriori_state(const Instrument &instr, const PureState &xi);

/// Writes `instrument.txt` (columns y, nu, G) plus one operator file per outcome.
void export_instrument(const Instrument &instr, const std::filesystem::path &dir);
/// Reads an exported instrument back as a discrete instrument over the written weights.
Instrument import_instrument(const std::filesystem::path &dir);

}  // namespace qnd
