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
#include <span>
#include <utility>
#include <vector>

#include "qnd/hilbert.hpp"
#include "qnd/instruments.hpp"

namespace qnd {

/// Half-open interval [lo, hi).
struct Interval {
    double lo;
    double hi;
    bool contains(double x) const { return lo <= x && x < hi; }
};

/// Partition of the real line near the spectrum of R into consecutive cells.
/// Cell k carries the pointer index first_index + k.
class CoarseGraining {
   public:
    CoarseGraining(std::vector<Interval> cells, int first_index = 0);

    /// Cells [lo + k step, lo + (k+1) step) for k = 0..count-1, indexed from first_index.
    static CoarseGraining uniform(double lo, double step, std::size_t count, int first_index = 0);

    const std::vector<Interval> &cells() const { return cells_; }
    int first_index() const { return first_index_; }
    int last_index() const { return first_index_ + static_cast<int>(cells_.size()) - 1; }

    /// Index i(x) of the cell containing x; throws PreconditionError if no cell does.
    int index_of(double x) const;

   private:
    std::vector<Interval> cells_;
    int first_index_;
};

/// Object ⊗ cyclic pointer Z_N. Compound basis index is object * N + pointer.
///
/// The pointer basis state m carries the counting label m for m < ceil(N/2) and
/// m - N otherwise, so labels form the centered window {-floor(N/2), ..., ceil(N/2)-1}
/// and the vacuum |0> has label 0.
struct DilatedModel {
    std::size_t object_dim;
    std::size_t pointer_size;
    std::vector<int> indices;          // occupied pointer indices, ascending
    std::vector<Operator> projectors;  // F_i for each entry of `indices`
    Operator index_operator;           // i(R) = sum_i i F_i
    Operator s;                        // S = sum_{i,k} F_{(i-k) mod N} ⊗ |i><k|
    Operator k_hat;                    // pointer counting operator on the compound space (I ⊗ k)
    Operator y;                        // S† (I ⊗ k) S
    PureState phi0;                    // pointer vacuum |0>

    std::size_t compound_dim() const { return object_dim * pointer_size; }
};

/// Counting label of pointer basis state m.
int pointer_label(std::size_t m, std::size_t pointer_size);
/// Pointer basis state carrying label `label` (mod N).
std::size_t pointer_slot(int label, std::size_t pointer_size);

DilatedModel build_dilation(const Operator &r, const CoarseGraining &grain, std::size_t pointer_size);

/// i(R) ⊗ 1 + I ⊗ k, the closed form of the output observable on the no-wrap subspace.
Operator output_observable_formula(const DilatedModel &model);

/// Compound basis indices whose pointer label stays inside the window after any
/// occupied shift, i.e. where the closed form and S† (I ⊗ k) S agree.
std::vector<std::size_t> no_wrap_indices(const DilatedModel &model);

/// S† Z S
Operator heisenberg(const DilatedModel &model, const Operator &z);

struct NondemolitionReport {
    double hcomm;  // |[S† (C⊗1) S, Y]|_max
    double icomm;  // |[C⊗1, Y]|_max
};

NondemolitionReport nondemolition_check(const DilatedModel &model, const Operator &c);

/// max over p of |<xi⊗phi0, e^{ipY} xi⊗phi0> - <xi, e^{ip i(R)} xi>|
double characteristic_match(const DilatedModel &model, const PureState &xi, std::span<const double> p_grid);

/// The discrete instrument G(i) = <i| S |phi0> induced on the object; unit weights.
Instrument induced_instrument(const DilatedModel &model);

/// max |S† S - I|
double unitarity_defect(const DilatedModel &model);

}  // namespace qnd
