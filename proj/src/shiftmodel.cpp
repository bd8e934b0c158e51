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

#include "qnd/shiftmodel.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <string>

#include "qnd/errors.hpp"
#include "qnd/textio.hpp"

namespace qnd {

CoarseGraining::CoarseGraining(std::vector<Interval> cells, int first_index)
    : cells_(std::move(cells)), first_index_(first_index) {
    if (cells_.empty()) {
        throw PreconditionError("coarse-graining needs at least one cell");
    }
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (!(cells_[k].hi > cells_[k].lo)) {
            throw PreconditionError("coarse-graining cell " + std::to_string(k) + " is empty");
        }
        if (k > 0 && cells_[k].lo < cells_[k - 1].hi) {
            throw PreconditionError("coarse-graining cells must be ordered and disjoint");
        }
    }
}

CoarseGraining CoarseGraining::uniform(double lo, double step, std::size_t count, int first_index) {
    if (!(step > 0.0) || count == 0) {
        throw PreconditionError("uniform coarse-graining needs step > 0 and count > 0");
    }
    std::vector<Interval> cells;
    cells.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        cells.push_back({lo + step * static_cast<double>(k), lo + step * static_cast<double>(k + 1)});
    }
    return CoarseGraining(std::move(cells), first_index);
}

int CoarseGraining::index_of(double x) const {
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (cells_[k].contains(x)) {
            return first_index_ + static_cast<int>(k);
        }
    }
    throw PreconditionError("partition does not cover eigenvalue " + textio::format_double(x));
}

int pointer_label(std::size_t m, std::size_t pointer_size) {
    const std::size_t upper = (pointer_size + 1) / 2;  // ceil(N/2)
    return m < upper ? static_cast<int>(m) : static_cast<int>(m) - static_cast<int>(pointer_size);
}

std::size_t pointer_slot(int label, std::size_t pointer_size) {
    const long n = static_cast<long>(pointer_size);
    return static_cast<std::size_t>(((label % n) + n) % n);
}

namespace {

Operator pointer_operator(const std::vector<double> &diag) {
    std::vector<Complex> values(diag.begin(), diag.end());
    return Operator::diagonal(std::span<const Complex>(values));
}

}  // namespace

DilatedModel build_dilation(const Operator &r, const CoarseGraining &grain, std::size_t pointer_size) {
    const EigenDecomposition eig = herm_eig(r);
    const std::size_t dim = r.dim();

    std::map<int, Matrix> cells;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const int idx = grain.index_of(eig.values(k));
        auto [it, inserted] = cells.try_emplace(idx, Matrix::Zero(dim, dim));
        it->second += eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    }

    const int lo = cells.begin()->first;
    const int hi = cells.rbegin()->first;
    const int reach = std::max({std::abs(lo), std::abs(hi), hi - lo});
    if (pointer_size < 2 || static_cast<long>(pointer_size) <= 2L * reach) {
        throw PreconditionError("pointer size " + std::to_string(pointer_size) +
                                " is too small: it must exceed twice the index range " + std::to_string(reach));
    }

    std::vector<int> indices;
    std::vector<Operator> projectors;
    Matrix index_op = Matrix::Zero(dim, dim);
    for (auto &[idx, proj] : cells) {
        indices.push_back(idx);
        index_op += static_cast<double>(idx) * proj;
        projectors.push_back(Operator::hermitian(0.5 * (proj + proj.adjoint())));
    }

    const std::size_t n = pointer_size;
    Matrix s = Matrix::Zero(dim * n, dim * n);
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const Matrix &f = projectors[c].matrix();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = pointer_slot(static_cast<int>(k) + indices[c], n);
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < dim; ++b) {
                    s(a * n + i, b * n + k) += f(a, b);
                }
            }
        }
    }

    std::vector<double> labels(n);
    for (std::size_t m = 0; m < n; ++m) {
        labels[m] = static_cast<double>(pointer_label(m, n));
    }
    Operator k_hat = tensor(Operator::identity(dim), pointer_operator(labels));
    Operator s_op(std::move(s));
    Matrix y = s_op.matrix().adjoint() * k_hat.matrix() * s_op.matrix();
    y = 0.5 * (y + y.adjoint()).eval();

    return DilatedModel{dim,
                        n,
                        std::move(indices),
                        std::move(projectors),
                        Operator::hermitian(0.5 * (index_op + index_op.adjoint())),
                        std::move(s_op),
                        std::move(k_hat),
                        Operator::hermitian(std::move(y)),
                        PureState::basis(n, 0)};
}

Operator output_observable_formula(const DilatedModel &model) {
    return tensor(model.index_operator, Operator::identity(model.pointer_size)) + model.k_hat;
}

std::vector<std::size_t> no_wrap_indices(const DilatedModel &model) {
    const std::size_t n = model.pointer_size;
    std::vector<std::size_t> slots;
    for (std::size_t m = 0; m < n; ++m) {
        const int label = pointer_label(m, n);
        bool inside = true;
        for (int idx : model.indices) {
            inside = inside && pointer_label(pointer_slot(label + idx, n), n) == label + idx;
        }
        if (inside) {
            slots.push_back(m);
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < model.object_dim; ++a) {
        for (std::size_t m : slots) {
            out.push_back(a * n + m);
        }
    }
    return out;
}

Operator heisenberg(const DilatedModel &model, const Operator &z) {
    if (z.dim() != model.compound_dim()) {
        throw DimensionError("heisenberg: operator of dimension " + std::to_string(z.dim()) +
                             " on compound space of dimension " + std::to_string(model.compound_dim()));
    }
    return Operator(model.s.matrix().adjoint() * z.matrix() * model.s.matrix());
}

NondemolitionReport nondemolition_check(const DilatedModel &model, const Operator &c) {
    if (c.dim() != model.object_dim) {
        throw DimensionError("nondemolition_check: object operator has the wrong dimension");
    }
    const Operator c0 = tensor(c, Operator::identity(model.pointer_size));
    const Operator evolved = heisenberg(model, c0);
    return NondemolitionReport{max_abs(commutator(evolved, model.y).matrix()),
                               max_abs(commutator(c0, model.y).matrix())};
}

double characteristic_match(const DilatedModel &model, const PureState &xi, std::span<const double> p_grid) {
    if (xi.dim() != model.object_dim) {
        throw DimensionError("characteristic_match: state has the wrong dimension");
    }
    const PureState psi = tensor(xi, model.phi0);
    const EigenDecomposition y_eig = herm_eig(model.y);
    const EigenDecomposition i_eig = herm_eig(model.index_operator);
    // Work in the eigenbases: <psi, e^{ipY} psi> = sum_k |<v_k, psi>|^2 e^{ip y_k}.
    const Eigen::VectorXd psi_weights = (y_eig.vectors.adjoint() * psi.amplitudes()).cwiseAbs2();
    const Eigen::VectorXd xi_weights = (i_eig.vectors.adjoint() * xi.amplitudes()).cwiseAbs2();
    double worst = 0.0;
    for (double p : p_grid) {
        Complex lhs = 0.0;
        for (Eigen::Index k = 0; k < psi_weights.size(); ++k) {
            lhs += psi_weights(k) * std::exp(Complex(0.0, p * y_eig.values(k)));
        }
        Complex rhs = 0.0;
        for (Eigen::Index k = 0; k < xi_weights.size(); ++k) {
            rhs += xi_weights(k) * std::exp(Complex(0.0, p * i_eig.values(k)));
        }
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

Instrument induced_instrument(const DilatedModel &model) {
    const std::size_t n = model.pointer_size;
    const std::size_t dim = model.object_dim;
    std::vector<double> labels, weights;
    std::vector<Operator> reductions;
    for (int idx : model.indices) {
        const std::size_t slot = pointer_slot(idx, n);
        Matrix g(dim, dim);
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = 0; b < dim; ++b) {
                g(a, b) = model.s(a * n + slot, b * n + 0);
            }
        }
        labels.push_back(static_cast<double>(idx));
        weights.push_back(1.0);
        reductions.emplace_back(std::move(g));
    }
    return Instrument(OutcomeSpace::discrete(std::move(labels), std::move(weights)), std::move(reductions),
                      kDiscreteCompletenessTol);
}

double unitarity_defect(const DilatedModel &model) {
    const Matrix &s = model.s.matrix();
    return max_abs(s.adjoint() * s - Matrix::Identity(s.rows(), s.cols()));
}

}  // namespace qnd
