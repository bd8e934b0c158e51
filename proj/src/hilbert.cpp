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

#include "qnd/hilbert.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qnd/errors.hpp"

namespace qnd {

namespace {

void require_same_dim(const Operator &a, const Operator &b, const char *what) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(what) + ": incompatible operators of dimension " +
                             std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
}

double hermiticity_defect_of(const Matrix &m) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
        }
    }
    return worst;
}

}  // namespace

double max_abs(const Matrix &m) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        worst = std::max(worst, std::abs(m.data()[i]));
    }
    return worst;
}

Operator::Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
        throw DimensionError("operator must be a non-empty square matrix, got " + std::to_string(m_.rows()) +
                             "x" + std::to_string(m_.cols()));
    }
}

Operator Operator::identity(std::size_t dim) {
    Operator op(Matrix::Identity(dim, dim));
    op.hermitian_hint_ = true;
    return op;
}

Operator Operator::zero(std::size_t dim) {
    Operator op(Matrix::Zero(dim, dim));
    op.hermitian_hint_ = true;
    return op;
}

Operator Operator::diagonal(std::span<const Complex> diag) {
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    bool real = true;
    for (std::size_t k = 0; k < diag.size(); ++k) {
        m(k, k) = diag[k];
        real = real && diag[k].imag() == 0.0;
    }
    Operator op(std::move(m));
    op.hermitian_hint_ = real;
    return op;
}

Operator Operator::diagonal(std::initializer_list<double> diag) {
    std::vector<Complex> values(diag.begin(), diag.end());
    return diagonal(std::span<const Complex>(values));
}

Operator Operator::hermitian(Matrix m) {
    Operator op(std::move(m));
    double defect = op.hermiticity_defect();
    if (defect > kHermitianHintTol) {
        throw PreconditionError("operator is not Hermitian: defect " + std::to_string(defect));
    }
    op.hermitian_hint_ = true;
    return op;
}

double Operator::hermiticity_defect() const { return hermiticity_defect_of(m_); }

bool Operator::is_hermitian(double tol) const {
    if (hermitian_hint_.has_value() && *hermitian_hint_) {
        return true;
    }
    return hermiticity_defect() <= tol;
}

Operator Operator::adjoint() const {
    Operator op(m_.adjoint());
    op.hermitian_hint_ = hermitian_hint_;
    return op;
}

Operator operator+(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "sum");
    return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "difference");
    return Operator(a.m_ - b.m_);
}

Operator operator*(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "product");
    return Operator(a.m_ * b.m_);
}

Operator operator*(Complex s, const Operator &a) { return Operator(s * a.m_); }

PureState::PureState(Vector amplitudes) : v_(std::move(amplitudes)) {
    if (v_.size() == 0) {
        throw DimensionError("state must have positive dimension");
    }
}

PureState::PureState(std::initializer_list<Complex> amplitudes) : v_(amplitudes.size()) {
    if (v_.size() == 0) {
        throw DimensionError("state must have positive dimension");
    }
    Eigen::Index k = 0;
    for (const Complex &a : amplitudes) {
        v_(k++) = a;
    }
}

PureState PureState::basis(std::size_t dim, std::size_t k) {
    if (k >= dim) {
        throw DimensionError("basis index " + std::to_string(k) + " out of range for dimension " +
                             std::to_string(dim));
    }
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return PureState(std::move(v));
}

bool PureState::is_normalized(double tol) const { return std::abs(norm2() - 1.0) <= tol; }

PureState PureState::normalized() const {
    double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw NumericalError("cannot normalize a state of norm " + std::to_string(n));
    }
    return PureState(v_ / n);
}

PureState PureState::normalized_gauge() const {
    Vector v = normalized().v_;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        double mag = std::abs(v(k));
        if (mag > kPhaseGaugeFloor) {
            Complex phase = std::conj(v(k)) / mag;
            v *= phase;
            v(k) = Complex(mag, 0.0);
            break;
        }
    }
    return PureState(std::move(v));
}

PureState operator*(const Operator &a, const PureState &psi) {
    if (a.dim() != psi.dim()) {
        throw DimensionError("operator of dimension " + std::to_string(a.dim()) +
                             " applied to state of dimension " + std::to_string(psi.dim()));
    }
    return PureState(a.matrix() * psi.amplitudes());
}

Complex inner(const PureState &a, const PureState &b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("inner product of states with different dimensions");
    }
    return a.amplitudes().dot(b.amplitudes());
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
        throw DimensionError("density matrix must be a non-empty square matrix");
    }
}

DensityMatrix DensityMatrix::from_state(const PureState &psi) {
    const Vector &v = psi.amplitudes();
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::validated(Matrix m) {
    DensityMatrix rho(std::move(m));
    double defect = hermiticity_defect_of(rho.m_);
    if (defect > kHermitianHintTol) {
        throw PreconditionError("density matrix is not Hermitian: defect " + std::to_string(defect));
    }
    if (std::abs(rho.trace() - 1.0) > 1e-10) {
        throw PreconditionError("density matrix trace differs from 1");
    }
    if (rho.min_eigenvalue() < -1e-10) {
        throw PreconditionError("density matrix has a negative eigenvalue");
    }
    return rho;
}

double DensityMatrix::min_eigenvalue() const {
    Matrix h = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

Operator commutator(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "commutator");
    return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

Operator tensor(const Operator &a, const Operator &b) {
    const Eigen::Index da = a.matrix().rows();
    const Eigen::Index db = b.matrix().rows();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        for (Eigen::Index j = 0; j < da; ++j) {
            out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
        }
    }
    return Operator(std::move(out));
}

PureState tensor(const PureState &a, const PureState &b) {
    const Eigen::Index da = a.amplitudes().size();
    const Eigen::Index db = b.amplitudes().size();
    Vector out(da * db);
    for (Eigen::Index i = 0; i < da; ++i) {
        out.segment(i * db, db) = a.amplitudes()(i) * b.amplitudes();
    }
    return PureState(std::move(out));
}

EigenDecomposition herm_eig(const Operator &a) {
    double defect = a.hermiticity_defect();
    if (defect > kHermitianTol) {
        throw PreconditionError("herm_eig requires a Hermitian operator: defect " + std::to_string(defect));
    }
    // Symmetrize so roundoff below the tolerance cannot leak into the solver.
    Matrix h = 0.5 * (a.matrix() + a.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Hermitian eigensolver did not converge");
    }
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

Operator expm_scaled(const Operator &a, Complex s) {
    Matrix result;
    if (a.is_hermitian(kHermitianTol)) {
        EigenDecomposition eig = herm_eig(a);
        result = functional_calculus(eig, [s](double x) { return std::exp(s * x); }).matrix();
    } else {
        Matrix scaled = s * a.matrix();
        result = scaled.exp();
        Matrix inverse = (-scaled).exp();
        double residual = max_abs(result * inverse - Matrix::Identity(a.dim(), a.dim()));
        double scale = std::max(1.0, max_abs(result) * max_abs(inverse) * static_cast<double>(a.dim()));
        if (std::isfinite(residual) && residual > 1e-8 * scale) {
            throw NumericalError("matrix exponential residual " + std::to_string(residual) +
                                 " exceeds tolerance");
        }
    }
    for (Eigen::Index k = 0; k < result.size(); ++k) {
        const Complex z = result.data()[k];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw NumericalError("matrix exponential overflowed");
        }
    }
    return Operator(std::move(result));
}

double expm_residual(const Operator &a, Complex s) {
    Matrix product = expm_scaled(a, s).matrix() * expm_scaled(a, -s).matrix();
    return max_abs(product - Matrix::Identity(a.dim(), a.dim()));
}

Complex expectation(const Operator &a, const PureState &psi) {
    PureState a_psi = a * psi;
    return inner(psi, a_psi) / psi.norm2();
}

double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    if (a.dim() != b.dim()) {
        throw DimensionError("trace distance between density matrices of different dimension");
    }
    Matrix diff = a.matrix() - b.matrix();
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

Operator pauli_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return Operator::hermitian(std::move(m));
}

Operator pauli_y() {
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return Operator::hermitian(std::move(m));
}

Operator pauli_z() { return Operator::diagonal({1.0, -1.0}); }

}  // namespace qnd
