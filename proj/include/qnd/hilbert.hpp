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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace qnd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Tolerance for hermiticity claimed at construction time (data errors).
inline constexpr double kHermitianHintTol = 1e-12;
/// Tolerance for hermiticity required by algorithms (accumulated roundoff).
inline constexpr double kHermitianTol = 1e-10;
/// Amplitudes at or below this magnitude are treated as zero by the phase gauge.
inline constexpr double kPhaseGaugeFloor = 1e-12;

/// Largest entry magnitude.
double max_abs(const Matrix &m);

/// Dense square complex operator on a finite-dimensional Hilbert space.
class Operator {
   public:
    /// Takes ownership of a square, non-empty matrix.
    explicit Operator(Matrix m);

    static Operator identity(std::size_t dim);
    static Operator zero(std::size_t dim);
    static Operator diagonal(std::span<const Complex> diag);
    static Operator diagonal(std::initializer_list<double> diag);
    /// Validates hermiticity to kHermitianHintTol and records the hint.
    static Operator hermitian(Matrix m);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix &matrix() const { return m_; }
    Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    std::optional<bool> hermitian_hint() const { return hermitian_hint_; }
    /// max |A_ij - conj(A_ji)|
    double hermiticity_defect() const;
    bool is_hermitian(double tol = kHermitianTol) const;

    Operator adjoint() const;

    friend Operator operator+(const Operator &a, const Operator &b);
    friend Operator operator-(const Operator &a, const Operator &b);
    friend Operator operator*(const Operator &a, const Operator &b);
    friend Operator operator*(Complex s, const Operator &a);

   private:
    Matrix m_;
    std::optional<bool> hermitian_hint_;
};

/// Complex amplitude vector. Not necessarily normalized: the linear filtering
/// equations carry unnormalized states whose squared norm is a likelihood.
class PureState {
   public:
    explicit PureState(Vector amplitudes);
    PureState(std::initializer_list<Complex> amplitudes);

    static PureState basis(std::size_t dim, std::size_t k);

    std::size_t dim() const { return static_cast<std::size_t>(v_.size()); }
    const Vector &amplitudes() const { return v_; }
    Complex operator[](std::size_t k) const { return v_(k); }

    double norm() const { return v_.norm(); }
    double norm2() const { return v_.squaredNorm(); }
    bool is_normalized(double tol = 1e-12) const;

    /// Unit-norm copy; throws NumericalError if the norm vanishes.
    PureState normalized() const;
    /// Unit-norm copy with the first amplitude above kPhaseGaugeFloor made real positive.
    PureState normalized_gauge() const;

   private:
    Vector v_;
};

PureState operator*(const Operator &a, const PureState &psi);
Complex inner(const PureState &a, const PureState &b);

/// Hermitian, trace-one, positive semidefinite when constructed via from_state or validated().
class DensityMatrix {
   public:
    explicit DensityMatrix(Matrix m);

    static DensityMatrix from_state(const PureState &psi);
    /// Checks hermiticity (1e-12), unit trace (1e-10) and min eigenvalue >= -1e-10.
    static DensityMatrix validated(Matrix m);

    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    const Matrix &matrix() const { return m_; }
    Complex trace() const { return m_.trace(); }
    double min_eigenvalue() const;

   private:
    Matrix m_;
};

/// AB - BA; throws DimensionError on mismatch.
Operator commutator(const Operator &a, const Operator &b);

/// Kronecker product, result[i*dB + k][j*dB + l] = A[i][j] * B[k][l].
Operator tensor(const Operator &a, const Operator &b);
PureState tensor(const PureState &a, const PureState &b);

struct EigenDecomposition {
    Eigen::VectorXd values;  // ascending
    Matrix vectors;          // orthonormal columns
};

/// Spectral decomposition of a Hermitian operator (precondition to kHermitianTol).
EigenDecomposition herm_eig(const Operator &a);

/// V f(Λ) V† for a scalar function on the spectrum.
template <typename F>
Operator functional_calculus(const EigenDecomposition &eig, F &&f) {
    const Eigen::Index n = eig.values.size();
    Vector diag(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        diag(k) = Complex(f(eig.values(k)));
    }
    return Operator(eig.vectors * diag.asDiagonal() * eig.vectors.adjoint());
}

/// exp(sA). Hermitian A goes through herm_eig; otherwise Padé scaling and squaring.
Operator expm_scaled(const Operator &a, Complex s);

/// max |exp(sA) exp(-sA) - I|
double expm_residual(const Operator &a, Complex s);

/// <psi, A psi> / <psi, psi>
Complex expectation(const Operator &a, const PureState &psi);

/// Half the sum of absolute eigenvalues of (a - b).
double trace_distance(const DensityMatrix &a, const DensityMatrix &b);

Operator pauli_x();
Operator pauli_y();
Operator pauli_z();

}  // namespace qnd
