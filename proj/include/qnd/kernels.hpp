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

// Data-parallel inner loops of the trajectory engine.
//
// Every kernel exists as a scalar reference and, on x86-64, an AVX2 variant
// chosen at runtime. Variants perform the same floating-point operations in
// the same order per lane (no FMA contraction), so their results are
// bit-identical and a run is reproducible regardless of the selected ISA.
//
// States are batched structure-of-arrays: component j of lane p lives at
// index j * lanes + p of separate real and imaginary arrays. Operators are
// planar row-major: entry (i, j) at index i * dim + j.

#include <cstddef>
#include <vector>

#include "qnd/hilbert.hpp"

namespace qnd::kernels {

enum class Isa { scalar, avx2 };

const char *isa_name(Isa isa);

/// Operator split into planar real/imaginary row-major arrays.
struct PlanarMatrix {
    std::size_t dim = 0;
    std::vector<double> re;
    std::vector<double> im;

    static PlanarMatrix from(const Matrix &m);
};

/// A batch of `lanes` complex vectors of dimension `dim` in SoA layout.
class StateBatch {
   public:
    StateBatch(std::size_t dim, std::size_t lanes);

    std::size_t dim() const { return dim_; }
    std::size_t lanes() const { return lanes_; }

    void set_lane(std::size_t lane, const Vector &v);
    Vector lane(std::size_t lane) const;

    double *re() { return re_.data(); }
    double *im() { return im_.data(); }
    const double *re() const { return re_.data(); }
    const double *im() const { return im_.data(); }

   private:
    std::size_t dim_;
    std::size_t lanes_;
    std::vector<double> re_;
    std::vector<double> im_;
};

struct KernelTable {
    Isa isa;

    /// y = A x for every lane.
    void (*matvec)(const double *a_re, const double *a_im, std::size_t dim, std::size_t lanes,
                   const double *x_re, const double *x_im, double *y_re, double *y_im);

    /// y = A x + dw[p] (B x) for every lane p: one Euler–Maruyama step with A = I - K dt, B = L.
    void (*em_step)(const double *a_re, const double *a_im, const double *b_re, const double *b_im,
                    std::size_t dim, std::size_t lanes, const double *dw, const double *x_re,
                    const double *x_im, double *y_re, double *y_im);

    /// out[p] = sum_j |x_jp|^2
    void (*norm2)(std::size_t dim, std::size_t lanes, const double *x_re, const double *x_im, double *out);
};

const KernelTable &scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable *avx2_kernels();

bool cpu_supports(Isa isa);

/// Table for a specific ISA; throws PreconditionError if it is unavailable here.
const KernelTable &kernels_for(Isa isa);

/// Best ISA available on this machine. Setting QND_KERNELS=scalar forces the reference path.
const KernelTable &active_kernels();

/// Batched convenience wrappers over a table.
void matvec(const KernelTable &k, const PlanarMatrix &a, const StateBatch &x, StateBatch &y);
void em_step(const KernelTable &k, const PlanarMatrix &a, const PlanarMatrix &b, const double *dw,
             const StateBatch &x, StateBatch &y);
void norm2(const KernelTable &k, const StateBatch &x, double *out);

}  // namespace qnd::kernels
