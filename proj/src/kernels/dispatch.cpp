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

#include <cstdlib>
#include <string>
#include <string_view>

#include "kernels_impl.hpp"
#include "qnd/errors.hpp"

namespace qnd::kernels {

const char *isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

PlanarMatrix PlanarMatrix::from(const Matrix &m) {
    PlanarMatrix out;
    out.dim = static_cast<std::size_t>(m.rows());
    out.re.resize(out.dim * out.dim);
    out.im.resize(out.dim * out.dim);
    for (std::size_t i = 0; i < out.dim; ++i) {
        for (std::size_t j = 0; j < out.dim; ++j) {
            out.re[i * out.dim + j] = m(i, j).real();
            out.im[i * out.dim + j] = m(i, j).imag();
        }
    }
    return out;
}

StateBatch::StateBatch(std::size_t dim, std::size_t lanes)
    : dim_(dim), lanes_(lanes), re_(dim * lanes, 0.0), im_(dim * lanes, 0.0) {}

void StateBatch::set_lane(std::size_t lane, const Vector &v) {
    if (static_cast<std::size_t>(v.size()) != dim_ || lane >= lanes_) {
        throw DimensionError("state batch lane assignment out of range");
    }
    for (std::size_t j = 0; j < dim_; ++j) {
        re_[j * lanes_ + lane] = v(j).real();
        im_[j * lanes_ + lane] = v(j).imag();
    }
}

Vector StateBatch::lane(std::size_t lane) const {
    Vector v(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
        v(j) = Complex(re_[j * lanes_ + lane], im_[j * lanes_ + lane]);
    }
    return v;
}

const KernelTable &scalar_kernels() { return detail::kScalarTable; }

const KernelTable *avx2_kernels() {
#if defined(QND_HAVE_AVX2)
    return &detail::kAvx2Table;
#else
    return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(QND_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable &kernels_for(Isa isa) {
    if (isa == Isa::scalar) {
        return scalar_kernels();
    }
    if (!cpu_supports(isa) || avx2_kernels() == nullptr) {
        throw PreconditionError(std::string("kernel variant '") + isa_name(isa) + "' is not available");
    }
    return *avx2_kernels();
}

namespace {

const KernelTable &select_kernels() {
    const char *forced = std::getenv("QND_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") {
        return scalar_kernels();
    }
    if (cpu_supports(Isa::avx2)) {
        return *avx2_kernels();
    }
    return scalar_kernels();
}

}  // namespace

const KernelTable &active_kernels() {
    static const KernelTable &table = select_kernels();
    return table;
}

void matvec(const KernelTable &k, const PlanarMatrix &a, const StateBatch &x, StateBatch &y) {
    if (a.dim != x.dim() || y.dim() != x.dim() || y.lanes() != x.lanes()) {
        throw DimensionError("matvec batch dimensions disagree");
    }
    k.matvec(a.re.data(), a.im.data(), a.dim, x.lanes(), x.re(), x.im(), y.re(), y.im());
}

void em_step(const KernelTable &k, const PlanarMatrix &a, const PlanarMatrix &b, const double *dw,
             const StateBatch &x, StateBatch &y) {
    if (a.dim != x.dim() || b.dim != x.dim() || y.dim() != x.dim() || y.lanes() != x.lanes()) {
        throw DimensionError("em_step batch dimensions disagree");
    }
    k.em_step(a.re.data(), a.im.data(), b.re.data(), b.im.data(), a.dim, x.lanes(), dw, x.re(), x.im(), y.re(),
              y.im());
}

void norm2(const KernelTable &k, const StateBatch &x, double *out) {
    k.norm2(x.dim(), x.lanes(), x.re(), x.im(), out);
}

}  // namespace qnd::kernels
