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

// Compiled with -mavx2 (and without -mfma). Only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace qnd::kernels::detail {

namespace {

constexpr std::size_t kWidth = 4;

void matvec_avx2(const double *a_re, const double *a_im, std::size_t dim, std::size_t lanes,
                 const double *x_re, const double *x_im, double *y_re, double *y_im) {
    const std::size_t body = lanes - lanes % kWidth;
    for (std::size_t i = 0; i < dim; ++i) {
        const double *ar = a_re + i * dim;
        const double *ai = a_im + i * dim;
        for (std::size_t p = 0; p < body; p += kWidth) {
            __m256d acc_re = _mm256_setzero_pd();
            __m256d acc_im = _mm256_setzero_pd();
            for (std::size_t j = 0; j < dim; ++j) {
                const __m256d xr = _mm256_loadu_pd(x_re + j * lanes + p);
                const __m256d xi = _mm256_loadu_pd(x_im + j * lanes + p);
                const __m256d cr = _mm256_set1_pd(ar[j]);
                const __m256d ci = _mm256_set1_pd(ai[j]);
                acc_re = _mm256_add_pd(acc_re, _mm256_sub_pd(_mm256_mul_pd(cr, xr), _mm256_mul_pd(ci, xi)));
                acc_im = _mm256_add_pd(acc_im, _mm256_add_pd(_mm256_mul_pd(cr, xi), _mm256_mul_pd(ci, xr)));
            }
            _mm256_storeu_pd(y_re + i * lanes + p, acc_re);
            _mm256_storeu_pd(y_im + i * lanes + p, acc_im);
        }
    }
    if (body < lanes) {
        matvec_scalar_lanes(a_re, a_im, dim, lanes, body, x_re, x_im, y_re, y_im);
    }
}

void em_step_avx2(const double *a_re, const double *a_im, const double *b_re, const double *b_im,
                  std::size_t dim, std::size_t lanes, const double *dw, const double *x_re, const double *x_im,
                  double *y_re, double *y_im) {
    const std::size_t body = lanes - lanes % kWidth;
    for (std::size_t i = 0; i < dim; ++i) {
        const double *ar = a_re + i * dim;
        const double *ai = a_im + i * dim;
        const double *br = b_re + i * dim;
        const double *bi = b_im + i * dim;
        for (std::size_t p = 0; p < body; p += kWidth) {
            __m256d a_acc_re = _mm256_setzero_pd();
            __m256d a_acc_im = _mm256_setzero_pd();
            __m256d b_acc_re = _mm256_setzero_pd();
            __m256d b_acc_im = _mm256_setzero_pd();
            for (std::size_t j = 0; j < dim; ++j) {
                const __m256d xr = _mm256_loadu_pd(x_re + j * lanes + p);
                const __m256d xi = _mm256_loadu_pd(x_im + j * lanes + p);
                const __m256d cr = _mm256_set1_pd(ar[j]);
                const __m256d ci = _mm256_set1_pd(ai[j]);
                const __m256d dr = _mm256_set1_pd(br[j]);
                const __m256d di = _mm256_set1_pd(bi[j]);
                a_acc_re = _mm256_add_pd(a_acc_re, _mm256_sub_pd(_mm256_mul_pd(cr, xr), _mm256_mul_pd(ci, xi)));
                a_acc_im = _mm256_add_pd(a_acc_im, _mm256_add_pd(_mm256_mul_pd(cr, xi), _mm256_mul_pd(ci, xr)));
                b_acc_re = _mm256_add_pd(b_acc_re, _mm256_sub_pd(_mm256_mul_pd(dr, xr), _mm256_mul_pd(di, xi)));
                b_acc_im = _mm256_add_pd(b_acc_im, _mm256_add_pd(_mm256_mul_pd(dr, xi), _mm256_mul_pd(di, xr)));
            }
            const __m256d w = _mm256_loadu_pd(dw + p);
            _mm256_storeu_pd(y_re + i * lanes + p, _mm256_add_pd(a_acc_re, _mm256_mul_pd(w, b_acc_re)));
            _mm256_storeu_pd(y_im + i * lanes + p, _mm256_add_pd(a_acc_im, _mm256_mul_pd(w, b_acc_im)));
        }
    }
    if (body < lanes) {
        em_step_scalar_lanes(a_re, a_im, b_re, b_im, dim, lanes, body, dw, x_re, x_im, y_re, y_im);
    }
}

void norm2_avx2(std::size_t dim, std::size_t lanes, const double *x_re, const double *x_im, double *out) {
    const std::size_t body = lanes - lanes % kWidth;
    for (std::size_t p = 0; p < body; p += kWidth) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < dim; ++j) {
            const __m256d xr = _mm256_loadu_pd(x_re + j * lanes + p);
            const __m256d xi = _mm256_loadu_pd(x_im + j * lanes + p);
            acc = _mm256_add_pd(acc, _mm256_add_pd(_mm256_mul_pd(xr, xr), _mm256_mul_pd(xi, xi)));
        }
        _mm256_storeu_pd(out + p, acc);
    }
    if (body < lanes) {
        norm2_scalar_lanes(dim, lanes, body, x_re, x_im, out);
    }
}

}  // namespace

const KernelTable kAvx2Table{Isa::avx2, &matvec_avx2, &em_step_avx2, &norm2_avx2};

}  // namespace qnd::kernels::detail
