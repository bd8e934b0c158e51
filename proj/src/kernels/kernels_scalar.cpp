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

#include "kernels_impl.hpp"

namespace qnd::kernels::detail {

void matvec_scalar_lanes(const double *a_re, const double *a_im, std::size_t dim, std::size_t lanes,
                         std::size_t first_lane, const double *x_re, const double *x_im, double *y_re,
                         double *y_im) {
    for (std::size_t i = 0; i < dim; ++i) {
        const double *ar = a_re + i * dim;
        const double *ai = a_im + i * dim;
        for (std::size_t p = first_lane; p < lanes; ++p) {
            double acc_re = 0.0;
            double acc_im = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double xr = x_re[j * lanes + p];
                const double xi = x_im[j * lanes + p];
                acc_re = acc_re + (ar[j] * xr - ai[j] * xi);
                acc_im = acc_im + (ar[j] * xi + ai[j] * xr);
            }
            y_re[i * lanes + p] = acc_re;
            y_im[i * lanes + p] = acc_im;
        }
    }
}

void em_step_scalar_lanes(const double *a_re, const double *a_im, const double *b_re, const double *b_im,
                          std::size_t dim, std::size_t lanes, std::size_t first_lane, const double *dw,
                          const double *x_re, const double *x_im, double *y_re, double *y_im) {
    for (std::size_t i = 0; i < dim; ++i) {
        const double *ar = a_re + i * dim;
        const double *ai = a_im + i * dim;
        const double *br = b_re + i * dim;
        const double *bi = b_im + i * dim;
        for (std::size_t p = first_lane; p < lanes; ++p) {
            double a_acc_re = 0.0;
            double a_acc_im = 0.0;
            double b_acc_re = 0.0;
            double b_acc_im = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double xr = x_re[j * lanes + p];
                const double xi = x_im[j * lanes + p];
                a_acc_re = a_acc_re + (ar[j] * xr - ai[j] * xi);
                a_acc_im = a_acc_im + (ar[j] * xi + ai[j] * xr);
                b_acc_re = b_acc_re + (br[j] * xr - bi[j] * xi);
                b_acc_im = b_acc_im + (br[j] * xi + bi[j] * xr);
            }
            y_re[i * lanes + p] = a_acc_re + dw[p] * b_acc_re;
            y_im[i * lanes + p] = a_acc_im + dw[p] * b_acc_im;
        }
    }
}

void norm2_scalar_lanes(std::size_t dim, std::size_t lanes, std::size_t first_lane, const double *x_re,
                        const double *x_im, double *out) {
    for (std::size_t p = first_lane; p < lanes; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double xr = x_re[j * lanes + p];
            const double xi = x_im[j * lanes + p];
            acc = acc + (xr * xr + xi * xi);
        }
        out[p] = acc;
    }
}

namespace {

void matvec_scalar(const double *a_re, const double *a_im, std::size_t dim, std::size_t lanes,
                   const double *x_re, const double *x_im, double *y_re, double *y_im) {
    matvec_scalar_lanes(a_re, a_im, dim, lanes, 0, x_re, x_im, y_re, y_im);
}

void em_step_scalar(const double *a_re, const double *a_im, const double *b_re, const double *b_im,
                    std::size_t dim, std::size_t lanes, const double *dw, const double *x_re,
                    const double *x_im, double *y_re, double *y_im) {
    em_step_scalar_lanes(a_re, a_im, b_re, b_im, dim, lanes, 0, dw, x_re, x_im, y_re, y_im);
}

void norm2_scalar(std::size_t dim, std::size_t lanes, const double *x_re, const double *x_im, double *out) {
    norm2_scalar_lanes(dim, lanes, 0, x_re, x_im, out);
}

}  // namespace

const KernelTable kScalarTable{Isa::scalar, &matvec_scalar, &em_step_scalar, &norm2_scalar};

}  // namespace qnd::kernels::detail
