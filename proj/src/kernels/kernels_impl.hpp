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

#include "qnd/kernels.hpp"

namespace qnd::kernels::detail {

// Scalar bodies over lanes [first_lane, lanes). The SIMD variants call these
// for the tail so that every lane is computed by the same operation sequence.
void matvec_scalar_lanes(const double *a_re, const double *a_im, std::size_t dim, std::size_t lanes,
                         std::size_t first_lane, const double *x_re, const double *x_im, double *y_re,
                         double *y_im);
void em_step_scalar_lanes(const double *a_re, const double *a_im, const double *b_re, const double *b_im,
                          std::size_t dim, std::size_t lanes, std::size_t first_lane, const double *dw,
                          const double *x_re, const double *x_im, double *y_re, double *y_im);
void norm2_scalar_lanes(std::size_t dim, std::size_t lanes, std::size_t first_lane, const double *x_re,
                        const double *x_im, double *out);

extern const KernelTable kScalarTable;
#if defined(QND_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace qnd::kernels::detail
