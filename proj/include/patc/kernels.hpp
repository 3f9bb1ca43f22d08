// Copyright (c) 2026 patcorrect-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATC_KERNELS_HPP
#define PATC_KERNELS_HPP

#include <cstddef>

namespace patc::kernels {

// Operand layout for C[r x c] (+)= op(A) * op(B).
//   NN: A is [r x k], B is [k x c]
//   NT: A is [r x k], B is [c x k] (B transposed)
//   TN: A is [k x r] (A transposed), B is [k x c]
enum class Layout { NN, NT, TN };

// Serial reference kernel. Kept as the ground truth the parallel kernel is
// tested and benchmarked against.
void matmul_serial(const double* a, const double* b, double* c, int r, int k,
                   int cols, Layout layout, bool accumulate);

// OpenMP kernel, parallel over output rows. Bitwise-identical results to the
// serial kernel: each output element is an identically ordered dot product.
void matmul_omp(const double* a, const double* b, double* c, int r, int k,
                int cols, Layout layout, bool accumulate);

// Dispatches to the OpenMP kernel for large problems, serial otherwise.
void matmul(const double* a, const double* b, double* c, int r, int k,
            int cols, Layout layout, bool accumulate);

// Number of threads the OpenMP kernel will use (1 without OpenMP).
int max_threads();

}  // namespace patc::kernels

#endif  // PATC_KERNELS_HPP
