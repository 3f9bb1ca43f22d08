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

#include "patc/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace patc::kernels {

namespace {

inline void row_nn(const double* a, const double* b, double* c, int i, int k,
                   int cols, bool accumulate) {
  double* crow = c + static_cast<size_t>(i) * cols;
  if (!accumulate) {
    for (int j = 0; j < cols; ++j) crow[j] = 0.0;
  }
  const double* arow = a + static_cast<size_t>(i) * k;
  for (int kk = 0; kk < k; ++kk) {
    const double av = arow[kk];
    const double* brow = b + static_cast<size_t>(kk) * cols;
    for (int j = 0; j < cols; ++j) crow[j] += av * brow[j];
  }
}

inline void row_nt(const double* a, const double* b, double* c, int i, int k,
                   int cols, bool accumulate) {
  double* crow = c + static_cast<size_t>(i) * cols;
  const double* arow = a + static_cast<size_t>(i) * k;
  for (int j = 0; j < cols; ++j) {
    const double* brow = b + static_cast<size_t>(j) * k;
    double acc = 0.0;
    for (int kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
    if (accumulate) {
      crow[j] += acc;
    } else {
      crow[j] = acc;
    }
  }
}

inline void row_tn(const double* a, const double* b, double* c, int i, int k,
                   int cols, int r, bool accumulate) {
  double* crow = c + static_cast<size_t>(i) * cols;
  if (!accumulate) {
    for (int j = 0; j < cols; ++j) crow[j] = 0.0;
  }
  for (int kk = 0; kk < k; ++kk) {
    const double av = a[static_cast<size_t>(kk) * r + i];
    const double* brow = b + static_cast<size_t>(kk) * cols;
    for (int j = 0; j < cols; ++j) crow[j] += av * brow[j];
  }
}

inline void one_row(const double* a, const double* b, double* c, int i, int r,
                    int k, int cols, Layout layout, bool accumulate) {
  switch (layout) {
    case Layout::NN:
      row_nn(a, b, c, i, k, cols, accumulate);
      break;
    case Layout::NT:
      row_nt(a, b, c, i, k, cols, accumulate);
      break;
    case Layout::TN:
      row_tn(a, b, c, i, k, cols, r, accumulate);
      break;
  }
}

}  // namespace

void matmul_serial(const double* a, const double* b, double* c, int r, int k,
                   int cols, Layout layout, bool accumulate) {
  for (int i = 0; i < r; ++i) one_row(a, b, c, i, r, k, cols, layout, accumulate);
}

void matmul_omp(const double* a, const double* b, double* c, int r, int k,
                int cols, Layout layout, bool accumulate) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = 0; i < r; ++i) one_row(a, b, c, i, r, k, cols, layout, accumulate);
#else
  matmul_serial(a, b, c, r, k, cols, layout, accumulate);
#endif
}

void matmul(const double* a, const double* b, double* c, int r, int k,
            int cols, Layout layout, bool accumulate) {
  // Thread spawn overhead dominates below ~256k flops.
  const size_t work = static_cast<size_t>(r) * k * cols;
  if (work >= (1u << 17) && r >= 2 && max_threads() > 1) {
    matmul_omp(a, b, c, r, k, cols, layout, accumulate);
  } else {
    matmul_serial(a, b, c, r, k, cols, layout, accumulate);
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace patc::kernels
