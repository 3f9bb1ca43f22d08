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

// Compares the serial reference matmul kernel against the OpenMP kernel and
// verifies that both produce bitwise-identical output.

#include <chrono>
#include <cstdio>
#include <functional>
#include <cstring>
#include <random>
#include <vector>

#include "patc/kernels.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = clock_type::now();
    fn();
    const auto t1 = clock_type::now();
    const double ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

}  // namespace

int main() {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  const int sizes[] = {32, 64, 128, 256, 512};
  const int repeats = 5;

  std::printf("threads: %d\n", patc::kernels::max_threads());
  std::printf("%8s %12s %12s %10s %10s\n", "n", "serial_ms", "omp_ms",
              "speedup", "identical");

  bool all_identical = true;
  for (const int n : sizes) {
    std::vector<double> a(static_cast<size_t>(n) * n);
    std::vector<double> b(static_cast<size_t>(n) * n);
    for (auto& v : a) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    std::vector<double> c_serial(static_cast<size_t>(n) * n);
    std::vector<double> c_omp(static_cast<size_t>(n) * n);

    const double ms_serial = time_ms(
        [&] {
          patc::kernels::matmul_serial(a.data(), b.data(), c_serial.data(), n,
                                       n, n, patc::kernels::Layout::NN, false);
        },
        repeats);
    const double ms_omp = time_ms(
        [&] {
          patc::kernels::matmul_omp(a.data(), b.data(), c_omp.data(), n, n, n,
                                    patc::kernels::Layout::NN, false);
        },
        repeats);

    const bool identical =
        std::memcmp(c_serial.data(), c_omp.data(),
                    c_serial.size() * sizeof(double)) == 0;
    all_identical = all_identical && identical;
    std::printf("%8d %12.3f %12.3f %10.2f %10s\n", n, ms_serial, ms_omp,
                ms_serial / ms_omp, identical ? "yes" : "NO");
  }

  if (!all_identical) {
    std::fprintf(stderr, "kernel outputs differ\n");
    return 1;
  }
  return 0;
}
