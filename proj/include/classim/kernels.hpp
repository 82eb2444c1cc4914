// Copyright 2026 The classim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. Each OpenMP kernel has a plain serial
// counterpart with the `_reference` suffix; the reference versions are the
// oracles the tests and the benchmark compare against.
namespace classim::kernels {

/// Full linear convolution by the textbook double loop. O(N*M).
std::vector<double> convolve_direct_reference(std::span<const double> x,
                                              std::span<const double> h);

/// Same sums as the reference, parallel over blocks of output samples. The
/// per-output summation order does not depend on the thread count.
std::vector<double> convolve_direct(std::span<const double> x,
                                    std::span<const double> h);

/// Dense row-major [rows.size() x cols.size()] matrix of dot products.
/// All vectors must share one dimension.
std::vector<double> similarity_matrix_reference(
    std::span<const std::vector<double>> rows,
    std::span<const std::vector<double>> cols);

std::vector<double> similarity_matrix(std::span<const std::vector<double>> rows,
                                      std::span<const std::vector<double>> cols);

/// Elementwise out += gain * x.
void axpy(double gain, std::span<const double> x, std::span<double> out);

}  // namespace classim::kernels
