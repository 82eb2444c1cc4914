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

#include "classim/kernels.hpp"

#include <algorithm>
#include <cstdint>

#include "classim/error.hpp"

namespace classim::kernels {

std::vector<double> convolve_direct_reference(std::span<const double> x,
                                              std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
  }
  return y;
}

std::vector<double> convolve_direct(std::span<const double> x,
                                    std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const auto n = static_cast<std::int64_t>(x.size());
  const auto m = static_cast<std::int64_t>(h.size());
  const std::int64_t out_len = n + m - 1;
  std::vector<double> y(static_cast<std::size_t>(out_len), 0.0);
  // Output chunks are independent. Inside a chunk the tap loop is outermost
  // so the inner loop is a contiguous, vectorizable axpy.
  constexpr std::int64_t kChunk = 2048;
  const std::int64_t chunks = (out_len + kChunk - 1) / kChunk;
  const double* xp = x.data();
  const double* hp = h.data();
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t k0 = c * kChunk;
    const std::int64_t k1 = std::min(out_len, k0 + kChunk);
    double* yp = y.data();
    const std::int64_t j_lo = std::max<std::int64_t>(0, k0 - (n - 1));
    const std::int64_t j_hi = std::min(m - 1, k1 - 1);
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      const double hj = hp[j];
      if (hj == 0.0) continue;
      // valid k: k - j in [0, n)
      const std::int64_t lo = std::max(k0, j);
      const std::int64_t hi = std::min(k1, j + n);
      const double* xs = xp + (lo - j);
      double* ys = yp + lo;
#pragma omp simd
      for (std::int64_t k = 0; k < hi - lo; ++k) ys[k] += hj * xs[k];
    }
  }
  return y;
}

namespace {

void check_dims(std::span<const std::vector<double>> rows,
                std::span<const std::vector<double>> cols) {
  const std::size_t dim = !rows.empty() ? rows[0].size()
                          : !cols.empty() ? cols[0].size()
                                          : 0;
  for (const auto& v : rows) {
    require(v.size() == dim, ErrorCode::kDimensionMismatch,
            "embedding dimensions differ");
  }
  for (const auto& v : cols) {
    require(v.size() == dim, ErrorCode::kDimensionMismatch,
            "embedding dimensions differ");
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

std::vector<double> similarity_matrix_reference(
    std::span<const std::vector<double>> rows,
    std::span<const std::vector<double>> cols) {
  check_dims(rows, cols);
  std::vector<double> out(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[i * cols.size() + j] = dot(rows[i], cols[j]);
    }
  }
  return out;
}

std::vector<double> similarity_matrix(std::span<const std::vector<double>> rows,
                                      std::span<const std::vector<double>> cols) {
  check_dims(rows, cols);
  std::vector<double> out(rows.size() * cols.size());
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[static_cast<std::size_t>(i) * cols.size() + j] =
          dot(rows[static_cast<std::size_t>(i)], cols[j]);
    }
  }
  return out;
}

void axpy(double gain, std::span<const double> x, std::span<double> out) {
  const std::size_t n = std::min(x.size(), out.size());
  for (std::size_t i = 0; i < n; ++i) out[i] += gain * x[i];
}

}  // namespace classim::kernels
