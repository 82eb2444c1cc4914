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

#include <complex>
#include <cstddef>
#include <span>

namespace classim {

// Real-to-complex FFT of a fixed length, backed by FFTW. Plans are created
// once per length and shared; executing a plan is safe from many threads.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t spectrum_size() const noexcept { return n_ / 2 + 1; }

  /// in.size() == size(), out.size() == spectrum_size().
  void forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;

  /// Unnormalized inverse: forward followed by inverse scales by size().
  /// `in` is used as scratch and is clobbered.
  void inverse(std::span<std::complex<double>> in,
               std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

std::size_t next_pow2(std::size_t n);

}  // namespace classim
