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

#include "classim/convolver.hpp"

#include <algorithm>
#include <cstdint>

#include "classim/error.hpp"
#include "classim/fft.hpp"

namespace classim {
namespace {

std::size_t choose_block(std::size_t kernel_size, const ConvolveOptions& options) {
  if (kernel_size <= options.short_kernel_max) return next_pow2(4 * kernel_size);
  if (options.partition_size > 0) return next_pow2(options.partition_size);
  // About four partitions per kernel, bounded to keep FFTs cache-friendly.
  return std::clamp<std::size_t>(next_pow2(kernel_size) / 4, 1024, 16384);
}

}  // namespace

PartitionedConvolver::PartitionedConvolver(std::span<const double> kernel,
                                           const ConvolveOptions& options)
    : kernel_size_(kernel.size()), block_(choose_block(kernel.size(), options)) {
  require(!kernel.empty(), ErrorCode::kEmptyAudio, "convolution kernel is empty");
  const RealFft fft(2 * block_);
  std::vector<double> padded(2 * block_);
  for (std::size_t start = 0; start < kernel.size(); start += block_) {
    const std::size_t n = std::min(block_, kernel.size() - start);
    std::fill(padded.begin(), padded.end(), 0.0);
    std::copy_n(kernel.begin() + static_cast<std::ptrdiff_t>(start), n, padded.begin());
    std::vector<std::complex<double>> spectrum(fft.spectrum_size());
    fft.forward(padded, spectrum);
    partitions_.push_back(std::move(spectrum));
  }
}

std::vector<double> PartitionedConvolver::apply(std::span<const double> x) const {
  if (x.empty()) return {};
  const std::size_t block = block_;
  const std::size_t fft_size = 2 * block;
  const RealFft fft(fft_size);
  const std::size_t bins = fft.spectrum_size();
  const auto n_parts = static_cast<std::int64_t>(partitions_.size());
  const std::size_t out_len = x.size() + kernel_size_ - 1;
  const auto in_blocks = static_cast<std::int64_t>((x.size() + block - 1) / block);
  const auto out_blocks = static_cast<std::int64_t>((out_len + block - 1) / block);
  const double scale = 1.0 / static_cast<double>(fft_size);

  std::vector<double> y(out_len, 0.0);

  // Output blocks are processed in chunks so that memory stays bounded for
  // long inputs. Spectra and time-domain block results are computed in
  // parallel; the overlap-add into `y` runs in block order.
  const auto chunk = static_cast<std::int64_t>(
      std::max<std::size_t>(8, (std::size_t{1} << 22) / fft_size));
  std::vector<std::vector<std::complex<double>>> spectra;
  std::vector<std::vector<double>> results;

  for (std::int64_t j0 = 0; j0 < out_blocks; j0 += chunk) {
    const std::int64_t j1 = std::min(out_blocks, j0 + chunk);
    const std::int64_t s0 = std::max<std::int64_t>(0, j0 - n_parts + 1);
    const std::int64_t s1 = std::min(in_blocks, j1);
    const std::int64_t n_spec = std::max<std::int64_t>(0, s1 - s0);
    spectra.resize(static_cast<std::size_t>(n_spec));

#pragma omp parallel for schedule(static)
    for (std::int64_t s = s0; s < s1; ++s) {
      std::vector<double> padded(fft_size, 0.0);
      const std::size_t start = static_cast<std::size_t>(s) * block;
      const std::size_t n = std::min(block, x.size() - start);
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), n, padded.begin());
      auto& spec = spectra[static_cast<std::size_t>(s - s0)];
      spec.resize(bins);
      fft.forward(padded, spec);
    }

    results.resize(static_cast<std::size_t>(j1 - j0));
#pragma omp parallel for schedule(static)
    for (std::int64_t j = j0; j < j1; ++j) {
      std::vector<std::complex<double>> acc(bins, {0.0, 0.0});
      for (std::int64_t p = 0; p < n_parts; ++p) {
        const std::int64_t s = j - p;
        if (s < s0 || s >= s1) continue;
        const auto& xs = spectra[static_cast<std::size_t>(s - s0)];
        const auto& hs = partitions_[static_cast<std::size_t>(p)];
        for (std::size_t b = 0; b < bins; ++b) acc[b] += xs[b] * hs[b];
      }
      auto& out = results[static_cast<std::size_t>(j - j0)];
      out.resize(fft_size);
      fft.inverse(acc, out);
    }

    for (std::int64_t j = j0; j < j1; ++j) {
      const auto& out = results[static_cast<std::size_t>(j - j0)];
      const std::size_t start = static_cast<std::size_t>(j) * block;
      const std::size_t n = std::min(fft_size, out_len - start);
      for (std::size_t i = 0; i < n; ++i) y[start + i] += out[i] * scale;
    }
  }
  return y;
}

AudioBuffer convolve(const AudioBuffer& signal, const AudioBuffer& kernel,
                     const ConvolveOptions& options) {
  require(!signal.empty(), ErrorCode::kEmptyAudio, "signal is empty");
  require(!kernel.empty(), ErrorCode::kEmptyAudio, "kernel is empty");
  require(signal.sample_rate == kernel.sample_rate, ErrorCode::kSampleRateMismatch,
          "signal at " + std::to_string(signal.sample_rate) + " Hz, kernel at " +
              std::to_string(kernel.sample_rate) + " Hz");
  const PartitionedConvolver engine(kernel.samples, options);
  return AudioBuffer(engine.apply(signal.samples), signal.sample_rate);
}

}  // namespace classim
