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
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "classim/audio.hpp"
#include "classim/manifest.hpp"
#include "classim/room.hpp"

namespace classim {

struct ConvolveOptions {
  // Kernels up to this length use a single partition whose block is the
  // next power of two >= 4x the kernel length.
  std::size_t short_kernel_max = 8192;
  // Partition size for long kernels; 0 picks one from the kernel length.
  std::size_t partition_size = 0;
};

// Uniformly partitioned overlap-add convolution. The kernel spectrum is
// computed once, so one instance can be applied to many signals.
class PartitionedConvolver {
 public:
  explicit PartitionedConvolver(std::span<const double> kernel,
                                const ConvolveOptions& options = {});

  /// Full linear convolution, length x.size() + kernel_size() - 1.
  std::vector<double> apply(std::span<const double> x) const;

  std::size_t kernel_size() const noexcept { return kernel_size_; }
  std::size_t block_size() const noexcept { return block_; }
  std::size_t partitions() const noexcept { return partitions_.size(); }

 private:
  std::size_t kernel_size_;
  std::size_t block_;
  std::vector<std::vector<std::complex<double>>> partitions_;
};

/// Full linear convolution of two buffers at the same sample rate.
AudioBuffer convolve(const AudioBuffer& signal, const AudioBuffer& kernel,
                     const ConvolveOptions& options = {});

/// Convolves `signal` with the RIR (resampled to the signal rate first) and
/// rescales the result to the input's peak level.
AudioBuffer reverberate(const AudioBuffer& signal, const Rir& rir,
                        const ConvolveOptions& options = {});

/// Transformed bank kernels, resampled per target rate on first use.
/// Thread-safe; entries are immutable once built.
class KernelCache {
 public:
  KernelCache(const RirBank& bank, ConvolveOptions options = {});
  std::shared_ptr<const PartitionedConvolver> get(std::size_t rir_index, int sample_rate);

 private:
  const RirBank& bank_;
  ConvolveOptions options_;
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, std::shared_ptr<const PartitionedConvolver>> cache_;
};

/// Applies a prepared kernel and rescales to the input's peak level.
AudioBuffer reverberate(const AudioBuffer& signal, const PartitionedConvolver& engine);

/// Uniform, seeded choice of a bank entry for one item. Depends only on the
/// seed and the item id, never on scheduling.
std::size_t assign_rir(std::uint64_t assignment_seed, std::string_view item_id,
                       std::size_t bank_size);

struct ReverbBatchOptions {
  std::filesystem::path output_dir;
  // Base directory for relative audio paths in the input manifest.
  std::filesystem::path input_dir;
  std::uint64_t assignment_seed = 0;
  ConvolveOptions convolve;
  WavEncoding encoding = WavEncoding::kFloat32;
};

/// Reverberates every manifest item with one bank RIR each, writing
/// `<output_dir>/<id>.wav`. Returned records carry rir_id.
std::vector<ManifestEntry> reverberate_batch(const std::vector<ManifestEntry>& manifest_in,
                                             const RirBank& bank,
                                             const ReverbBatchOptions& options);

}  // namespace classim
