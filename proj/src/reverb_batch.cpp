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
#include "classim/error.hpp"
#include "classim/seed.hpp"

namespace classim {
namespace {

void match_peak(AudioBuffer& wet, double target_peak) {
  const double out_peak = wet.peak();
  if (out_peak > 0.0) {
    const double g = target_peak / out_peak;
    for (double& v : wet.samples) v *= g;
  }
}

}  // namespace

AudioBuffer reverberate(const AudioBuffer& signal, const Rir& rir,
                        const ConvolveOptions& options) {
  require(!signal.empty(), ErrorCode::kEmptyAudio, "signal is empty");
  const AudioBuffer kernel = resample(rir.taps, signal.sample_rate);
  AudioBuffer wet = convolve(signal, kernel, options);
  match_peak(wet, signal.peak());
  return wet;
}

AudioBuffer reverberate(const AudioBuffer& signal, const PartitionedConvolver& engine) {
  require(!signal.empty(), ErrorCode::kEmptyAudio, "signal is empty");
  AudioBuffer wet(engine.apply(signal.samples), signal.sample_rate);
  match_peak(wet, signal.peak());
  return wet;
}

KernelCache::KernelCache(const RirBank& bank, ConvolveOptions options)
    : bank_(bank), options_(options) {}

std::shared_ptr<const PartitionedConvolver> KernelCache::get(std::size_t rir_index,
                                                             int sample_rate) {
  require(rir_index < bank_.rirs.size(), ErrorCode::kInvalidArgument, "RIR index out of range");
  std::lock_guard lock(mutex_);
  auto& slot = cache_[{rir_index, sample_rate}];
  if (!slot) {
    const AudioBuffer k = resample(bank_.rirs[rir_index].taps, sample_rate);
    slot = std::make_shared<const PartitionedConvolver>(k.samples, options_);
  }
  return slot;
}

std::size_t assign_rir(std::uint64_t assignment_seed, std::string_view item_id,
                       std::size_t bank_size) {
  require(bank_size > 0, ErrorCode::kMissingDependency, "RIR bank is empty");
  Rng rng(derive_seed(assignment_seed, item_id));
  return static_cast<std::size_t>(rng.below(bank_size));
}

std::vector<ManifestEntry> reverberate_batch(const std::vector<ManifestEntry>& manifest_in,
                                             const RirBank& bank,
                                             const ReverbBatchOptions& options) {
  require(!bank.rirs.empty(), ErrorCode::kMissingDependency, "RIR bank is empty");
  std::filesystem::create_directories(options.output_dir);
  KernelCache kernels(bank, options.convolve);

  std::vector<ManifestEntry> out(manifest_in.size());
  std::vector<std::string> errors(manifest_in.size());
  const auto n = static_cast<std::int64_t>(manifest_in.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& item = manifest_in[static_cast<std::size_t>(i)];
    try {
      std::filesystem::path src(item.audio_path);
      if (src.is_relative()) src = options.input_dir / src;
      const AudioBuffer dry = read_wav(src);
      const std::size_t idx = assign_rir(options.assignment_seed, item.id, bank.rirs.size());
      const AudioBuffer wet = reverberate(dry, *kernels.get(idx, dry.sample_rate));
      const auto path = options.output_dir / (item.id + ".wav");
      write_wav(wet, path, options.encoding);
      ManifestEntry e = item;
      e.audio_path = path.string();
      e.rir_id = bank.rirs[idx].rir_id;
      e.duration_s = wet.duration_s();
      e.extra["rir_seed"] = options.assignment_seed;
      out[static_cast<std::size_t>(i)] = std::move(e);
    } catch (const std::exception& ex) {
      errors[static_cast<std::size_t>(i)] = item.id + ": " + ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) fail(ErrorCode::kIoError, "reverberation failed for " + e);
  }
  return out;
}

}  // namespace classim
