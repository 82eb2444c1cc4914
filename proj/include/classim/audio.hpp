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
#include <filesystem>
#include <span>
#include <vector>

namespace classim {

/// Mono signal with its sample rate. Samples are nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 16000;

  AudioBuffer() = default;
  AudioBuffer(std::vector<double> s, int rate)
      : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  double peak() const;

  /// Throws kInvalidArgument if the rate is not positive or a sample is not
  /// finite.
  void validate() const;
};

enum class WavEncoding { kPcm16, kFloat32 };

/// What write_wav does with samples outside [-1, 1].
enum class ClipPolicy { kClamp, kStrict };

AudioBuffer read_wav(const std::filesystem::path& path);

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::kFloat32,
               ClipPolicy policy = ClipPolicy::kClamp);

/// Band-limited sample-rate conversion (Kaiser-windowed sinc). The output
/// holds round(len * target / source) samples.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

struct LevelReport {
  double rms = 0.0;
  double rms_db = 0.0;      // -inf for a silent buffer
  double active_rms = 0.0;  // over frames above the activity threshold
  std::size_t active_frames = 0;
  std::size_t total_frames = 0;
};

struct LevelOptions {
  double frame_ms = 25.0;
  double threshold_db = -35.0;  // relative to the global RMS level
};

LevelReport measure_level(const AudioBuffer& buffer,
                          const LevelOptions& options = {});

double rms(std::span<const double> x);

double db_to_gain(double db);
double gain_to_db(double gain);

}  // namespace classim
