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

#include <cstdint>

#include "classim/audio.hpp"
#include "classim/rir.hpp"

namespace classim {

/// Exponential sine sweep excitation. Defaults cover the audible band at the
/// 48 kHz measurement rate.
struct SweepSpec {
  double f1 = 20.0;
  double f2 = 20000.0;
  double duration_s = 10.0;
  int sample_rate = 48000;
  double fade_ms = 20.0;

  void validate() const;
  /// Sweep rate constant: duration / ln(f2 / f1), in seconds.
  double rate_constant() const;
  std::size_t length() const;
  /// Time offset, in seconds, at which the k-th harmonic response appears
  /// ahead of the linear response after deconvolution: rate_constant * ln k.
  double harmonic_advance_s(int k) const;
};

/// sin(2 pi f1 L (exp(t / L) - 1)) with raised-cosine fades at both ends.
AudioBuffer generate_sweep(const SweepSpec& spec);

/// Time-reversed sweep with an exp(-t / L) envelope, scaled so that
/// sweep (*) inverse has unit gain at the band's geometric-mean frequency.
AudioBuffer inverse_filter(const SweepSpec& spec);

/// Linear convolution of `recording` with the inverse filter. For an
/// identity system the result peaks at index spec.length() - 1.
AudioBuffer deconvolve(const AudioBuffer& recording, const SweepSpec& spec);

struct ExtractOptions {
  std::size_t rir_len = 48000;
  // Taps kept ahead of the reference peak.
  std::size_t pre_peak = 0;
};

struct RirGeometry {
  std::string rir_id;
  std::string room_id;
  Vec3 source_pos;
  Vec3 receiver_pos;
};

struct Extraction {
  Rir rir;
  // Index of the reference peak in the deconvolved signal and the first
  // deconvolved index copied into the returned taps.
  std::size_t peak_index = 0;
  std::size_t window_start = 0;
  double peak_value = 0.0;
};

/// Deconvolves a sweep recording and returns the peak-normalized causal
/// window that starts at the global magnitude peak (earliest on ties).
/// Harmonic distortion products precede the peak by L ln k and fall outside
/// the window.
Extraction extract_rir(const AudioBuffer& recording, const SweepSpec& spec,
                       const ExtractOptions& options,
                       const RirGeometry& meta = {});

}  // namespace classim
