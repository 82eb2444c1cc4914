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

#include "classim/ess.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "classim/convolver.hpp"
#include "classim/error.hpp"

namespace classim {
namespace {

// DTFT of x at frequency f (Hz), summed directly.
std::complex<double> dtft(std::span<const double> x, double f, int sample_rate) {
  const double w = 2.0 * std::numbers::pi * f / sample_rate;
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return acc;
}

}  // namespace

void SweepSpec::validate() const {
  require(sample_rate > 0, ErrorCode::kInvalidArgument, "sweep sample rate must be positive");
  require(f1 > 0.0 && f1 < f2 && f2 < sample_rate / 2.0, ErrorCode::kInvalidArgument,
          "sweep band must satisfy 0 < f1 < f2 < sample_rate / 2");
  require(duration_s > 0.0, ErrorCode::kInvalidArgument, "sweep duration must be positive");
  require(fade_ms >= 0.0 && 2.0 * fade_ms / 1000.0 <= duration_s, ErrorCode::kInvalidArgument,
          "fades must fit inside the sweep");
}

double SweepSpec::rate_constant() const { return duration_s / std::log(f2 / f1); }

std::size_t SweepSpec::length() const {
  return static_cast<std::size_t>(std::lround(duration_s * sample_rate));
}

double SweepSpec::harmonic_advance_s(int k) const {
  return rate_constant() * std::log(static_cast<double>(k));
}

AudioBuffer generate_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t n = spec.length();
  const double rate = spec.rate_constant();
  const double k = 2.0 * std::numbers::pi * spec.f1 * rate;
  AudioBuffer out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    out.samples[i] = std::sin(k * std::expm1(t / rate));
  }
  const auto fade = static_cast<std::size_t>(std::lround(spec.fade_ms * spec.sample_rate / 1000.0));
  for (std::size_t i = 0; i < fade && i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    out.samples[i] *= w;
    out.samples[n - 1 - i] *= w;
  }
  return out;
}

AudioBuffer inverse_filter(const SweepSpec& spec) {
  const AudioBuffer sweep = generate_sweep(spec);
  const std::size_t n = sweep.size();
  const double rate = spec.rate_constant();
  AudioBuffer inv;
  inv.sample_rate = spec.sample_rate;
  inv.samples.resize(n);
  // The reversed sweep starts at f2; the envelope falls 6 dB per octave of
  // instantaneous frequency, flattening the sweep's pink spectrum.
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / spec.sample_rate;
    inv.samples[i] = sweep.samples[n - 1 - i] * std::exp(-t / rate);
  }
  const double f_mid = std::sqrt(spec.f1 * spec.f2);
  const double gain = std::abs(dtft(sweep.samples, f_mid, spec.sample_rate) *
                               dtft(inv.samples, f_mid, spec.sample_rate));
  for (double& v : inv.samples) v /= gain;
  return inv;
}

AudioBuffer deconvolve(const AudioBuffer& recording, const SweepSpec& spec) {
  spec.validate();
  require(recording.sample_rate == spec.sample_rate, ErrorCode::kSampleRateMismatch,
          "recording rate differs from sweep rate");
  require(!recording.empty(), ErrorCode::kEmptyAudio, "recording is empty");
  return convolve(recording, inverse_filter(spec));
}

Extraction extract_rir(const AudioBuffer& recording, const SweepSpec& spec,
                       const ExtractOptions& options, const RirGeometry& meta) {
  spec.validate();
  require(options.rir_len > 0, ErrorCode::kInvalidArgument, "rir_len must be positive");
  require(recording.sample_rate == spec.sample_rate, ErrorCode::kSampleRateMismatch,
          "recording rate differs from sweep rate");
  require(recording.size() >= spec.length(), ErrorCode::kInvalidArgument,
          "recording is shorter than the sweep");

  const AudioBuffer d = deconvolve(recording, spec);
  std::size_t peak = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double m = std::abs(d.samples[i]);
    if (m > best) {
      best = m;
      peak = i;
    }
  }
  require(best > 0.0, ErrorCode::kNoPeak, "deconvolved recording has no peak");

  Extraction ex;
  ex.peak_index = peak;
  ex.peak_value = d.samples[peak];
  ex.window_start = peak >= options.pre_peak ? peak - options.pre_peak : 0;

  Rir& rir = ex.rir;
  rir.rir_id = meta.rir_id;
  rir.room_id = meta.room_id;
  rir.source_pos = meta.source_pos;
  rir.receiver_pos = meta.receiver_pos;
  rir.origin = RirOrigin::kMeasured;
  rir.reference_delay =
      static_cast<std::int64_t>(peak) - static_cast<std::int64_t>(spec.length() - 1);
  rir.taps.sample_rate = spec.sample_rate;
  rir.taps.samples.assign(options.rir_len, 0.0);
  const double norm = 1.0 / best;
  for (std::size_t i = 0; i < options.rir_len && ex.window_start + i < d.size(); ++i) {
    rir.taps.samples[i] = d.samples[ex.window_start + i] * norm;
  }
  return ex;
}

}  // namespace classim
